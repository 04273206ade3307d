#pragma once
// Weighted quadratic estimates for the bisectorial products DB: square
// function integrals, the dyadically averaged principal part and its
// approximation error, and the replay of the main square-function bound.

#include "degenlab/operators.hpp"

#include <array>
#include <optional>
#include <string>

namespace degen {

// default t-grid for square-function integrals; bounds chosen so that for the
// extreme discrete frequencies the truncated tails of u^2/(1+u^2)^2 stay below
// the quadrature tolerance.
TGrid default_tgrid(const WeightedGrid& grid, int per_octave = 8,
                    double tmin_factor = 1.0 / 32.0, double tmax = 8.0);

struct QuadraticReport {
  double sup_ratio = 0.0;  // sup over probes of (int ||Q_t v||^2 dt/t) / ||v||^2
  double inf_ratio = 0.0;
  int probes = 0;
  std::string to_json() const;
};

// int ||Q_t^B v||_w^2 dt/t by log-trapezoid quadrature on tg.
double quadratic_functional(const SpectralCalculus& calc, const VecC& v, const TGrid& tg);

// ratio sup/inf over random probes in clos R(D) plus eigenvector directions.
QuadraticReport quadratic_ratio_sup(const SpectralCalculus& calc, const TGrid& tg,
                                    int probes, std::uint64_t seed);

// diagnostic reproducing the arctangent constant: quadrature of
// <t(-Lap_w)^{1/2}(I - t^2 Lap_w)^{-1} f, f>_w dt/t = (pi/2)||f||^2 for f
// orthogonal to constants.  Returns the measured constant.
double resolvent_halfpi_constant(const WeightedGrid& grid, const VecC& f,
                                 int per_octave = 8, double tmax = 64.0);

// Principal part gamma_t(x): 2x2 matrix field with columns (Q_t^B e_j)(x) for
// the constant sections e_1 = (1,0), e_2 = (0,1).
struct PrincipalPart {
  TGrid tg;
  int n = 0;
  // per t node: four grid vectors, column-major [g11 g21; g12 g22]
  std::vector<std::array<VecC, 4>> cols;

  // pointwise spectral norm |gamma_t(x)|
  Vec norms(int ti) const;
  // gamma_t(x) z for a 2-vector grid field z (applied pointwise)
  VecC apply(int ti, const VecC& z) const;
};

PrincipalPart principal_part(const SpectralCalculus& calc, const TGrid& tg);

struct PrincipalPartChecks {
  double max_cube_avg = 0.0;   // sup_t sup_{Q in Delta_t} avg_Q |gamma_t|^2 dw
  double carleson = 0.0;       // dyadic Carleson norm of |gamma_t(x)|^2
  double et_bound = 0.0;       // sup ||gamma_t E_t u|| / ||E_t u|| over probes
};
PrincipalPartChecks principal_part_checks(const SpectralCalculus& calc,
                                          const PrincipalPart& pp,
                                          int probes, std::uint64_t seed);

struct PpaReport {
  double total = 0.0;            // int ||(Q_t^B - gamma_t E_t) v||^2 dt/t / ||v||^2
  double term_high = 0.0;        // Q_t (I - P_t) v contribution
  double term_resolvent = 0.0;   // (Q_t P_t - gamma_t E_t P_t) v contribution
  double term_avg = 0.0;         // gamma_t E_t (P_t - I) v contribution
  double annihilation = 0.0;     // max_t ||(Q_t^B - gamma_t E_t) const|| (should vanish)
};

// principal part approximation: error functional split against the smoothing
// family P_t = diag((I - t^2 Lap_w)^{-1}, (I - t^2 Lap)^{-1}).
PpaReport ppa_error(const SpectralCalculus& calc, const PrincipalPart& pp,
                    const VecC& v, bool verbose);

// Replay of the square-function proof skeleton on one root arc: mean-value
// exponent fits, weighted Poincare constant, and the sectioned Carleson bound
// for the restricted principal part aggregated through the stopping packing.
struct ProofReplayReport {
  double tau1_fit = 0.0;        // exponent of the dw mean-value bound
  double tau2_fit = 0.0;        // exponent of the dx mean-value bound
  double poincare = 0.0;        // max weighted Poincare constant over probes
  double section_K = 0.0;       // max over the (tau, nu) net of the sawtooth Carleson constant
  double aggregated = 0.0;      // packing-aggregated bound for the full Carleson norm
  double direct = 0.0;          // directly measured Carleson norm over the root box
  std::string to_json() const;
};

struct StoppingParams;  // corona.hpp

ProofReplayReport proof_replay(const WeightModel& wm, const SpectralCalculus& calc,
                               const PrincipalPart& pp, const DyadicCube& root,
                               const StoppingParams& sp, std::uint64_t seed);

}  // namespace degen
