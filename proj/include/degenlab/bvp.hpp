#pragma once
// Boundary value problems for div(A grad u) = 0 in the weighted half space
// via the first-order method: the hat transform of the coefficients, semigroup
// solutions of the t-independent problem, Rellich identities, the singular
// integral pieces of the perturbed representation, and a finite-difference
// reference solver.

#include "degenlab/operators.hpp"
#include "degenlab/quadratic.hpp"

#include <string>

namespace degen {

enum class BVPKind { Dirichlet, Neumann, Regularity };

// Degenerate coefficients A = w * (pointwise 2x2 accretive M); B = hat(w^{-1}A).
struct CoefficientPair {
  CoefficientMatrix A;  // full coefficients (including the weight factor)
  CoefficientMatrix B;  // transformed multiplier entering DB
};

// hat transform: for C = [[c11, c12],[c21, c22]] pointwise,
//   hat(C) = [[c11^{-1}, -c11^{-1} c12],[c21 c11^{-1}, c22 - c21 c11^{-1} c12]];
// involutive and accretivity-preserving.
CoefficientMatrix hat_transform(const CoefficientMatrix& c);

CoefficientPair make_coefficients(const WeightedGrid& grid, const CoefficientMatrix& M);

// Solution of the t-independent problem in first-order form.
struct BVPSolution {
  BVPKind kind = BVPKind::Dirichlet;
  TGrid tg;
  int n = 0;
  UpperHalfField f;       // conormal gradient (f_perp, f_par) per t
  std::vector<Vec> u_re;  // potential u on the t grid (real part; test data real)
  std::vector<Vec> u_im;
  VecC trace;             // boundary trace of the spectral datum h+
  double trace_condition = 0.0;  // conditioning of the trace isomorphism solve
  double mean_offset = 0.0;      // Dirichlet constant c with u = c - v_perp
  std::string to_csv() const;    // rows t,x,u,re f_perp,im f_perp,re f_par,im f_par
};

// Solve the BVP for t-independent coefficients by inverting the trace map on
// the positive spectral subspace and evolving with e^{-t|DB|} (Dirichlet runs
// through BD and the potential v).  `datum` is a boundary function: u|_{t=0}
// (Dirichlet), conormal derivative (Neumann), or tangential gradient
// (Regularity; must have dx mean zero).
BVPSolution solve_tindep(const SpectralCalculus& calc, const CoefficientPair& cp,
                         BVPKind kind, const VecC& datum, const TGrid& tg);

// Rellich defect for the trace f of a solution:
//   | <f, Bf>_w - 2 Re <f_perp, (Bf)_perp>_w | / ||f||_w^2   (hermitian A: ~0)
double rellich_residual(const DiscreteD& D, const CoefficientMatrix& B, const VecC& f);

// Singular integral of the representation for t-dependent perturbations:
//   (S_E g)_t = int_0^t e^{-(t-s)DB} chi+ D (E_s g_s) ds
//             - int_t^oo e^{(s-t)DB} chi- D (E_s g_s) ds
// with the diagonal octave |ln(s/t)| < 1/8 excluded.  `tilde` computes the
// BD-version (no leading D, spectral spaces of BD); D tilde(S) = S holds.
UpperHalfField sE_apply(const SpectralCalculus& calc, const UpperHalfField& g,
                        const std::vector<VecC>& perturb, bool tilde);

// residual spectral datum h- = -int_0^oo e^{s DB} chi- D (E_s g_s) ds
VecC sE_residual_trace(const SpectralCalculus& calc, const UpperHalfField& g,
                       const std::vector<VecC>& perturb);

// Finite-difference reference: five-point conservative scheme for
// div_{t,x}(A grad u) = 0 on (0,Tmax) x circle, zero conormal flux at the top.
struct FDReference {
  int n = 0, m = 0;       // x cells, t layers
  double tmax = 0.0;
  std::vector<Vec> u;     // u[j] = layer at t_j = j * tmax/m (size n)
  double refinement_error = 0.0;  // self-reported error vs the half-resolution solve
};
FDReference fd_reference_solve(const WeightedGrid& grid, const CoefficientMatrix& A,
                               BVPKind kind, const Vec& datum, double tmax, int m);

// Interior regularity diagnostics on a solved field: Caccioppoli ratios
//   int_{B} |grad u|^2 w  <=  C r^{-2} int_{2B} |u|^2 w
// and the first-order local coercivity analogue, over sampled interior balls.
struct InteriorReport {
  double caccioppoli = 0.0;     // max ratio over sampled balls
  double coercivity = 0.0;      // max first-order coercivity ratio
  double whitney_decay = 0.0;   // max Whitney average of f at the largest scales
  std::string to_json() const;
};
InteriorReport interior_checks(const WeightedGrid& grid, const BVPSolution& sol,
                               const CoefficientMatrix& B, std::uint64_t seed);

// Sweep of coefficient perturbations A0 + eps * dA: smallest singular value of
// the trace map and solution drift per eps.
struct PerturbationPoint {
  double eps = 0.0;
  double smin = 0.0;      // smallest singular value of the trace isomorphism
  double drift = 0.0;     // relative L2 drift of the solved trace f vs eps = 0
};
std::vector<PerturbationPoint> perturbation_sweep(const WeightedGrid& grid,
                                                  const CoefficientMatrix& M0,
                                                  const CoefficientMatrix& dM,
                                                  BVPKind kind, const VecC& datum,
                                                  const std::vector<double>& eps_list);

}  // namespace degen
