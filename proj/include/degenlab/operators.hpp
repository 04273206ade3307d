#pragma once
// Discrete weighted first-order operators on the circle: the self-adjoint
// Dirac-type block operator D built from the forward difference and its
// weighted adjoint, pointwise accretive coefficient multipliers B, and the
// holomorphic functional calculus of the bisectorial products DB and BD.

#include "degenlab/dyadic.hpp"
#include "degenlab/weights.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace degen {

// Uniform n-cell grid with cell-averaged weight samples; the Hilbert space is
// C^{2n} with <f,g>_w = h sum_i f_i conj(g_i) w_i (weight repeated per block).
struct WeightedGrid {
  int n = 0;
  double h = 0.0;
  Vec w;  // size n, cell averages of the weight

  static WeightedGrid from_weight(const WeightModel& wm, int n);

  cplx inner(const VecC& f, const VecC& g) const;  // 2n or n vectors
  double norm(const VecC& f) const;
  // flat scaling s_i = sqrt(h w_i); maps the weighted metric to the euclidean one
  Vec flat_scale() const;
};

// D = [[0, div_w], [-G, 0]] with (Gf)_i = (f_{i+1}-f_i)/h periodic and
// div_w = -G^{*w} = -W^{-1} G^T W, so D is exactly self-adjoint for <.,.>_w.
struct DiscreteD {
  WeightedGrid grid;
  Mat G;          // n x n forward difference
  Mat divw;       // n x n weighted divergence
  Mat D;          // 2n x 2n
  Mat Dflat;      // symmetrized S D S^{-1}
  Mat range_basis;  // 2n x (2n-2) orthonormal (flat) basis of clos R(D)

  // null vectors of D in physical coordinates: (1,0) and (0,1/w)
  VecC null1() const;
  VecC null2() const;
  VecC apply(const VecC& u) const;
  // weighted-orthogonal projection onto clos R(D) = N(D)^perp
  VecC project_range(const VecC& u) const;
};

DiscreteD build_D(const WeightedGrid& grid);

// Pointwise 2x2 complex multiplier B(x): (Bu)(x) = B(x) u(x) on (perp, par).
struct CoefficientMatrix {
  VecC b11, b12, b21, b22;  // size n

  static CoefficientMatrix identity(int n);
  static CoefficientMatrix diagonal(const VecC& a, const VecC& d);
  static CoefficientMatrix scalar(int n, cplx z);
  // I + eps * (complex gaussian entries), deterministic in seed; rescaled if
  // needed so the pointwise numerical range stays in Re > margin.
  static CoefficientMatrix random_accretive(int n, double eps, std::uint64_t seed,
                                            double margin = 0.05);
  // hermitian pointwise matrices (for Rellich identities)
  static CoefficientMatrix random_hermitian(int n, double eps, std::uint64_t seed,
                                            double margin = 0.05);

  int n() const { return static_cast<int>(b11.size()); }
  VecC apply(const VecC& u) const;
  CoefficientMatrix adjoint() const;   // pointwise conjugate transpose
  CoefficientMatrix inverse() const;   // pointwise inverse
  MatC dense(int ncopy) const;         // 2n x 2n operator matrix
};

struct AccretivityReport {
  double kappa = 0.0;       // min Re <Bv,v>_w / ||v||_w^2 over clos R(D)
  double upper = 0.0;       // operator norm bound max_x |B(x)|
  double angle = 0.0;       // max |arg <Bv,v>_w| over sampled v in clos R(D)
};

AccretivityReport accretivity(const DiscreteD& D, const CoefficientMatrix& B,
                              int samples = 64, std::uint64_t seed = 7);

// Holomorphic functional calculus data for T = DB (and, by similarity, BD):
// eigendecomposition of the compression of DB to clos R(D) in flat coordinates.
class SpectralCalculus {
 public:
  SpectralCalculus(const DiscreteD& D, const CoefficientMatrix& B);

  const VecC& eigenvalues() const { return lambda_; }
  double eigenvector_condition() const { return condV_; }
  double reconstruction_error() const { return recon_err_; }
  double bisector_angle() const;   // max over spectrum of angle to the real axis
  bool using_fallback() const { return fallback_; }

  // f(T) v for T = DB; pure-calculus f acts as f(0) I on N(DB).
  VecC apply_db(const std::function<cplx(cplx)>& f, const VecC& v) const;
  // f(T, t) v over a whole t sweep, decomposing v only once.
  std::vector<VecC> apply_db_sweep(const std::function<cplx(cplx, double)>& f,
                                   const std::vector<double>& ts, const VecC& v) const;
  // f(T) v for T = BD (similar operator B (DB) B^{-1}; N(BD) = N(D)).
  VecC apply_bd(const std::function<cplx(cplx)>& f, const VecC& v) const;

  // resolvent-quadrature path (contour integral over the bisector boundary),
  // for decaying f; used as cross-check and ill-conditioning fallback.
  VecC apply_db_contour(const std::function<cplx(cplx)>& f, const VecC& v,
                        int points_per_ray = 64) const;
  // sgn(T) v through the integrated square-function representation.
  VecC apply_db_sgn_quadrature(const VecC& v, int points = 96) const;

  const DiscreteD& d_op() const { return *d_; }
  const CoefficientMatrix& b_op() const { return *b_; }

  // spectral decomposition of v: coordinates in the range eigenbasis and the
  // N(DB) component (null = alpha z1 + beta z2 with B z_i in N(D))
  struct Split {
    VecC coords;   // 2n-2
    VecC null_part;  // flat coordinates, 2n
  };
  Split split_db(const VecC& v) const;  // v physical -> decomposition
  int range_dim() const { return static_cast<int>(lambda_.size()); }
  // eigen-coordinate helpers for batched symbol application on the range
  VecC to_eigen_coords(const VecC& range_coords) const { return Vlu_.solve(range_coords); }
  VecC from_eigen_coords(const VecC& e) const { return V_ * e; }

 private:
  VecC assemble(const VecC& coords, const VecC& null_flat, cplx f0) const;

  std::shared_ptr<const DiscreteD> d_;
  std::shared_ptr<const CoefficientMatrix> b_;
  MatC C_;        // compressed DB, (2n-2)^2
  VecC lambda_;
  MatC V_;
  Eigen::PartialPivLU<MatC> Vlu_;
  double condV_ = 0.0, recon_err_ = 0.0;
  bool fallback_ = false;
  // flat null basis of N(DB): z_i = B^{-1} n_i, and Gram data for the splitting
  MatC znull_;  // 2n x 2
  MatC nnull_;  // 2n x 2 (flat basis of N(D))
  Eigen::PartialPivLU<MatC> gram_db_, gram_bd_;
};

// dense non-hermitian eigendecomposition A = V diag(vals) V^{-1} (LAPACK-backed)
void dense_eig(const MatC& a, VecC& vals, MatC& vecs);

// standard symbol families
namespace symbols {
std::function<cplx(cplx)> resolvent(double t);   // (1 + i t z)^{-1}
std::function<cplx(cplx)> qt(double t);          // t z (1 + t^2 z^2)^{-1}
std::function<cplx(cplx)> pt(double t);          // (1 + t^2 z^2)^{-1}
std::function<cplx(cplx)> sgn();                 // sign of Re z (0 at 0)
std::function<cplx(cplx)> chi_plus();
std::function<cplx(cplx)> chi_minus();
std::function<cplx(cplx)> semigroup_abs(double t);       // e^{-t|z|}
std::function<cplx(cplx)> semigroup_plus(double t);      // e^{-t z} chi+(z)
std::function<cplx(cplx)> semigroup_minus(double t);     // e^{+t z} chi-(z)
std::function<cplx(cplx)> semigroup_abs_over_abs(double t);  // e^{-t|z|}/|z| (0 at 0)
}  // namespace symbols

// Off-diagonal decay probe: for disjoint arcs E, F and u supported on F,
// measures ||1_E R_t u|| / ||u|| at dist(E,F)/t in {2,4,8,16} and fits the
// decay order N in (1 + dist/t)^{-N}.
struct OffDiagReport {
  std::vector<double> ratios;   // dist/t values probed
  std::vector<double> norms;    // measured relative norms
  double fitted_order = 0.0;
};
OffDiagReport offdiag_probe(const DiscreteD& D, const CoefficientMatrix& B,
                            double t, std::uint64_t seed);

// Weighted Laplacian, Riesz transform isometry and the Kato square root
// comparison for block-diagonal coefficients B = diag(a, d).
struct RieszKatoReport {
  double riesz_isometry_defect = 0.0;  // max | ||R_w f|| / ||f|| - 1 | over probes
  double kato_lower = 0.0, kato_upper = 0.0;  // bounds of ||sqrt(-a div_w d grad)u|| / ||grad u||
  double exact_defect = 0.0;  // a=d=1 case: | ||sqrt(-Lap_w)u|| - ||grad u|| | / ||grad u||
};
RieszKatoReport riesz_and_kato(const WeightedGrid& grid, const VecC& a, const VecC& d,
                               int probes, std::uint64_t seed);

}  // namespace degen
