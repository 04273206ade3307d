#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include "degenlab/operators.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace degen {
namespace {

double rng_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

cplx rng_cgauss(std::mt19937_64& g) {
  // Box-Muller with explicit mantissa draws (bit-reproducible)
  const double u1 = std::max(rng_unit(g), 1e-300), u2 = rng_unit(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

// smallest eigenvalue of the hermitian part of a 2x2 matrix
double min_re_eig2(cplx a, cplx b, cplx c, cplx d) {
  const double h11 = a.real(), h22 = d.real();
  const cplx h12 = 0.5 * (b + std::conj(c));
  const double tr = h11 + h22;
  const double disc = std::sqrt(0.25 * (h11 - h22) * (h11 - h22) + std::norm(h12));
  return 0.5 * tr - disc;
}

double spec_norm2(cplx a, cplx b, cplx c, cplx d) {
  // largest singular value of a 2x2 matrix
  const double g11 = std::norm(a) + std::norm(c), g22 = std::norm(b) + std::norm(d);
  const cplx g12 = std::conj(a) * b + std::conj(c) * d;
  const double tr = g11 + g22;
  const double disc = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + std::norm(g12));
  return std::sqrt(0.5 * tr + disc);
}

}  // namespace

void dense_eig(const MatC& a, VecC& vals, MatC& vecs) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  MatC work = a;
  vals.resize(n);
  vecs.resize(n, n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, vals.data(), nullptr,
      std::max<lapack_int>(n, 1), vecs.data(), std::max<lapack_int>(n, 1));
  if (info != 0) throw std::runtime_error("zgeev failed to converge");
}

WeightedGrid WeightedGrid::from_weight(const WeightModel& wm, int n) {
  WeightedGrid g;
  g.n = n;
  g.h = 1.0 / n;
  g.w = wm.grid_cell_averages(n);
  return g;
}

cplx WeightedGrid::inner(const VecC& f, const VecC& g) const {
  cplx s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]) * w[i % n];
  return s * h;
}

double WeightedGrid::norm(const VecC& f) const {
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += std::norm(f[i]) * w[i % n];
  return std::sqrt(s * h);
}

Vec WeightedGrid::flat_scale() const {
  return (w * h).cwiseSqrt();
}

VecC DiscreteD::null1() const {
  VecC v = VecC::Zero(2 * grid.n);
  v.head(grid.n).setOnes();
  return v;
}

VecC DiscreteD::null2() const {
  VecC v = VecC::Zero(2 * grid.n);
  for (int i = 0; i < grid.n; ++i) v[grid.n + i] = 1.0 / grid.w[i];
  return v;
}

VecC DiscreteD::apply(const VecC& u) const { return D * u; }

VecC DiscreteD::project_range(const VecC& u) const {
  const int n = grid.n;
  const Vec s = grid.flat_scale();
  VecC y(2 * n);
  for (int i = 0; i < 2 * n; ++i) y[i] = u[i] * s[i % n];
  const VecC c = range_basis.transpose() * y;
  const VecC yr = range_basis * c;
  VecC out(2 * n);
  for (int i = 0; i < 2 * n; ++i) out[i] = yr[i] / s[i % n];
  return out;
}

DiscreteD build_D(const WeightedGrid& grid) {
  const int n = grid.n;
  if (n < 8) throw std::invalid_argument("grid too small (need N >= 8)");
  DiscreteD d;
  d.grid = grid;
  d.G = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d.G(i, i) = -1.0 / grid.h;
    d.G(i, (i + 1) % n) = 1.0 / grid.h;
  }
  // div_w = -W^{-1} G^T W, the exact adjoint of -G in the weighted metric
  d.divw = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (d.G(j, i) != 0.0) d.divw(i, j) = -(1.0 / grid.w[i]) * d.G(j, i) * grid.w[j];
  d.D = Mat::Zero(2 * n, 2 * n);
  d.D.block(0, n, n, n) = d.divw;
  d.D.block(n, 0, n, n) = -d.G;

  const Vec s = grid.flat_scale();
  d.Dflat = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      if (d.D(i, j) != 0.0) d.Dflat(i, j) = s[i % n] * d.D(i, j) / s[j % n];

  // flat null vectors: S (1,0) and S (0, 1/w); orthonormal complement via QR
  Mat nullmat(2 * n, 2);
  nullmat.setZero();
  for (int i = 0; i < n; ++i) {
    nullmat(i, 0) = s[i];
    nullmat(n + i, 1) = s[i] / grid.w[i];
  }
  Eigen::HouseholderQR<Mat> qr(nullmat);
  const Mat qfull = qr.householderQ();
  d.range_basis = qfull.rightCols(2 * n - 2);
  return d;
}

CoefficientMatrix CoefficientMatrix::identity(int n) {
  CoefficientMatrix b;
  b.b11 = VecC::Ones(n);
  b.b22 = VecC::Ones(n);
  b.b12 = VecC::Zero(n);
  b.b21 = VecC::Zero(n);
  return b;
}

CoefficientMatrix CoefficientMatrix::diagonal(const VecC& a, const VecC& d) {
  CoefficientMatrix b;
  b.b11 = a;
  b.b22 = d;
  b.b12 = VecC::Zero(a.size());
  b.b21 = VecC::Zero(a.size());
  return b;
}

CoefficientMatrix CoefficientMatrix::scalar(int n, cplx z) {
  CoefficientMatrix b;
  b.b11 = VecC::Constant(n, z);
  b.b22 = VecC::Constant(n, z);
  b.b12 = VecC::Zero(n);
  b.b21 = VecC::Zero(n);
  return b;
}

CoefficientMatrix CoefficientMatrix::random_accretive(int n, double eps,
                                                      std::uint64_t seed, double margin) {
  std::mt19937_64 gen(seed);
  CoefficientMatrix m;
  m.b11 = m.b12 = m.b21 = m.b22 = VecC::Zero(n);
  VecC r11(n), r12(n), r21(n), r22(n);
  for (int i = 0; i < n; ++i) {
    r11[i] = rng_cgauss(gen);
    r12[i] = rng_cgauss(gen);
    r21[i] = rng_cgauss(gen);
    r22[i] = rng_cgauss(gen);
  }
  // scale so the pointwise hermitian part of I + s*R stays above `margin`
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::min(worst, min_re_eig2(r11[i], r12[i], r21[i], r22[i]));
  double sfac = eps;
  if (worst < 0.0 && 1.0 + eps * worst < margin)
    sfac = 0.95 * (margin - 1.0) / worst;
  for (int i = 0; i < n; ++i) {
    m.b11[i] = 1.0 + sfac * r11[i];
    m.b12[i] = sfac * r12[i];
    m.b21[i] = sfac * r21[i];
    m.b22[i] = 1.0 + sfac * r22[i];
  }
  return m;
}

CoefficientMatrix CoefficientMatrix::random_hermitian(int n, double eps,
                                                      std::uint64_t seed, double margin) {
  std::mt19937_64 gen(seed);
  VecC r11(n), r12(n), r21(n), r22(n);
  for (int i = 0; i < n; ++i) {
    r11[i] = 2.0 * rng_unit(gen) - 1.0;              // real diagonal
    const cplx off = rng_cgauss(gen);
    r12[i] = off;
    r21[i] = std::conj(off);
    r22[i] = 2.0 * rng_unit(gen) - 1.0;
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::min(worst, min_re_eig2(r11[i], r12[i], r21[i], r22[i]));
  double sfac = eps;
  if (worst < 0.0 && 1.0 + eps * worst < margin)
    sfac = 0.95 * (margin - 1.0) / worst;
  CoefficientMatrix m;
  m.b11 = VecC::Ones(n) + sfac * r11;
  m.b12 = sfac * r12;
  m.b21 = sfac * r21;
  m.b22 = VecC::Ones(n) + sfac * r22;
  return m;
}

VecC CoefficientMatrix::apply(const VecC& u) const {
  const int m = n();
  VecC out(2 * m);
  for (int i = 0; i < m; ++i) {
    out[i] = b11[i] * u[i] + b12[i] * u[m + i];
    out[m + i] = b21[i] * u[i] + b22[i] * u[m + i];
  }
  return out;
}

CoefficientMatrix CoefficientMatrix::adjoint() const {
  CoefficientMatrix a;
  a.b11 = b11.conjugate();
  a.b12 = b21.conjugate();
  a.b21 = b12.conjugate();
  a.b22 = b22.conjugate();
  return a;
}

CoefficientMatrix CoefficientMatrix::inverse() const {
  const int m = n();
  CoefficientMatrix a;
  a.b11 = a.b12 = a.b21 = a.b22 = VecC::Zero(m);
  for (int i = 0; i < m; ++i) {
    const cplx det = b11[i] * b22[i] - b12[i] * b21[i];
    if (std::abs(det) < 1e-14)
      throw std::runtime_error("coefficient matrix not pointwise invertible");
    a.b11[i] = b22[i] / det;
    a.b12[i] = -b12[i] / det;
    a.b21[i] = -b21[i] / det;
    a.b22[i] = b11[i] / det;
  }
  return a;
}

MatC CoefficientMatrix::dense(int ncopy) const {
  const int m = n();
  if (ncopy != m) throw std::invalid_argument("size mismatch");
  MatC out = MatC::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    out(i, i) = b11[i];
    out(i, m + i) = b12[i];
    out(m + i, i) = b21[i];
    out(m + i, m + i) = b22[i];
  }
  return out;
}

AccretivityReport accretivity(const DiscreteD& D, const CoefficientMatrix& B,
                              int samples, std::uint64_t seed) {
  const int n = D.grid.n;
  const Mat& Q = D.range_basis;
  // compressed multiplier: pointwise B commutes with the flat scaling
  MatC BQ(2 * n, Q.cols());
  for (int c = 0; c < Q.cols(); ++c) BQ.col(c) = B.apply(Q.col(c).cast<cplx>());
  const MatC H = Q.transpose().cast<cplx>() * BQ;
  const MatC Hsym = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<MatC> es(Hsym);
  AccretivityReport rep;
  rep.kappa = es.eigenvalues().minCoeff();

  for (int i = 0; i < n; ++i)
    rep.upper = std::max(rep.upper, spec_norm2(B.b11[i], B.b12[i], B.b21[i], B.b22[i]));

  std::mt19937_64 gen(seed);
  double ang = 0.0;
  auto probe = [&](const VecC& c) {
    const VecC y = Q.cast<cplx>() * c;
    const cplx num = (B.apply(y)).dot(y);  // Eigen dot conjugates the first arg
    // <Bv, v>_w = sum (Bv)_i conj(v_i): conjugate-linear in v
    const cplx val = std::conj(num);
    if (std::abs(val) > 0.0) ang = std::max(ang, std::abs(std::arg(val)));
  };
  for (int s = 0; s < samples; ++s) {
    VecC c(Q.cols());
    for (int i = 0; i < c.size(); ++i) c[i] = rng_cgauss(gen);
    probe(c);
  }
  probe(es.eigenvectors().col(0));
  rep.angle = ang;
  return rep;
}

SpectralCalculus::SpectralCalculus(const DiscreteD& D, const CoefficientMatrix& B)
    : d_(std::make_shared<DiscreteD>(D)), b_(std::make_shared<CoefficientMatrix>(B)) {
  const int n = D.grid.n;
  const Mat& Q = D.range_basis;
  MatC BQ(2 * n, Q.cols());
  for (int c = 0; c < Q.cols(); ++c) BQ.col(c) = B.apply(Q.col(c).cast<cplx>());
  C_ = Q.transpose().cast<cplx>() * (D.Dflat * BQ);

  dense_eig(C_, lambda_, V_);
  Vlu_ = Eigen::PartialPivLU<MatC>(V_);
  const MatC Vinv = Vlu_.inverse();
  condV_ = V_.cwiseAbs().colwise().sum().maxCoeff() *
           Vinv.cwiseAbs().colwise().sum().maxCoeff();
  const MatC recon = V_ * lambda_.asDiagonal() * Vinv;
  recon_err_ = (recon - C_).norm() / std::max(C_.norm(), 1e-300);
  fallback_ = condV_ > 1e8;

  // flat null data: n_i spanning N(D), z_i = B^{-1} n_i spanning N(DB)
  const Vec s = D.grid.flat_scale();
  nnull_ = MatC::Zero(2 * n, 2);
  for (int i = 0; i < n; ++i) {
    nnull_(i, 0) = s[i];
    nnull_(n + i, 1) = s[i] / D.grid.w[i];
  }
  const CoefficientMatrix binv = B.inverse();
  znull_.resize(2 * n, 2);
  znull_.col(0) = binv.apply(nnull_.col(0));
  znull_.col(1) = binv.apply(nnull_.col(1));
  MatC gram(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gram(i, j) = nnull_.col(i).adjoint() * znull_.col(j);
  gram_db_ = Eigen::PartialPivLU<MatC>(gram);
  gram_bd_ = gram_db_;
}

double SpectralCalculus::bisector_angle() const {
  double a = 0.0;
  for (int i = 0; i < lambda_.size(); ++i) {
    const double ar = std::abs(std::arg(lambda_[i]));
    a = std::max(a, std::min(ar, M_PI - ar));
  }
  return a;
}

SpectralCalculus::Split SpectralCalculus::split_db(const VecC& v) const {
  const int n = d_->grid.n;
  const Vec s = d_->grid.flat_scale();
  VecC y(2 * n);
  for (int i = 0; i < 2 * n; ++i) y[i] = v[i] * s[i % n];
  VecC rhs(2);
  for (int i = 0; i < 2; ++i) rhs[i] = nnull_.col(i).adjoint() * y;
  const VecC ab = gram_db_.solve(rhs);
  const VecC ynull = znull_ * ab;
  Split sp;
  sp.null_part = ynull;
  sp.coords = d_->range_basis.transpose().cast<cplx>() * (y - ynull);
  return sp;
}

VecC SpectralCalculus::assemble(const VecC& coords, const VecC& null_flat, cplx f0) const {
  const int n = d_->grid.n;
  const Vec s = d_->grid.flat_scale();
  const VecC y = d_->range_basis.cast<cplx>() * coords + f0 * null_flat;
  VecC out(2 * n);
  for (int i = 0; i < 2 * n; ++i) out[i] = y[i] / s[i % n];
  return out;
}

VecC SpectralCalculus::apply_db(const std::function<cplx(cplx)>& f, const VecC& v) const {
  const Split sp = split_db(v);
  VecC c = Vlu_.solve(sp.coords);
  for (int i = 0; i < c.size(); ++i) c[i] *= f(lambda_[i]);
  return assemble(V_ * c, sp.null_part, f(cplx(0.0)));
}

std::vector<VecC> SpectralCalculus::apply_db_sweep(const std::function<cplx(cplx, double)>& f,
                                                   const std::vector<double>& ts,
                                                   const VecC& v) const {
  const Split sp = split_db(v);
  const VecC e = Vlu_.solve(sp.coords);
  std::vector<VecC> out;
  out.reserve(ts.size());
  for (double t : ts) {
    VecC c = e;
    for (int i = 0; i < c.size(); ++i) c[i] *= f(lambda_[i], t);
    out.push_back(assemble(V_ * c, sp.null_part, f(cplx(0.0), t)));
  }
  return out;
}

VecC SpectralCalculus::apply_bd(const std::function<cplx(cplx)>& f, const VecC& v) const {
  const int n = d_->grid.n;
  const Vec s = d_->grid.flat_scale();
  VecC y(2 * n);
  for (int i = 0; i < 2 * n; ++i) y[i] = v[i] * s[i % n];
  // y = B Q r + alpha n1 + beta n2, with Q r orthogonal to the n_i
  const CoefficientMatrix binv = b_->inverse();
  const VecC z = binv.apply(y);
  VecC rhs(2);
  for (int i = 0; i < 2; ++i) rhs[i] = nnull_.col(i).adjoint() * z;
  const VecC ab = gram_bd_.solve(rhs);
  const VecC r = d_->range_basis.transpose().cast<cplx>() * (z - znull_ * ab);
  VecC c = Vlu_.solve(r);
  for (int i = 0; i < c.size(); ++i) c[i] *= f(lambda_[i]);
  const VecC yr = b_->apply(d_->range_basis.cast<cplx>() * (V_ * c));
  const VecC yout = yr + f(cplx(0.0)) * (nnull_ * ab);
  VecC out(2 * n);
  for (int i = 0; i < 2 * n; ++i) out[i] = yout[i] / s[i % n];
  return out;
}

VecC SpectralCalculus::apply_db_contour(const std::function<cplx(cplx)>& f, const VecC& v,
                                        int points_per_ray) const {
  // Cauchy integral over the bisector boundary (counterclockwise around each
  // half of the spectrum); valid for symbols decaying at 0 and infinity.
  const Split sp = split_db(v);
  double rmin = 1e300, rmax = 0.0;
  for (int i = 0; i < lambda_.size(); ++i) {
    rmin = std::min(rmin, std::abs(lambda_[i]));
    rmax = std::max(rmax, std::abs(lambda_[i]));
  }
  const double theta = 0.5 * (bisector_angle() + M_PI / 2.0);
  const double slo = std::log(rmin * 1e-4), shi = std::log(rmax * 1e4);

  // Gauss-Legendre panels in s = ln r
  const int panels = std::max(1, points_per_ray / 8);
  VecC acc = VecC::Zero(sp.coords.size());
  const MatC I = MatC::Identity(C_.rows(), C_.cols());
  auto add_ray = [&](cplx dir, double sign) {
    // integral over r in (0, oo) of f(r dir) (r dir - C)^{-1} c * dir dr, weighted
    for (int p = 0; p < panels; ++p) {
      const double a = slo + (shi - slo) * p / panels;
      const double b = slo + (shi - slo) * (p + 1) / panels;
      // 8-point Gauss-Legendre on [a,b]
      static const double gx[4] = {0.1834346424956498, 0.5255324099163290,
                                   0.7966664774136267, 0.9602898564975363};
      static const double gw[4] = {0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
      const double c0 = 0.5 * (a + b), rr = 0.5 * (b - a);
      for (int k = 0; k < 8; ++k) {
        const double node = k < 4 ? c0 - rr * gx[k] : c0 + rr * gx[k - 4];
        const double wk = rr * gw[k % 4];
        const double r = std::exp(node);
        const cplx lam = r * dir;
        const VecC x = (lam * I - C_).partialPivLu().solve(sp.coords);
        acc += sign * wk * r * dir * f(lam) * x;
      }
    }
  };
  // right sector: inward along e^{i theta}, outward along e^{-i theta}
  add_ray(std::polar(1.0, -theta), 1.0);
  add_ray(std::polar(1.0, theta), -1.0);
  // left sector: outward along -e^{-i theta}, inward along -e^{i theta}
  add_ray(-std::polar(1.0, -theta), 1.0);
  add_ray(-std::polar(1.0, theta), -1.0);
  acc /= cplx(0.0, 2.0 * M_PI);
  return assemble(acc, sp.null_part, f(cplx(0.0)));
}

VecC SpectralCalculus::apply_db_sgn_quadrature(const VecC& v, int points) const {
  // sgn(T) = (2/pi) int_0^oo  tT (1 + t^2 T^2)^{-1}  dt/t  on clos R(T)
  const Split sp = split_db(v);
  double rmin = 1e300, rmax = 0.0;
  for (int i = 0; i < lambda_.size(); ++i) {
    rmin = std::min(rmin, std::abs(lambda_[i]));
    rmax = std::max(rmax, std::abs(lambda_[i]));
  }
  const double tlo = 1e-4 / rmax, thi = 1e4 / rmin;
  const MatC C2 = C_ * C_;
  const MatC I = MatC::Identity(C_.rows(), C_.cols());
  VecC acc = VecC::Zero(sp.coords.size());
  const double ds = std::log(thi / tlo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    const double t = tlo * std::exp(ds * k);
    const double wgt = (k == 0 || k == points - 1) ? 0.5 * ds : ds;
    const VecC x = (I + t * t * C2).partialPivLu().solve(C_ * sp.coords);
    acc += wgt * t * x;
  }
  acc *= 2.0 / M_PI;
  return assemble(acc, sp.null_part, 0.0);
}

namespace symbols {

static cplx sgn_z(cplx z) {
  if (z == cplx(0.0)) return 0.0;
  return z.real() >= 0.0 ? 1.0 : -1.0;
}

std::function<cplx(cplx)> resolvent(double t) {
  return [t](cplx z) { return 1.0 / (1.0 + cplx(0.0, t) * z); };
}
std::function<cplx(cplx)> qt(double t) {
  return [t](cplx z) { return t * z / (1.0 + t * t * z * z); };
}
std::function<cplx(cplx)> pt(double t) {
  return [t](cplx z) { return 1.0 / (1.0 + t * t * z * z); };
}
std::function<cplx(cplx)> sgn() {
  return [](cplx z) { return sgn_z(z); };
}
std::function<cplx(cplx)> chi_plus() {
  return [](cplx z) { return z == cplx(0.0) ? cplx(0.0) : 0.5 * (1.0 + sgn_z(z)); };
}
std::function<cplx(cplx)> chi_minus() {
  return [](cplx z) { return z == cplx(0.0) ? cplx(0.0) : 0.5 * (1.0 - sgn_z(z)); };
}
std::function<cplx(cplx)> semigroup_abs(double t) {
  return [t](cplx z) { return std::exp(-t * sgn_z(z) * z); };
}
std::function<cplx(cplx)> semigroup_plus(double t) {
  // branch instead of multiplying by chi+: 0 * exp(overflow) would give NaN
  return [t](cplx z) {
    return (z == cplx(0.0) || z.real() < 0.0) ? cplx(0.0) : std::exp(-t * z);
  };
}
std::function<cplx(cplx)> semigroup_minus(double t) {
  return [t](cplx z) {
    return (z == cplx(0.0) || z.real() >= 0.0) ? cplx(0.0) : std::exp(t * z);
  };
}
std::function<cplx(cplx)> semigroup_abs_over_abs(double t) {
  return [t](cplx z) {
    if (z == cplx(0.0)) return cplx(0.0);
    const cplx az = sgn_z(z) * z;
    return std::exp(-t * az) / az;
  };
}

}  // namespace symbols

OffDiagReport offdiag_probe(const DiscreteD& D, const CoefficientMatrix& B,
                            double t, std::uint64_t seed) {
  const int n = D.grid.n;
  const double h = D.grid.h;
  // resolvent by direct dense solve (independent of the eigen path)
  const MatC M = MatC::Identity(2 * n, 2 * n) +
                 cplx(0.0, t) * (D.D.cast<cplx>() * B.dense(n));
  Eigen::PartialPivLU<MatC> lu(M);

  // source supported on an arc of width ~t around x = 1/2
  std::mt19937_64 gen(seed);
  VecC u = VecC::Zero(2 * n);
  const double xc = 0.5;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    if (circle_dist(x, xc) <= 0.5 * t) {
      u[i] = rng_cgauss(gen);
      u[n + i] = rng_cgauss(gen);
    }
  }
  const double unorm = D.grid.norm(u);
  const VecC ru = lu.solve(u);

  OffDiagReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double ratio : {2.0, 4.0, 8.0, 16.0}) {
    const double dist = ratio * t;
    if (dist + t > 0.5) continue;
    VecC masked = VecC::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) * h;
      const double dd = circle_dist(x, xc) - 0.5 * t;
      if (dd >= dist && dd < dist + t) {
        masked[i] = ru[i];
        masked[n + i] = ru[n + i];
      }
    }
    const double r = D.grid.norm(masked) / unorm;
    rep.ratios.push_back(ratio);
    rep.norms.push_back(r);
    const double lx = std::log(1.0 + ratio), ly = std::log(std::max(r, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(rep.ratios.size());
  if (m >= 2) rep.fitted_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

RieszKatoReport riesz_and_kato(const WeightedGrid& grid, const VecC& a, const VecC& d,
                               int probes, std::uint64_t seed) {
  const int n = grid.n;
  const DiscreteD D = build_D(grid);
  const Mat Lw = D.divw * D.G;  // weighted Laplacian

  // flat-symmetric weighted Laplacian for (-Lap_w)^{1/2}
  const Vec s = grid.flat_scale();
  Mat Lflat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Lflat(i, j) = s[i] * Lw(i, j) / s[j];
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Lflat + Lflat.transpose()));
  const Vec mu = es.eigenvalues();  // <= 0, one zero mode (constants)
  const Mat U = es.eigenvectors();

  auto sqrt_neg_lap = [&](const VecC& f) {
    VecC y(n);
    for (int i = 0; i < n; ++i) y[i] = f[i] * s[i];
    VecC c = U.transpose().cast<cplx>() * y;
    for (int i = 0; i < n; ++i) c[i] *= std::sqrt(std::max(-mu[i], 0.0));
    const VecC z = U.cast<cplx>() * c;
    VecC out(n);
    for (int i = 0; i < n; ++i) out[i] = z[i] / s[i];
    return out;
  };
  auto inv_sqrt_neg_lap = [&](const VecC& f) {
    VecC y(n);
    for (int i = 0; i < n; ++i) y[i] = f[i] * s[i];
    VecC c = U.transpose().cast<cplx>() * y;
    for (int i = 0; i < n; ++i) {
      const double m = -mu[i];
      c[i] = m > 1e-12 ? c[i] / std::sqrt(m) : cplx(0.0);
    }
    const VecC z = U.cast<cplx>() * c;
    VecC out(n);
    for (int i = 0; i < n; ++i) out[i] = z[i] / s[i];
    return out;
  };

  std::mt19937_64 gen(seed);
  auto rand_field = [&](bool project_wmean) {
    VecC f(n);
    for (int i = 0; i < n; ++i) f[i] = rng_cgauss(gen);
    if (project_wmean) {
      cplx m = 0.0;
      double tot = 0.0;
      for (int i = 0; i < n; ++i) {
        m += f[i] * grid.w[i];
        tot += grid.w[i];
      }
      f.array() -= m / tot;
    }
    return f;
  };

  RieszKatoReport rep;
  for (int p = 0; p < probes; ++p) {
    const VecC f = rand_field(true);
    const VecC rf = D.G.cast<cplx>() * inv_sqrt_neg_lap(f);
    double nf = 0.0, nr = 0.0;
    for (int i = 0; i < n; ++i) {
      nf += std::norm(f[i]) * grid.w[i];
      nr += std::norm(rf[i]) * grid.w[i];
    }
    rep.riesz_isometry_defect =
        std::max(rep.riesz_isometry_defect, std::abs(std::sqrt(nr / nf) - 1.0));

    // exact square-root identity for a = d = 1
    const VecC u = rand_field(false);
    const VecC su = sqrt_neg_lap(u);
    const VecC gu = D.G.cast<cplx>() * u;
    double ns = 0.0, ng = 0.0;
    for (int i = 0; i < n; ++i) {
      ns += std::norm(su[i]) * grid.w[i];
      ng += std::norm(gu[i]) * grid.w[i];
    }
    if (ng > 0.0)
      rep.exact_defect = std::max(rep.exact_defect,
                                  std::abs(std::sqrt(ns) - std::sqrt(ng)) / std::sqrt(ng));
  }

  // Kato comparison for L = -a div_w d grad
  MatC L = MatC::Zero(n, n);
  {
    const MatC dG = d.asDiagonal() * D.G.cast<cplx>();
    L = -(a.asDiagonal() * (D.divw.cast<cplx>() * dG));
  }
  VecC lam;
  MatC V;
  dense_eig(L, lam, V);
  Eigen::PartialPivLU<MatC> vlu(V);
  auto sqrt_L = [&](const VecC& u) {
    VecC c = vlu.solve(u);
    for (int i = 0; i < n; ++i) c[i] *= std::sqrt(lam[i]);
    return (V * c).eval();
  };
  double lo = 1e300, hi = 0.0;
  for (int p = 0; p < probes; ++p) {
    VecC u = rand_field(false);
    cplx m = u.mean();
    u.array() -= m;  // remove the gradient null mode
    const VecC su = sqrt_L(u);
    const VecC gu = D.G.cast<cplx>() * u;
    double ns = 0.0, ng = 0.0;
    for (int i = 0; i < n; ++i) {
      ns += std::norm(su[i]) * grid.w[i];
      ng += std::norm(gu[i]) * grid.w[i];
    }
    if (ng > 0.0) {
      const double r = std::sqrt(ns / ng);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  rep.kato_lower = lo;
  rep.kato_upper = hi;
  return rep;
}

}  // namespace degen
