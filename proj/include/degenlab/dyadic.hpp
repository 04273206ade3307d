#pragma once
// Dyadic structure on the periodic unit interval and the norms on the upper
// half space (0,oo) x circle used by square-function, Carleson and
// non-tangential maximal estimates.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace degen {

using Vec = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// Dyadic arc [k 2^-d, (k+1) 2^-d) of the circle R/Z.
struct DyadicCube {
  int level = 0;           // depth d >= 0; sidelength 2^-d
  std::int64_t index = 0;  // position k in [0, 2^d)

  double length() const { return std::ldexp(1.0, -level); }
  double left() const { return static_cast<double>(index) * length(); }
  double center() const { return (static_cast<double>(index) + 0.5) * length(); }
  DyadicCube parent() const { return {level - 1, index >> 1}; }
  DyadicCube child(int side) const { return {level + 1, 2 * index + side}; }
  // True when q is a descendant of (or equal to) this arc.
  bool contains(const DyadicCube& q) const {
    return q.level >= level && (q.index >> (q.level - level)) == index;
  }
  bool contains_point(double x) const {
    double y = x - std::floor(x);
    return y >= left() && y < left() + length();
  }
  bool operator==(const DyadicCube& o) const {
    return level == o.level && index == o.index;
  }
};

// Distance on the circle R/Z.
inline double circle_dist(double x, double y) {
  double d = std::abs(x - y);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

// Geometric grid in t with trapezoid weights for integrals against dt/t.
struct TGrid {
  std::vector<double> t;
  std::vector<double> wlog;  // trapezoid weights in s = ln t (for dt/t)

  static TGrid geometric(double tmin, double tmax, int per_octave);
  int size() const { return static_cast<int>(t.size()); }
  // integral of g dt/t over the covered range
  double integrate_log(const std::vector<double>& g) const;
  // integral of g dt (linear measure), same nodes: dt = t dlnt
  double integrate_lin(const std::vector<double>& g) const;
};

// Field on the discretized upper half space: one 2N-complex vector per t node
// (perp component first, then parallel).
struct UpperHalfField {
  TGrid tg;
  int n = 0;  // boundary cells
  std::vector<VecC> vals;  // vals[i] has size 2n

  UpperHalfField() = default;
  UpperHalfField(TGrid g, int n_) : tg(std::move(g)), n(n_), vals(tg.size(), VecC::Zero(2 * n_)) {}
};

// Dyadic level whose arcs have sidelength comparable to t: 2^{-d-1} < t <= 2^{-d},
// clamped to [0, max_level].
int level_for_t(double t, int max_level);

// Averaging operator E_t: perp component averaged against w dx, parallel
// component against dx, over the arcs of level_for_t(t).  Input and output are
// 2n grid fields (output piecewise constant on arcs).
VecC et_apply(const VecC& u, const Vec& w, double h, double t);

// Plain arc average of a scalar grid function against dx or w dx.
cplx arc_average(const VecC& f, const Vec& w, double h, const DyadicCube& q, bool use_w);

// w-mass of an arc from grid cell averages: h * sum_{cells in q} w_i.
double arc_mass(const Vec& w, double h, const DyadicCube& q);

// Dyadic Carleson norm of a nonnegative scalar field g(t,x):
//   [ sup_Q (1/w(Q)) int_{(0,l(Q)] x Q} g(t,x) w dx dt/t ]^{1/2};
// g is sampled on the t grid and boundary cells; the maximizing arc is
// reported through argmax when non-null.
double carleson_norm_dyadic(const TGrid& tg, const std::vector<Vec>& g,
                            const Vec& w, double h, DyadicCube* argmax = nullptr);

// Non-tangential maximal function with L^q Whitney averages over
// W(t,x) = (t/c0, c0 t) x B(x; c1 t), measure dw dt; q <= 0 means q = infinity.
// Returns the boundary function x -> sup_t (Whitney average)^{1/q}.
Vec ntmax(const UpperHalfField& f, const Vec& w, double h,
          double q, double c0, double c1);

// L^2(w) norm of a boundary function.
double boundary_l2w(const Vec& f, const Vec& w, double h);

// Whitney-regularized Carleson norm of a nonnegative scalar field a(t,x)
// (a = pointwise matrix/vector norm of a multiplier field):
//   star = || C( sup-Whitney(a^2/t) ) ||_oo^{1/2}
// with the Carleson functional C taken against the product measure dt x dw;
// sup_norm is the plain sup of a over the mesh.
struct ModCarlesonReport {
  double star = 0.0;
  double sup_norm = 0.0;
};
ModCarlesonReport modified_carleson_norm(const TGrid& tg, const std::vector<Vec>& a,
                                         const Vec& w, double h, double c0, double c1);

// Square-integral norms over the half space:
//   Y:  int ||f_t||^2_w t dt,   Y*: int ||f_t||^2_w dt/t  (both returned squared-rooted).
double y_norm(const UpperHalfField& f, const Vec& w, double h);
double ystar_norm(const UpperHalfField& f, const Vec& w, double h);

}  // namespace degen
