#pragma once
// Muckenhoupt A2 weights on the circle: evaluation, dyadic mass caches, the A2
// characteristic, and the derived regularity profile (comparability exponents,
// reverse-Jensen constant, doubling dimension).

#include "degenlab/dyadic.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace degen {

enum class WeightKind { Constant, Power, RandomDyadic, Product };

// Summary of the measured regularity of a weight.
struct WeightProfile {
  double a2 = 1.0;     // dyadic A2 characteristic up to `depth`
  double sigma = 1.0;  // upper comparability exponent: w(E)/w(Q) <~ (|E|/|Q|)^sigma
  double tau = 1.0;    // lower comparability exponent: (|E|/|Q|)^tau <~ w(E)/w(Q)
  double c0 = 0.0;     // reverse-Jensen gap: sup_Q [ ln avg_Q w - avg_Q ln w ]
  double dw = 1.0;     // doubling dimension: sup_Q log2( w(parent Q) / w(Q) )
  int depth = 0;
  double fit_residual = 0.0;  // rms residual of the log-log comparability fit

  std::string to_json() const;
};

// Immutable weight on the circle R/Z with cached dyadic masses of w, w^{-1}
// and the dyadic averages of ln w down to a fixed depth.
class WeightModel {
 public:
  static WeightModel constant(double value = 1.0, int depth = 14);
  // w(x) = |2 sin(pi x)|^a, a in (-1,1); A2 iff a in (-1,1).
  static WeightModel power(double exponent, int depth = 14);
  // ln w a dyadic martingale: children of a node carry parent +/- eps with
  // eps drawn uniformly from [-beta, beta]; w piecewise constant on depth-level
  // leaves. Deterministic in `seed`.
  static WeightModel random_dyadic(std::uint64_t seed, int depth, double beta);
  static WeightModel product(std::vector<WeightModel> factors);

  double operator()(double x) const;  // pointwise value
  int depth() const { return depth_; }
  WeightKind kind() const { return kind_; }

  // Exact (quadrature-grade) arc masses and log averages; q.level <= depth().
  double mass(const DyadicCube& q) const;          // w(Q) = int_Q w dx
  double inverse_mass(const DyadicCube& q) const;  // w^{-1}(Q)
  double log_mean(const DyadicCube& q) const;      // avg_Q ln w  (dx average)
  double average(const DyadicCube& q) const { return mass(q) / q.length(); }

  // Dyadic A2 characteristic: max over arcs of level <= depth of
  // (avg_Q w)(avg_Q w^{-1}).
  double a2_constant(int depth) const;

  // Measured comparability / reverse-Jensen / doubling profile.
  WeightProfile ainfty_profile(int depth, int samples, std::uint64_t seed) const;

  // Cell averages w_i = w(I_i)/h on a uniform n-cell grid (n = 2^p, p <= depth).
  Vec grid_cell_averages(int n) const;

  std::string to_json() const;
  static WeightModel from_json(const std::string& text);

  // parameters (for serialization)
  double param_value() const { return value_; }
  double param_exponent() const { return exponent_; }
  double param_beta() const { return beta_; }
  std::uint64_t param_seed() const { return seed_; }

 private:
  WeightModel() = default;
  void build_cache();

  WeightKind kind_ = WeightKind::Constant;
  double value_ = 1.0;      // Constant
  double exponent_ = 0.0;   // Power
  double beta_ = 0.0;       // RandomDyadic
  std::uint64_t seed_ = 0;  // RandomDyadic
  std::vector<WeightModel> factors_;  // Product
  std::vector<double> leaf_log_;      // RandomDyadic: ln w on depth-level leaves
  int depth_ = 14;

  // pyramids indexed [level][index], level = 0..depth_
  std::vector<std::vector<double>> mass_, inv_mass_, log_int_;  // log_int = int_Q ln w dx
};

}  // namespace degen
