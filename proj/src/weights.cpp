#include "degenlab/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace degen {
namespace {

// 16-point Gauss-Legendre rule on [-1,1] (positive nodes; rule is symmetric).
constexpr int kGl = 8;
constexpr double kGlX[kGl] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGlW[kGl] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGl; ++i)
    s += kGlW[i] * (f(c - r * kGlX[i]) + f(c + r * kGlX[i]));
  return r * s;
}

// Integrate f over [lo, hi], 0 <= lo < hi <= 1/2, where f may have an
// integrable singularity at 0 only; `tail` supplies the analytic integral of f
// over [0, eps] for tiny eps.  Panels grow geometrically away from 0 so each
// panel sees an analytic integrand with bounded derivatives.
template <class F, class Tail>
double graded_quad(const F& f, double lo, double hi, const Tail& tail) {
  double acc = 0.0, a = lo;
  if (lo == 0.0) {
    a = std::min(std::ldexp(hi, -30), 0x1p-30);
    acc += tail(a);
  }
  while (a < hi) {
    // geometrically growing panels away from the singular endpoint, capped at
    // 1/16 so the trigonometric factor stays resolved
    const double b = std::min({hi, 2.0 * a, a + 0.0625});
    acc += gauss16(f, a, b);
    a = b;
  }
  return acc;
}

// integral of |2 sin(pi x)|^g over [lo, hi] within [0, 1/2]
double power_int_half(double g, double lo, double hi) {
  auto f = [g](double x) { return std::pow(2.0 * std::sin(M_PI * x), g); };
  auto tail = [g](double eps) {
    // (2 sin pi x)^g = (2 pi x)^g (1 - g (pi x)^2/6 + O(x^4))
    const double c = std::pow(2.0 * M_PI, g);
    return c * (std::pow(eps, g + 1.0) / (g + 1.0) -
                g * M_PI * M_PI / 6.0 * std::pow(eps, g + 3.0) / (g + 3.0));
  };
  return graded_quad(f, lo, hi, tail);
}

// integral of ln(2 sin(pi x)) over [lo, hi] within [0, 1/2]
double log_int_half(double lo, double hi) {
  auto f = [](double x) { return std::log(2.0 * std::sin(M_PI * x)); };
  auto tail = [](double eps) {
    return eps * (std::log(2.0 * M_PI * eps) - 1.0) -
           M_PI * M_PI / 18.0 * eps * eps * eps;
  };
  return graded_quad(f, lo, hi, tail);
}

// integral over an arbitrary arc [lo,hi] in [0,1], folding by the symmetry
// f(1-x) = f(x) so the singular point is always at the left end.
template <class Half>
double fold_arc(const Half& half, double lo, double hi) {
  double acc = 0.0;
  if (lo < 0.5) acc += half(lo, std::min(hi, 0.5));
  if (hi > 0.5) acc += half(1.0 - hi, std::min(1.0 - lo, 0.5));
  return acc;
}

double rng_unit(std::mt19937_64& g) {
  // explicit 53-bit mantissa draw for cross-platform bit reproducibility
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace

WeightModel WeightModel::constant(double value, int depth) {
  if (value <= 0.0) throw std::invalid_argument("constant weight must be positive");
  WeightModel m;
  m.kind_ = WeightKind::Constant;
  m.value_ = value;
  m.depth_ = depth;
  m.build_cache();
  return m;
}

WeightModel WeightModel::power(double exponent, int depth) {
  if (!(exponent > -1.0 && exponent < 1.0))
    throw std::invalid_argument("power exponent must lie in (-1,1)");
  WeightModel m;
  m.kind_ = WeightKind::Power;
  m.exponent_ = exponent;
  m.depth_ = depth;
  m.build_cache();
  return m;
}

WeightModel WeightModel::random_dyadic(std::uint64_t seed, int depth, double beta) {
  if (depth < 0 || depth > 20) throw std::invalid_argument("random-dyadic depth must be in [0,20]");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must be in [0,1]");
  WeightModel m;
  m.kind_ = WeightKind::RandomDyadic;
  m.seed_ = seed;
  m.beta_ = beta;
  m.depth_ = depth;
  // ln w as a dyadic martingale: split each node value v into v+eps / v-eps
  std::mt19937_64 gen(seed);
  std::vector<double> level = {0.0};
  for (int d = 0; d < depth; ++d) {
    std::vector<double> next(level.size() * 2);
    for (std::size_t k = 0; k < level.size(); ++k) {
      const double eps = beta * (2.0 * rng_unit(gen) - 1.0);
      next[2 * k] = level[k] + eps;
      next[2 * k + 1] = level[k] - eps;
    }
    level.swap(next);
  }
  m.leaf_log_ = std::move(level);
  m.build_cache();
  return m;
}

WeightModel WeightModel::product(std::vector<WeightModel> factors) {
  if (factors.empty()) throw std::invalid_argument("product needs at least one factor");
  WeightModel m;
  m.kind_ = WeightKind::Product;
  int depth = 0;
  for (const auto& f : factors) {
    if (f.kind_ == WeightKind::Product)
      throw std::invalid_argument("nested product weights not supported");
    depth = std::max(depth, f.depth_);
  }
  m.depth_ = depth;
  m.factors_ = std::move(factors);
  m.build_cache();
  return m;
}

double WeightModel::operator()(double x) const {
  x -= std::floor(x);
  switch (kind_) {
    case WeightKind::Constant:
      return value_;
    case WeightKind::Power:
      return std::pow(std::abs(2.0 * std::sin(M_PI * x)), exponent_);
    case WeightKind::RandomDyadic: {
      const auto k = std::min<std::int64_t>(
          static_cast<std::int64_t>(std::ldexp(x, depth_)), (1LL << depth_) - 1);
      return std::exp(leaf_log_[static_cast<std::size_t>(k)]);
    }
    case WeightKind::Product: {
      double v = 1.0;
      for (const auto& f : factors_) v *= f(x);
      return v;
    }
  }
  return 1.0;
}

void WeightModel::build_cache() {
  const int d = depth_;
  const std::size_t leaves = std::size_t{1} << d;
  std::vector<double> mass(leaves), inv(leaves), lg(leaves);

  // total power exponent and the piecewise-constant multiplier per leaf
  double g = 0.0;
  if (kind_ == WeightKind::Power) g = exponent_;
  if (kind_ == WeightKind::Product)
    for (const auto& f : factors_)
      if (f.kind_ == WeightKind::Power) g += f.exponent_;

  auto leaf_const = [&](std::size_t k) -> double {
    // product of the non-power factors evaluated on leaf k (all are constant
    // on leaves of the max depth)
    const double xm = (static_cast<double>(k) + 0.5) * std::ldexp(1.0, -d);
    switch (kind_) {
      case WeightKind::Constant: return value_;
      case WeightKind::Power: return 1.0;
      case WeightKind::RandomDyadic: return std::exp(leaf_log_[k]);
      case WeightKind::Product: {
        double v = 1.0;
        for (const auto& f : factors_)
          if (f.kind_ != WeightKind::Power) v *= f(xm);
        return v;
      }
    }
    return 1.0;
  };

  const double len = std::ldexp(1.0, -d);
  for (std::size_t k = 0; k < leaves; ++k) {
    const double lo = static_cast<double>(k) * len, hi = lo + len;
    const double c = leaf_const(k);
    if (g == 0.0) {
      mass[k] = c * len;
      inv[k] = len / c;
      lg[k] = std::log(c) * len;
    } else {
      const double gg = g;
      mass[k] = c * fold_arc([gg](double a, double b) { return power_int_half(gg, a, b); }, lo, hi);
      inv[k] = fold_arc([gg](double a, double b) { return power_int_half(-gg, a, b); }, lo, hi) / c;
      lg[k] = g * fold_arc([](double a, double b) { return log_int_half(a, b); }, lo, hi) +
              std::log(c) * len;
    }
  }

  auto pyramid = [d](std::vector<double> leaf) {
    std::vector<std::vector<double>> lv(static_cast<std::size_t>(d) + 1);
    lv[static_cast<std::size_t>(d)] = std::move(leaf);
    for (int l = d - 1; l >= 0; --l) {
      const auto& lo = lv[static_cast<std::size_t>(l) + 1];
      auto& cur = lv[static_cast<std::size_t>(l)];
      cur.resize(lo.size() / 2);
      // fixed left-to-right accumulation order for reproducibility
      for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = lo[2 * k] + lo[2 * k + 1];
    }
    return lv;
  };
  mass_ = pyramid(std::move(mass));
  inv_mass_ = pyramid(std::move(inv));
  log_int_ = pyramid(std::move(lg));
}

double WeightModel::mass(const DyadicCube& q) const {
  if (q.level <= depth_)
    return mass_[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.index)];
  if (kind_ == WeightKind::Power) {
    const double g = exponent_;
    return fold_arc([g](double a, double b) { return power_int_half(g, a, b); },
                    q.left(), q.left() + q.length());
  }
  throw std::out_of_range("depth-exceeded: arc below the cached dyadic depth");
}

double WeightModel::inverse_mass(const DyadicCube& q) const {
  if (q.level <= depth_)
    return inv_mass_[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.index)];
  if (kind_ == WeightKind::Power) {
    const double g = -exponent_;
    return fold_arc([g](double a, double b) { return power_int_half(g, a, b); },
                    q.left(), q.left() + q.length());
  }
  throw std::out_of_range("depth-exceeded: arc below the cached dyadic depth");
}

double WeightModel::log_mean(const DyadicCube& q) const {
  if (q.level > depth_) throw std::out_of_range("depth-exceeded: arc below the cached dyadic depth");
  return log_int_[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.index)] /
         q.length();
}

double WeightModel::a2_constant(int depth) const {
  if (depth < 1) throw std::invalid_argument("a2_constant requires depth >= 1");
  if (depth > depth_) throw std::out_of_range("depth-exceeded: raise the cache depth");
  double best = 0.0;
  for (int l = 0; l <= depth; ++l) {
    const double inv_len2 = std::ldexp(1.0, 2 * l);
    const auto& m = mass_[static_cast<std::size_t>(l)];
    const auto& im = inv_mass_[static_cast<std::size_t>(l)];
    for (std::size_t k = 0; k < m.size(); ++k)
      best = std::max(best, m[k] * im[k] * inv_len2);
  }
  return best;
}

WeightProfile WeightModel::ainfty_profile(int depth, int samples, std::uint64_t seed) const {
  if (depth < 2) throw std::invalid_argument("ainfty_profile requires depth >= 2");
  depth = std::min(depth, depth_);
  WeightProfile p;
  p.depth = depth;
  p.a2 = a2_constant(depth);

  // reverse-Jensen gap and doubling dimension over all cached cubes
  p.c0 = 0.0;
  p.dw = 0.0;
  for (int l = 0; l <= depth; ++l) {
    for (std::int64_t k = 0; k < (std::int64_t{1} << l); ++k) {
      const DyadicCube q{l, k};
      p.c0 = std::max(p.c0, std::log(average(q)) - log_mean(q));
      if (l >= 1) p.dw = std::max(p.dw, std::log2(mass(q.parent()) / mass(q)));
    }
  }

  // comparability exponents from sampled (Q, E) pairs, E a union of
  // descendant arcs; ratios ln(w(E)/w(Q)) / ln(|E|/|Q|) bracket [sigma, tau]
  std::mt19937_64 gen(seed);
  double lo = 1.0, hi = 1.0, sxx = 0.0, sxy = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (int s = 0; s < samples; ++s) {
    const int lq = static_cast<int>(gen() % static_cast<std::uint64_t>(depth - 1));
    const DyadicCube q{lq, static_cast<std::int64_t>(gen() % (std::uint64_t{1} << lq))};
    const int j = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(
                                           std::min(6, depth - lq)));
    const std::int64_t base = q.index << j, cnt = std::int64_t{1} << j;
    double we = 0.0;
    std::int64_t ne = 0;
    for (std::int64_t i = 0; i < cnt; ++i)
      if (gen() & 1u) {
        we += mass(DyadicCube{lq + j, base + i});
        ++ne;
      }
    if (ne == 0 || ne == cnt) continue;
    const double lr = std::log(static_cast<double>(ne) / static_cast<double>(cnt));
    const double lm = std::log(we / mass(q));
    const double ratio = lm / lr;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    sxx += lr * lr;
    sxy += lr * lm;
    pts.emplace_back(lr, lm);
  }
  p.sigma = lo;
  p.tau = hi;
  const double slope = sxx > 0.0 ? sxy / sxx : 1.0;
  double res = 0.0;
  for (auto& [x, y] : pts) res += (y - slope * x) * (y - slope * x);
  p.fit_residual = pts.empty() ? 0.0 : std::sqrt(res / static_cast<double>(pts.size()));
  return p;
}

Vec WeightModel::grid_cell_averages(int n) const {
  int p = 0;
  while ((1 << p) < n) ++p;
  if ((1 << p) != n) throw std::invalid_argument("grid size must be a power of two");
  if (p > depth_) throw std::out_of_range("depth-exceeded: grid finer than the cache");
  Vec w(n);
  const double inv_len = static_cast<double>(n);
  for (int k = 0; k < n; ++k) w[k] = mass(DyadicCube{p, k}) * inv_len;
  return w;
}

std::string WeightProfile::to_json() const {
  nlohmann::ordered_json j;
  j["a2"] = a2;
  j["sigma"] = sigma;
  j["tau"] = tau;
  j["c0"] = c0;
  j["dw"] = dw;
  j["depth"] = depth;
  j["fit_residual"] = fit_residual;
  return j.dump(2);
}

std::string WeightModel::to_json() const {
  nlohmann::ordered_json j;
  switch (kind_) {
    case WeightKind::Constant:
      j["kind"] = "constant";
      j["params"] = {{"value", value_}};
      break;
    case WeightKind::Power:
      j["kind"] = "power";
      j["params"] = {{"a", exponent_}};
      break;
    case WeightKind::RandomDyadic:
      j["kind"] = "random-dyadic";
      j["params"] = {{"beta", beta_}};
      j["seed"] = seed_;
      break;
    case WeightKind::Product: {
      j["kind"] = "product";
      auto arr = nlohmann::ordered_json::array();
      for (const auto& f : factors_) arr.push_back(nlohmann::ordered_json::parse(f.to_json()));
      j["params"] = {{"factors", arr}};
      break;
    }
  }
  j["depth"] = depth_;
  return j.dump(2);
}

WeightModel WeightModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  const int depth = j.value("depth", 14);
  if (kind == "constant")
    return constant(j.contains("params") ? j["params"].value("value", 1.0) : 1.0, depth);
  if (kind == "power") return power(j.at("params").at("a").get<double>(), depth);
  if (kind == "random-dyadic")
    return random_dyadic(j.value("seed", std::uint64_t{0}),
                         depth, j.at("params").value("beta", 0.3));
  if (kind == "product") {
    std::vector<WeightModel> fs;
    for (const auto& f : j.at("params").at("factors"))
      fs.push_back(from_json(f.dump()));
    return product(std::move(fs));
  }
  throw std::invalid_argument("unknown weight kind: " + kind);
}

}  // namespace degen
