#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "degenlab/weights.hpp"

#include <cmath>

using namespace degen;

TEST_CASE("constant weight: masses, averages, A2") {
  const WeightModel wm = WeightModel::constant(3.0, 10);
  const DyadicCube q{4, 7};
  CHECK(wm.mass(q) == doctest::Approx(3.0 / 16.0).epsilon(1e-14));
  CHECK(wm.inverse_mass(q) == doctest::Approx(1.0 / 48.0).epsilon(1e-14));
  CHECK(wm.log_mean(q) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(wm.a2_constant(10) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("power weight: cached mass matches a fine Riemann sum") {
  const WeightModel wm = WeightModel::power(0.5, 12);
  const int m = 1 << 20;
  double riemann = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m;
    riemann += std::pow(std::abs(2.0 * std::sin(M_PI * x)), 0.5);
  }
  riemann /= m;
  CHECK(wm.mass({0, 0}) == doctest::Approx(riemann).epsilon(1e-6));
  // pole-adjacent arc at level 12
  const DyadicCube q{12, 0};
  double local = 0.0;
  const int mm = 1 << 22;  // 1024 samples within the arc
  for (std::int64_t i = 0; i < (mm >> 12); ++i) {
    const double x = (i + 0.5) / mm;
    local += std::pow(std::abs(2.0 * std::sin(M_PI * x)), 0.5);
  }
  local /= mm;
  CHECK(wm.mass(q) == doctest::Approx(local).epsilon(1e-3));
}

TEST_CASE("random-dyadic weight: determinism and mass additivity") {
  const WeightModel a = WeightModel::random_dyadic(5, 8, 0.4);
  const WeightModel b = WeightModel::random_dyadic(5, 8, 0.4);
  const WeightModel c = WeightModel::random_dyadic(6, 8, 0.4);
  CHECK(a.mass({0, 0}) == b.mass({0, 0}));
  CHECK(a.mass({5, 13}) == b.mass({5, 13}));
  CHECK(a.mass({0, 0}) != c.mass({0, 0}));
  for (int l = 0; l < 8; ++l)
    for (std::int64_t k = 0; k < (std::int64_t{1} << l); k += 3) {
      const DyadicCube q{l, k};
      CHECK(a.mass(q) ==
            doctest::Approx(a.mass(q.child(0)) + a.mass(q.child(1))).epsilon(1e-13));
    }
}

TEST_CASE("Jensen: arithmetic average dominates the geometric one") {
  const WeightModel wm = WeightModel::random_dyadic(11, 9, 0.5);
  for (int l = 0; l <= 9; ++l)
    for (std::int64_t k = 0; k < (std::int64_t{1} << l); k += 5) {
      const DyadicCube q{l, k};
      CHECK(wm.average(q) >= std::exp(wm.log_mean(q)) * (1.0 - 1e-12));
    }
}

TEST_CASE("A2 characteristic: monotone in depth, >= 1, product-invariant") {
  const WeightModel wm = WeightModel::random_dyadic(3, 10, 0.5);
  double prev = 1.0;
  for (int d = 1; d <= 10; ++d) {
    const double a2 = wm.a2_constant(d);
    CHECK(a2 >= prev - 1e-14);
    prev = a2;
  }
  CHECK(prev >= 1.0);
  // multiplying by a constant leaves every A2 ratio unchanged
  const WeightModel scaled =
      WeightModel::product({WeightModel::constant(7.5, 10), wm});
  CHECK(scaled.a2_constant(10) == doctest::Approx(prev).epsilon(1e-12));
}

TEST_CASE("grid cell averages: consistency with arc masses, depth guard") {
  const WeightModel wm = WeightModel::random_dyadic(9, 6, 0.3);
  const int n = 64;
  const Vec w = wm.grid_cell_averages(n);
  CHECK(w.size() == n);
  CHECK(w.sum() / n == doctest::Approx(wm.mass({0, 0})).epsilon(1e-13));
  CHECK(w[5] == doctest::Approx(wm.mass({6, 5}) * n).epsilon(1e-13));
  CHECK_THROWS_AS((void)wm.grid_cell_averages(128), std::out_of_range);
  CHECK_THROWS_AS((void)wm.grid_cell_averages(48), std::invalid_argument);
}

TEST_CASE("regularity profile: sane ranges and zero gap for constants") {
  const WeightProfile flat = WeightModel::constant(2.0, 8).ainfty_profile(8, 32, 1);
  CHECK(flat.c0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(flat.a2 == doctest::Approx(1.0).epsilon(1e-12));
  const WeightProfile p = WeightModel::random_dyadic(21, 8, 0.5).ainfty_profile(8, 64, 2);
  CHECK(p.c0 >= 0.0);
  CHECK(p.a2 >= 1.0);
  CHECK(p.sigma > 0.0);
  CHECK(p.tau >= p.sigma - 1e-12);  // lower exponent is the steeper one
  CHECK(p.dw >= 0.0);
}

TEST_CASE("json round trip preserves the weight") {
  const WeightModel wm = WeightModel::random_dyadic(17, 7, 0.25);
  const WeightModel back = WeightModel::from_json(wm.to_json());
  CHECK(back.mass({7, 100}) == doctest::Approx(wm.mass({7, 100})).epsilon(1e-15));
  CHECK(back.a2_constant(7) == doctest::Approx(wm.a2_constant(7)).epsilon(1e-15));
  const WeightModel pw = WeightModel::power(-0.3, 9);
  CHECK(WeightModel::from_json(pw.to_json()).mass({3, 2}) ==
        doctest::Approx(pw.mass({3, 2})).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(WeightModel::power(1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(WeightModel::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightModel::random_dyadic(1, 8, 1.5), std::invalid_argument);
}
