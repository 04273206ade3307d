#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "degenlab/corona.hpp"

#include <cmath>
#include <set>

using namespace degen;

TEST_CASE("constant weight: no stopping, empty square function") {
  const WeightModel wm = WeightModel::constant(2.0, 8);
  const CoronaDecomposition cd = corona_decompose(wm, {0, 0}, 0.5, 8);
  CHECK(cd.generations.size() == 1);
  CHECK(cd.generations[0].size() == 1);
  CHECK(cd.all_stopping.empty());
  CHECK(cd.packing_ratio(wm) == 0.0);
  const Vec s = square_function_S(wm, cd, 8);
  CHECK(s.maxCoeff() == 0.0);
}

TEST_CASE("stopping cubes are where ln w moved; square function bounded") {
  const WeightModel wm = WeightModel::random_dyadic(4, 9, 0.6);
  const double sw = 0.4;
  const CoronaDecomposition cd = corona_decompose(wm, {0, 0}, sw, 9);
  REQUIRE(!cd.all_stopping.empty());
  for (std::size_t i = 0; i < cd.all_stopping.size(); ++i) {
    const DyadicCube& r = cd.all_stopping[i];
    const DyadicCube& top = cd.stopping_parent[i];
    CHECK(top.contains(r));
    CHECK(r.level > top.level);
    // the oscillation test failed at r but not at its parent
    CHECK(std::abs(wm.log_mean(r) - wm.log_mean(top)) > sw);
    if (r.parent().level > top.level)
      CHECK(std::abs(wm.log_mean(r.parent()) - wm.log_mean(top)) <= sw);
  }
  // packing: every point lies in finitely many stopping cubes; mass controlled
  CHECK(cd.packing_ratio(wm) >= 0.0);
  // the martingale square function is pointwise bounded by #generations * osc^2
  const Vec s = square_function_S(wm, cd, 9);
  CHECK(s.minCoeff() >= 0.0);
  const double depthbound =
      static_cast<double>(cd.generations.size()) * std::pow(sw + 2.0 * 0.6, 2);
  CHECK(s.maxCoeff() <= depthbound + 1e-12);
}

TEST_CASE("sawtooth tiles partition the Carleson box") {
  const WeightModel wm = WeightModel::random_dyadic(8, 7, 0.5);
  const int depth = 7;
  const CoronaDecomposition cd = corona_decompose(wm, {0, 0}, 0.3, depth);
  std::set<std::pair<int, std::int64_t>> seen;
  std::size_t count = 0;
  auto family_of = [&](const DyadicCube& top) {
    std::vector<DyadicCube> fam;
    for (std::size_t i = 0; i < cd.all_stopping.size(); ++i)
      if (cd.stopping_parent[i] == top) fam.push_back(cd.all_stopping[i]);
    return fam;
  };
  auto add = [&](const SawtoothRegion& sr) {
    for (const auto& q : sr.tiles) {
      ++count;
      CHECK(seen.insert({q.level, q.index}).second);
      CHECK(sr.top.contains(q));
    }
  };
  add(sawtooth({0, 0}, family_of({0, 0}), depth));
  for (const auto& r : cd.all_stopping) add(sawtooth(r, family_of(r), depth));
  std::size_t expect = 0;
  for (int l = 0; l <= depth; ++l) expect += std::size_t{1} << l;
  CHECK(count == expect);
  CHECK(seen.size() == expect);
}

TEST_CASE("sawtooth without stopping cubes is the whole box") {
  const SawtoothRegion sr = sawtooth({1, 1}, {}, 4);
  // arcs of levels 1..4 inside [1/2, 1): 1 + 2 + 4 + 8
  CHECK(sr.tiles.size() == 15);
}

TEST_CASE("test function: averages approach the section as sigma3 shrinks") {
  const WeightModel wm = WeightModel::random_dyadic(10, 6, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 64);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::identity(64));
  const cplx xi[2] = {cplx(1.0, 0.0), cplx(0.0, 0.0)};
  const TestFunctionResult coarse = test_function(calc, wm, {1, 0}, xi, 0.2);
  const TestFunctionResult fine = test_function(calc, wm, {1, 0}, xi, 0.02);
  CHECK(fine.avg_gap < coarse.avg_gap);
  CHECK(fine.avg_gap < 0.2);
  CHECK(coarse.norm_ratio > 0.0);
  CHECK(fine.norm_ratio <= 4.0);  // L2 control of the mollified indicator
  CHECK(fine.f.size() == 128);
  CHECK(fine.aux.size() == 128);
}

TEST_CASE("mixed average uses dw for perp and dx for par") {
  const int n = 16;
  Vec w(n);
  VecC f(2 * n);
  for (int i = 0; i < n; ++i) {
    w[i] = 1.0 + 0.1 * i;
    f[i] = cplx(i, 1.0);
    f[n + i] = cplx(2.0, -i);
  }
  cplx out[2];
  mixed_average(f, w, 1.0 / n, {1, 1}, out);
  cplx sp = 0.0, sq = 0.0;
  double sw = 0.0;
  for (int i = 8; i < 16; ++i) {
    sp += f[i] * w[i];
    sq += f[n + i];
    sw += w[i];
  }
  CHECK(std::abs(out[0] - sp / sw) <= 1e-13);
  CHECK(std::abs(out[1] - sq / 8.0) <= 1e-13);
}

TEST_CASE("stopping construction is mild for a flat weight") {
  const WeightModel wm = WeightModel::constant(1.0, 6);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 64);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::identity(64));
  StoppingParams sp;
  sp.sigma3 = 0.05;
  sp.sigma4 = 0.25;
  sp.sigma5 = 0.2;
  const cplx xi[2] = {cplx(1.0, 0.0), cplx(0.0, 0.0)};
  const StoppingResult st = stopping_tau_xi(calc, wm, {1, 0}, xi, 0.0, sp, 6);
  CHECK(st.mass_ratio <= 0.5);
  CHECK(st.gap < 0.2);
}

TEST_CASE("calibration returns usable thresholds and good mass") {
  std::vector<WeightModel> ens;
  for (int s = 0; s < 3; ++s) ens.push_back(WeightModel::random_dyadic(50 + s, 6, 0.3));
  const StoppingParams sp = calibrate(ens, 64, 6, 2);
  CHECK(sp.sigma3 > 0.0);
  CHECK(sp.sigma3 <= 0.25);
  CHECK(sp.sigma6 > 0.0);
  CHECK(sp.sigma6 < 1.0);
  CHECK(sp.sigma5 > 0.0);
  CHECK(!sp.to_json().empty());
}
