#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "degenlab/corona.hpp"
#include "degenlab/quadratic.hpp"

#include <cmath>
#include <random>

using namespace degen;

namespace {

VecC random_field(int m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  VecC v(m);
  for (int i = 0; i < m; ++i)
    v[i] = cplx((gen() >> 11) * 0x1.0p-53 - 0.5, (gen() >> 11) * 0x1.0p-53 - 0.5);
  return v;
}

}  // namespace

TEST_CASE("default t grid spans the resolved scales") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 64);
  const TGrid tg = default_tgrid(grid);
  CHECK(tg.t.front() == doctest::Approx(grid.h / 32.0).epsilon(1e-12));
  CHECK(tg.t.back() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("square function: exact arctangent constant for w = 1, B = I") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 64);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::identity(64));
  const TGrid tg = default_tgrid(grid);
  // single-frequency probe: ratio = int (t l)^2/(1+(t l)^2)^2 dt/t -> 1/2
  VecC v(128);
  for (int i = 0; i < 64; ++i) {
    const double x = (i + 0.5) / 64.0;
    v[i] = std::cos(2.0 * M_PI * 3.0 * x);
    v[64 + i] = std::sin(2.0 * M_PI * 3.0 * x);
  }
  const VecC pv = D.project_range(v);
  const double q = quadratic_functional(calc, pv, tg);
  const double nn = grid.norm(pv);
  CHECK(q / (nn * nn) == doctest::Approx(0.5).epsilon(0.01));
  // and zero on the kernel of D
  CHECK(quadratic_functional(calc, D.null2(), tg) <= 1e-12);
  const QuadraticReport rep = quadratic_ratio_sup(calc, tg, 6, 3);
  CHECK(rep.sup_ratio == doctest::Approx(0.5).epsilon(0.02));
  CHECK(rep.inf_ratio == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("resolvent quadrature recovers pi/2 on a single mode") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 64);
  VecC f(64);
  for (int i = 0; i < 64; ++i) f[i] = std::sin(2.0 * M_PI * (i + 0.5) / 64.0);
  CHECK(resolvent_halfpi_constant(grid, f) == doctest::Approx(M_PI_2).epsilon(0.005));
}

TEST_CASE("principal part vanishes identically for w = 1, B = I") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 32);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::identity(32));
  const TGrid tg = default_tgrid(grid);
  const PrincipalPart pp = principal_part(calc, tg);
  double worst = 0.0;
  for (int ti = 0; ti < tg.size(); ti += 7) worst = std::max(worst, pp.norms(ti).maxCoeff());
  CHECK(worst <= 1e-9);
}

TEST_CASE("principal part: Carleson bound and approximation error") {
  const WeightModel wm = WeightModel::random_dyadic(6, 6, 0.4);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 64);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::random_accretive(64, 0.3, 9));
  const TGrid tg = default_tgrid(grid);
  const PrincipalPart pp = principal_part(calc, tg);
  // apply() matches the stored columns on the constant sections
  VecC e1 = VecC::Zero(128);
  e1.head(64).setOnes();
  const int ti = tg.size() / 2;
  const VecC g1 = pp.apply(ti, e1);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(g1[i] - pp.cols[ti][0][i]) <= 1e-13);
    CHECK(std::abs(g1[64 + i] - pp.cols[ti][1][i]) <= 1e-13);
  }
  const PrincipalPartChecks checks = principal_part_checks(calc, pp, 8, 4);
  CHECK(checks.carleson > 0.0);
  CHECK(std::isfinite(checks.carleson));
  CHECK(checks.max_cube_avg >= 0.0);
  CHECK(std::isfinite(checks.et_bound));

  const VecC v = D.project_range(random_field(128, 10));
  const PpaReport ppa = ppa_error(calc, pp, v, true);
  CHECK(ppa.annihilation <= 1e-12);
  CHECK(ppa.total >= 0.0);
  // the three-term split bounds the total (triangle inequality, squared)
  const double tri = std::sqrt(ppa.term_high) + std::sqrt(ppa.term_resolvent) +
                     std::sqrt(ppa.term_avg);
  CHECK(ppa.total <= tri * tri * (1.0 + 1e-6));
}

TEST_CASE("proof replay produces consistent bounds on a random weight") {
  const WeightModel wm = WeightModel::random_dyadic(14, 5, 0.4);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 32);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::random_accretive(32, 0.2, 6));
  const TGrid tg = default_tgrid(grid);
  const PrincipalPart pp = principal_part(calc, tg);
  std::vector<WeightModel> ens = {wm};
  const StoppingParams sp = calibrate(ens, 32, 5, 3);
  const ProofReplayReport rep = proof_replay(wm, calc, pp, {0, 0}, sp, 8);
  CHECK(rep.tau1_fit > 0.0);
  CHECK(rep.tau2_fit > 0.0);
  CHECK(rep.poincare > 0.0);
  CHECK(std::isfinite(rep.section_K));
  // the packing-aggregated bound dominates the directly measured norm
  CHECK(rep.aggregated >= rep.direct * (1.0 - 1e-9));
  CHECK(!rep.to_json().empty());
}
