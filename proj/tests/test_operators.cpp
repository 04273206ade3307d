#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "degenlab/operators.hpp"

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

TEST_CASE("D: exact weighted self-adjointness and kernel") {
  const WeightModel wm = WeightModel::random_dyadic(2, 6, 0.4);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 64);
  const DiscreteD D = build_D(grid);
  const VecC u = random_field(128, 1), v = random_field(128, 2);
  CHECK(std::abs(grid.inner(D.apply(u), v) - grid.inner(u, D.apply(v))) <=
        1e-12 * grid.norm(u) * grid.norm(v) * 200);
  CHECK(grid.norm(D.apply(D.null1())) <= 1e-12);
  CHECK(grid.norm(D.apply(D.null2())) <= 1e-12);
  // flat symmetrization is an exactly symmetric real matrix
  CHECK((D.Dflat - D.Dflat.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  // projection onto clos R(D): idempotent, annihilates the kernel
  const VecC pu = D.project_range(u);
  CHECK(grid.norm(D.project_range(pu) - pu) <= 1e-11 * grid.norm(u));
  CHECK(grid.norm(D.project_range(D.null2())) <= 1e-11);
  CHECK(std::abs(grid.inner(pu, D.null1())) <= 1e-11);
}

TEST_CASE("unweighted D: spectrum in exact +- pairs with known values") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 32);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::identity(32));
  std::vector<double> ev;
  for (int k = 0; k < calc.range_dim(); ++k) {
    CHECK(std::abs(calc.eigenvalues()[k].imag()) <= 1e-8);
    ev.push_back(calc.eigenvalues()[k].real());
  }
  std::sort(ev.begin(), ev.end());
  const int m = static_cast<int>(ev.size());
  for (int k = 0; k < m / 2; ++k)
    CHECK(ev[k] == doctest::Approx(-ev[m - 1 - k]).epsilon(1e-9));
  // largest frequency: |2 sin(pi k h) / h| at k = n/2
  CHECK(ev.back() == doctest::Approx(2.0 * 32.0).epsilon(1e-9));
  // smallest positive: 2 sin(pi/32) * 32
  std::vector<double> pos;
  for (double e : ev)
    if (e > 0) pos.push_back(e);
  CHECK(pos.front() == doctest::Approx(64.0 * std::sin(M_PI / 32.0)).epsilon(1e-9));
}

TEST_CASE("coefficient multipliers: accretivity, adjoint, inverse") {
  const int n = 48;
  const CoefficientMatrix B = CoefficientMatrix::random_accretive(n, 0.4, 5, 0.2);
  const VecC u = random_field(2 * n, 3);
  const VecC bu = B.apply(u);
  const VecC back = B.inverse().apply(bu);
  CHECK((back - u).norm() <= 1e-12 * u.norm() * 100);
  // adjoint consistency in the euclidean pairing
  const VecC v = random_field(2 * n, 4);
  const cplx lhs = bu.dot(v);  // <v, Bu>
  const cplx rhs = u.dot(B.adjoint().apply(v));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * u.norm() * v.norm() * 100);

  const WeightedGrid grid =
      WeightedGrid::from_weight(WeightModel::random_dyadic(8, 6, 0.3), 64);
  const CoefficientMatrix B2 = CoefficientMatrix::random_accretive(64, 0.4, 6, 0.2);
  const AccretivityReport rep = accretivity(build_D(grid), B2, 48, 9);
  CHECK(rep.kappa >= 0.15);
  CHECK(rep.upper >= rep.kappa);
  CHECK(rep.angle < M_PI_2);
}

TEST_CASE("functional calculus: identity symbol reproduces DB") {
  const WeightModel wm = WeightModel::random_dyadic(12, 5, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 32);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B = CoefficientMatrix::random_accretive(32, 0.3, 2);
  SpectralCalculus calc(D, B);
  CHECK(calc.reconstruction_error() <= 1e-9);
  const VecC v = D.project_range(random_field(64, 7));
  const VecC lhs = calc.apply_db([](cplx z) { return z; }, v);
  const VecC rhs = D.apply(B.apply(v));
  CHECK(grid.norm(lhs - rhs) <= 1e-8 * grid.norm(rhs));
  // resolvent symbol vs direct dense solve of (I + itDB)
  const double t = 0.37;
  const MatC full = MatC::Identity(64, 64) +
                    cplx(0.0, t) * D.D.cast<cplx>() * B.dense(32);
  const VecC direct = full.partialPivLu().solve(v);
  const VecC viares = calc.apply_db(symbols::resolvent(t), v);
  CHECK(grid.norm(viares - direct) <= 1e-8 * grid.norm(direct));
}

TEST_CASE("calculus conventions on the kernel and eigen round trips") {
  const WeightedGrid grid =
      WeightedGrid::from_weight(WeightModel::random_dyadic(3, 5, 0.3), 32);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B = CoefficientMatrix::random_accretive(32, 0.3, 4);
  SpectralCalculus calc(D, B);
  // chi+-, sgn and Q_t all vanish on N(DB) = B^{-1} N(D)
  const CoefficientMatrix Binv = B.inverse();
  for (const VecC& z : {VecC(Binv.apply(D.null1())), VecC(Binv.apply(D.null2()))}) {
    CHECK(grid.norm(calc.apply_db(symbols::chi_plus(), z)) <= 1e-10);
    CHECK(grid.norm(calc.apply_db(symbols::sgn(), z)) <= 1e-10);
    CHECK(grid.norm(calc.apply_db(symbols::qt(0.5), z)) <= 1e-10);
    // but P_t and the resolvent act as the identity there
    CHECK(grid.norm(calc.apply_db(symbols::pt(0.5), z) - z) <= 1e-10);
  }
  const VecC c = random_field(calc.range_dim(), 11);
  CHECK((calc.to_eigen_coords(calc.from_eigen_coords(c)) - c).norm() <=
        1e-12 * c.norm() * 1e3);
}

TEST_CASE("contour quadrature agrees with the eigen calculus") {
  const WeightedGrid grid =
      WeightedGrid::from_weight(WeightModel::random_dyadic(19, 5, 0.3), 32);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::random_accretive(32, 0.25, 8));
  const VecC v = D.project_range(random_field(64, 5));
  const auto f = symbols::qt(0.02);  // decaying on the bisector
  const VecC a = calc.apply_db(f, v);
  const VecC b = calc.apply_db_contour(f, v, 96);
  CHECK(grid.norm(a - b) <= 1e-4 * grid.norm(v));
  const VecC s1 = calc.apply_db(symbols::sgn(), v);
  const VecC s2 = calc.apply_db_sgn_quadrature(v, 512);
  CHECK(grid.norm(s1 - s2) <= 1e-3 * grid.norm(v));
}

TEST_CASE("BD calculus is similar to DB") {
  const WeightedGrid grid =
      WeightedGrid::from_weight(WeightModel::random_dyadic(23, 5, 0.3), 32);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B = CoefficientMatrix::random_accretive(32, 0.3, 13);
  SpectralCalculus calc(D, B);
  const VecC v = random_field(64, 21);
  // B f(DB) = f(BD) B
  const auto f = symbols::resolvent(0.2);
  const VecC lhs = B.apply(calc.apply_db(f, v));
  const VecC rhs = calc.apply_bd(f, B.apply(v));
  CHECK(grid.norm(lhs - rhs) <= 1e-8 * grid.norm(v));
}

TEST_CASE("sector rotation: scalar phase rotates the spectrum") {
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), 32);
  const DiscreteD D = build_D(grid);
  const double theta = 0.3;
  SpectralCalculus calc(D, CoefficientMatrix::scalar(32, std::polar(1.0, theta)));
  CHECK(calc.bisector_angle() == doctest::Approx(theta).epsilon(1e-8));
}

TEST_CASE("off-diagonal decay of the resolvent") {
  const WeightModel wm = WeightModel::random_dyadic(31, 7, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 128);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B = CoefficientMatrix::random_accretive(128, 0.3, 3);
  const OffDiagReport rep = offdiag_probe(D, B, 1.0 / 64.0, 17);
  CHECK(rep.norms.size() == rep.ratios.size());
  for (std::size_t i = 1; i < rep.norms.size(); ++i)
    CHECK(rep.norms[i] <= rep.norms[i - 1] * 1.5);  // essentially decreasing
  CHECK(rep.fitted_order >= 1.0);
}

TEST_CASE("Riesz isometry and exact Kato defect for a = d = 1") {
  const WeightModel wm = WeightModel::power(0.4, 8);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 128);
  const VecC ones = VecC::Ones(128);
  const RieszKatoReport rep = riesz_and_kato(grid, ones, ones, 12, 4);
  CHECK(rep.riesz_isometry_defect <= 1e-9);
  CHECK(rep.exact_defect <= 1e-10);
  CHECK(rep.kato_lower > 0.0);
  CHECK(rep.kato_lower <= rep.kato_upper);
}
