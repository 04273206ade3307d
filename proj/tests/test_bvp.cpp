#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "degenlab/bvp.hpp"

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

TGrid uniform_tgrid(double tmax, int m) {
  TGrid tg;
  tg.t.resize(m + 1);
  tg.wlog.assign(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) tg.t[j] = j * (tmax / m);
  return tg;
}

}  // namespace

TEST_CASE("hat transform: involution, identity, accretivity preserved") {
  const int n = 32;
  CHECK_NOTHROW((void)hat_transform(CoefficientMatrix::identity(n)));
  const CoefficientMatrix I = CoefficientMatrix::identity(n);
  const CoefficientMatrix hi = hat_transform(I);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(hi.b11[i] - 1.0) <= 1e-15);
    CHECK(std::abs(hi.b12[i]) <= 1e-15);
  }
  const CoefficientMatrix M = CoefficientMatrix::random_accretive(n, 0.4, 3, 0.2);
  const CoefficientMatrix back = hat_transform(hat_transform(M));
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(back.b11[i] - M.b11[i]) <= 1e-10);
    CHECK(std::abs(back.b12[i] - M.b12[i]) <= 1e-10);
    CHECK(std::abs(back.b21[i] - M.b21[i]) <= 1e-10);
    CHECK(std::abs(back.b22[i] - M.b22[i]) <= 1e-10);
  }
  CoefficientMatrix bad = M;
  bad.b11[5] = 0.0;
  CHECK_THROWS_AS((void)hat_transform(bad), std::invalid_argument);
}

TEST_CASE("coefficient assembly carries the weight") {
  const WeightModel wm = WeightModel::random_dyadic(5, 5, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, 32);
  const CoefficientMatrix M = CoefficientMatrix::random_accretive(32, 0.3, 7);
  const CoefficientPair cp = make_coefficients(grid, M);
  for (int i = 0; i < 32; ++i)
    CHECK(std::abs(cp.A.b11[i] - grid.w[i] * M.b11[i]) <= 1e-14);
  // B depends on M only (the weight sits in the metric)
  const CoefficientMatrix hb = hat_transform(M);
  for (int i = 0; i < 32; ++i) CHECK(std::abs(cp.B.b22[i] - hb.b22[i]) <= 1e-14);
}

TEST_CASE("harmonic oracle: Laplace Dirichlet problem on one Fourier mode") {
  const int n = 64;
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), n);
  const CoefficientPair cp = make_coefficients(grid, CoefficientMatrix::identity(n));
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, cp.B);
  VecC datum(n);
  for (int i = 0; i < n; ++i) datum[i] = std::sin(2.0 * M_PI * (i + 0.5) / n);
  const TGrid tg = uniform_tgrid(0.5, 16);
  const BVPSolution sol = solve_tindep(calc, cp, BVPKind::Dirichlet, datum, tg);
  CHECK(sol.trace_condition < 1e6);
  for (int j = 0; j <= 16; ++j) {
    const double t = tg.t[j];
    for (int i = 0; i < n; i += 5) {
      const double exact =
          std::exp(-2.0 * M_PI * t) * std::sin(2.0 * M_PI * (i + 0.5) / n);
      CHECK(sol.u_re[j][i] == doctest::Approx(exact).epsilon(0.02));
    }
  }
  // conormal gradient decays like the solution
  CHECK(grid.norm(sol.f.vals.back()) < grid.norm(sol.f.vals.front()));
  const std::string csv = sol.to_csv();
  CHECK(csv.rfind("t,x,u_re", 0) == 0);
}

TEST_CASE("finite-difference reference matches the same explicit solution") {
  const int n = 64;
  const WeightedGrid grid = WeightedGrid::from_weight(WeightModel::constant(1.0), n);
  const CoefficientMatrix A = CoefficientMatrix::identity(n);
  Vec datum(n);
  for (int i = 0; i < n; ++i) datum[i] = std::sin(2.0 * M_PI * (i + 0.5) / n);
  const FDReference fd = fd_reference_solve(grid, A, BVPKind::Dirichlet, datum, 1.0, 64);
  for (int j = 0; j <= 64; j += 8)
    for (int i = 0; i < n; i += 7) {
      const double exact =
          std::exp(-2.0 * M_PI * (j / 64.0)) * std::sin(2.0 * M_PI * (i + 0.5) / n);
      CHECK(fd.u[j][i] == doctest::Approx(exact).epsilon(0.05));
    }
  CHECK(fd.refinement_error < 0.05);
  // off-diagonal coefficients are rejected
  CoefficientMatrix bad = A;
  bad.b12[0] = 0.1;
  CHECK_THROWS_AS(fd_reference_solve(grid, bad, BVPKind::Dirichlet, datum, 1.0, 16),
                  std::invalid_argument);
}

TEST_CASE("Rellich residual: zero for hermitian, positive control") {
  const int n = 64;
  const WeightModel wm = WeightModel::random_dyadic(9, 6, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix Bh =
      hat_transform(CoefficientMatrix::random_hermitian(n, 0.3, 5));
  SpectralCalculus ch(D, Bh);
  const VecC f = ch.apply_db(symbols::chi_plus(), random_field(2 * n, 8));
  CHECK(rellich_residual(D, Bh, f) <= 1e-9);
  const CoefficientMatrix Bn =
      hat_transform(CoefficientMatrix::random_accretive(n, 0.3, 5));
  SpectralCalculus cn(D, Bn);
  const VecC g = cn.apply_db(symbols::chi_plus(), random_field(2 * n, 8));
  CHECK(rellich_residual(D, Bn, g) >= 1e-4);
}

TEST_CASE("Neumann and regularity solves reproduce their own data") {
  const int n = 64;
  const WeightModel wm = WeightModel::power(0.5, 8);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const CoefficientPair cp = make_coefficients(grid, CoefficientMatrix::identity(n));
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, cp.B);
  const TGrid tg = uniform_tgrid(0.5, 8);
  // Neumann: the returned conormal trace must match the datum
  VecC nd(n);
  for (int i = 0; i < n; ++i)
    nd[i] = std::cos(2.0 * M_PI * (i + 0.5) / n) / grid.w[i];
  // remove the w-mean (compatibility)
  nd.array() -= grid.inner(nd, VecC::Ones(n)) / (grid.w.sum() * grid.h);
  const BVPSolution ns = solve_tindep(calc, cp, BVPKind::Neumann, nd, tg);
  VecC fperp(n);
  for (int i = 0; i < n; ++i) fperp[i] = ns.f.vals.front()[i];
  CHECK(grid.norm(fperp - nd) <= 1e-6 * grid.norm(nd));
  // Regularity: the tangential part of the trace matches the datum
  VecC rd(n);
  for (int i = 0; i < n; ++i) rd[i] = std::sin(4.0 * M_PI * (i + 0.5) / n);
  rd.array() -= rd.mean();
  const BVPSolution rs = solve_tindep(calc, cp, BVPKind::Regularity, rd, tg);
  VecC fpar(n);
  for (int i = 0; i < n; ++i) fpar[i] = rs.f.vals.front()[n + i];
  CHECK(grid.norm(fpar - rd) <= 1e-6 * grid.norm(rd));
  // datum of the wrong size is rejected
  CHECK_THROWS_AS(solve_tindep(calc, cp, BVPKind::Neumann, VecC::Ones(n / 2), tg),
                  std::invalid_argument);
}

TEST_CASE("perturbation singular integral: zero field, intertwining") {
  const int n = 32;
  const WeightModel wm = WeightModel::random_dyadic(13, 5, 0.3);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, CoefficientMatrix::random_accretive(n, 0.25, 2));
  TGrid tg = TGrid::geometric(1.0 / 64, 2.0, 6);
  UpperHalfField g(tg, n);
  for (int j = 0; j < tg.size(); ++j) g.vals[j] = random_field(2 * n, 100 + j);
  std::vector<VecC> zero(tg.size(), VecC::Zero(2 * n));
  const UpperHalfField s0 = sE_apply(calc, g, zero, false);
  for (const auto& v : s0.vals) CHECK(v.norm() <= 1e-14);
  // D (tilde S) = S on a small random perturbation
  std::vector<VecC> pert(tg.size());
  for (int j = 0; j < tg.size(); ++j) pert[j] = 0.1 * random_field(2 * n, 200 + j);
  const UpperHalfField s = sE_apply(calc, g, pert, false);
  const UpperHalfField st = sE_apply(calc, g, pert, true);
  double worst = 0.0;
  for (int j = 0; j < tg.size(); ++j) {
    const VecC lhs = D.apply(st.vals[j]);
    worst = std::max(worst, grid.norm(lhs - s.vals[j]) /
                                std::max(1e-30, grid.norm(s.vals[j])));
  }
  CHECK(worst <= 1e-8);
  const VecC hm = sE_residual_trace(calc, g, pert);
  CHECK(std::isfinite(grid.norm(hm)));
}

TEST_CASE("interior regularity diagnostics stay bounded") {
  const int n = 64;
  const WeightModel wm = WeightModel::power(0.4, 8);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const CoefficientPair cp = make_coefficients(grid, CoefficientMatrix::identity(n));
  const DiscreteD D = build_D(grid);
  SpectralCalculus calc(D, cp.B);
  VecC datum(n);
  for (int i = 0; i < n; ++i) datum[i] = std::sin(2.0 * M_PI * (i + 0.5) / n);
  const BVPSolution sol =
      solve_tindep(calc, cp, BVPKind::Dirichlet, datum, uniform_tgrid(1.0, 32));
  const InteriorReport rep = interior_checks(grid, sol, cp.B, 3);
  CHECK(rep.caccioppoli > 0.0);
  CHECK(std::isfinite(rep.caccioppoli));
  CHECK(std::isfinite(rep.coercivity));
  CHECK(rep.whitney_decay < 1.0);
  CHECK(!rep.to_json().empty());
}

TEST_CASE("perturbation sweep: baseline drift is zero, smin continuous") {
  const int n = 32;
  const WeightedGrid grid =
      WeightedGrid::from_weight(WeightModel::random_dyadic(3, 5, 0.3), n);
  const CoefficientMatrix M0 = CoefficientMatrix::random_hermitian(n, 0.2, 4, 0.3);
  const CoefficientMatrix dM = CoefficientMatrix::random_accretive(n, 0.5, 5);
  VecC datum(n);
  for (int i = 0; i < n; ++i) datum[i] = std::sin(2.0 * M_PI * (i + 0.5) / n);
  const auto sweep = perturbation_sweep(grid, M0, dM, BVPKind::Dirichlet, datum,
                                        {0.0, 0.05, 0.1});
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].drift <= 1e-12);
  CHECK(sweep[0].smin > 0.0);
  CHECK(sweep[1].drift <= sweep[2].drift * (1.0 + 1e-9) + 1e-12);
  CHECK(sweep[2].smin > 0.1 * sweep[0].smin);
}
