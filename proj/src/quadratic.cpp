#include "degenlab/quadratic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace degen {
namespace {

double rng_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

cplx rng_cgauss(std::mt19937_64& g) {
  const double u1 = std::max(rng_unit(g), 1e-300), u2 = rng_unit(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

// spectral norm of the 2x2 matrix [[a, b],[c, d]]
double spec_norm2(cplx a, cplx b, cplx c, cplx d) {
  const double g11 = std::norm(a) + std::norm(c), g22 = std::norm(b) + std::norm(d);
  const cplx g12 = std::conj(a) * b + std::conj(c) * d;
  const double tr = g11 + g22;
  const double disc = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + std::norm(g12));
  return std::sqrt(0.5 * tr + disc);
}

}  // namespace

TGrid default_tgrid(const WeightedGrid& grid, int per_octave, double tmin_factor,
                    double tmax) {
  // tmin resolves the largest discrete frequency 2/h, tmax the smallest (~2pi);
  // with these bounds the truncated tails of u^2/(1+u^2)^2 stay below ~0.5%.
  return TGrid::geometric(grid.h * tmin_factor, tmax, per_octave);
}

double quadratic_functional(const SpectralCalculus& calc, const VecC& v, const TGrid& tg) {
  const auto sp = calc.split_db(v);
  const VecC e = calc.to_eigen_coords(sp.coords);
  const VecC& lam = calc.eigenvalues();
  double acc = 0.0;
  for (int i = 0; i < tg.size(); ++i) {
    const double t = tg.t[static_cast<std::size_t>(i)];
    VecC c = e;
    for (int k = 0; k < c.size(); ++k) {
      const cplx tz = t * lam[k];
      c[k] *= tz / (1.0 + tz * tz);
    }
    // flat norm of the range part equals the weighted norm of Q_t^B v
    acc += tg.wlog[static_cast<std::size_t>(i)] * calc.from_eigen_coords(c).squaredNorm();
  }
  return acc;
}

QuadraticReport quadratic_ratio_sup(const SpectralCalculus& calc, const TGrid& tg,
                                    int probes, std::uint64_t seed) {
  const int m = calc.range_dim();
  const VecC& lam = calc.eigenvalues();
  std::mt19937_64 gen(seed);
  QuadraticReport rep;
  rep.inf_ratio = 1e300;

  auto ratio_of = [&](const VecC& e) {
    // e = eigen coordinates of a range field; denominator = ||V e||^2
    const double den = calc.from_eigen_coords(e).squaredNorm();
    double num = 0.0;
    for (int i = 0; i < tg.size(); ++i) {
      const double t = tg.t[static_cast<std::size_t>(i)];
      VecC c = e;
      for (int k = 0; k < m; ++k) {
        const cplx tz = t * lam[k];
        c[k] *= tz / (1.0 + tz * tz);
      }
      num += tg.wlog[static_cast<std::size_t>(i)] * calc.from_eigen_coords(c).squaredNorm();
    }
    return num / den;
  };

  int count = 0;
  for (int p = 0; p < probes; ++p) {
    // white noise in range coordinates == white noise through the range projector
    VecC c(m);
    for (int k = 0; k < m; ++k) c[k] = rng_cgauss(gen);
    const double r = ratio_of(calc.to_eigen_coords(c));
    rep.sup_ratio = std::max(rep.sup_ratio, r);
    rep.inf_ratio = std::min(rep.inf_ratio, r);
    ++count;
  }
  for (int k = 0; k < m; ++k) {
    // along an eigendirection both norms carry the same ||V e_k|| factor, so
    // the ratio reduces to the scalar quadrature of |q_t(lambda_k)|^2 dt/t
    double r = 0.0;
    for (int i = 0; i < tg.size(); ++i) {
      const cplx tz = tg.t[static_cast<std::size_t>(i)] * lam[k];
      r += tg.wlog[static_cast<std::size_t>(i)] * std::norm(tz / (1.0 + tz * tz));
    }
    rep.sup_ratio = std::max(rep.sup_ratio, r);
    rep.inf_ratio = std::min(rep.inf_ratio, r);
    ++count;
  }
  rep.probes = count;
  return rep;
}

double resolvent_halfpi_constant(const WeightedGrid& grid, const VecC& f,
                                 int per_octave, double tmax) {
  const int n = grid.n;
  const DiscreteD D = build_D(grid);
  const Vec s = grid.flat_scale();
  Mat Lflat(n, n);
  const Mat Lw = D.divw * D.G;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Lflat(i, j) = s[i] * Lw(i, j) / s[j];
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Lflat + Lflat.transpose()));
  const Vec mu = es.eigenvalues();

  VecC y(n);
  for (int i = 0; i < n; ++i) y[i] = f[i] * s[i];
  const VecC c = es.eigenvectors().transpose().cast<cplx>() * y;

  // the truncation error per mode is ~ arctan(tmin sqrt(mu)) + 1/(tmax sqrt(mu));
  // tmin far below the finest resolved scale keeps the high modes accurate
  const TGrid tg = TGrid::geometric(grid.h / 16384.0, tmax, per_octave);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double m = -mu[k];
    if (m < 1e-10) continue;  // constants carry no gradient content
    const double a = std::norm(c[k]);
    den += a;
    const double rm = std::sqrt(m);
    double g = 0.0;
    for (int i = 0; i < tg.size(); ++i) {
      const double t = tg.t[static_cast<std::size_t>(i)];
      g += tg.wlog[static_cast<std::size_t>(i)] * t * rm / (1.0 + t * t * m);
    }
    num += a * g;
  }
  return num / den;
}

Vec PrincipalPart::norms(int ti) const {
  const auto& c = cols[static_cast<std::size_t>(ti)];
  Vec out(n);
  for (int i = 0; i < n; ++i)
    out[i] = spec_norm2(c[0][i], c[2][i], c[1][i], c[3][i]);
  return out;
}

VecC PrincipalPart::apply(int ti, const VecC& z) const {
  const auto& c = cols[static_cast<std::size_t>(ti)];
  VecC out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = c[0][i] * z[i] + c[2][i] * z[n + i];
    out[n + i] = c[1][i] * z[i] + c[3][i] * z[n + i];
  }
  return out;
}

PrincipalPart principal_part(const SpectralCalculus& calc, const TGrid& tg) {
  const int n = calc.d_op().grid.n;
  PrincipalPart pp;
  pp.tg = tg;
  pp.n = n;
  pp.cols.resize(tg.t.size());
  auto qt = [](cplx z, double t) {
    const cplx tz = t * z;
    return tz / (1.0 + tz * tz);
  };
  for (int j = 0; j < 2; ++j) {
    VecC ej = VecC::Zero(2 * n);
    for (int i = 0; i < n; ++i) ej[j * n + i] = 1.0;
    const auto sweep = calc.apply_db_sweep(qt, tg.t, ej);
    for (std::size_t i = 0; i < tg.t.size(); ++i) {
      pp.cols[i][2 * j] = sweep[i].head(n);       // row perp of column j
      pp.cols[i][2 * j + 1] = sweep[i].tail(n);   // row par of column j
    }
  }
  return pp;
}

PrincipalPartChecks principal_part_checks(const SpectralCalculus& calc,
                                          const PrincipalPart& pp,
                                          int probes, std::uint64_t seed) {
  const WeightedGrid& grid = calc.d_op().grid;
  const int n = grid.n;
  int p = 0;
  while ((1 << p) < n) ++p;
  PrincipalPartChecks ck;

  std::vector<Vec> sq(pp.cols.size());
  for (int ti = 0; ti < static_cast<int>(pp.cols.size()); ++ti) {
    const Vec nr = pp.norms(ti);
    sq[static_cast<std::size_t>(ti)] = nr.array().square().matrix();
    // per-cube averages at the matching dyadic level
    const int d = level_for_t(pp.tg.t[static_cast<std::size_t>(ti)], p);
    const int m = n >> d;
    for (int k = 0; k < (1 << d); ++k) {
      double num = 0.0, den = 0.0;
      for (int i = k * m; i < (k + 1) * m; ++i) {
        num += sq[static_cast<std::size_t>(ti)][i] * grid.w[i];
        den += grid.w[i];
      }
      ck.max_cube_avg = std::max(ck.max_cube_avg, num / den);
    }
  }
  ck.carleson = carleson_norm_dyadic(pp.tg, sq, grid.w, grid.h);

  std::mt19937_64 gen(seed);
  for (int pr = 0; pr < probes; ++pr) {
    VecC u(2 * n);
    for (int i = 0; i < 2 * n; ++i) u[i] = rng_cgauss(gen);
    for (int ti = 0; ti < static_cast<int>(pp.cols.size()); ti += 4) {
      const double t = pp.tg.t[static_cast<std::size_t>(ti)];
      const VecC e = et_apply(u, grid.w, grid.h, t);
      const double ne = grid.norm(e);
      if (ne == 0.0) continue;
      ck.et_bound = std::max(ck.et_bound, grid.norm(pp.apply(ti, e)) / ne);
    }
  }
  return ck;
}

PpaReport ppa_error(const SpectralCalculus& calc, const PrincipalPart& pp,
                    const VecC& v, bool verbose) {
  const WeightedGrid& grid = calc.d_op().grid;
  const int n = grid.n;
  const TGrid& tg = pp.tg;
  auto qt = [](cplx z, double t) {
    const cplx tz = t * z;
    return tz / (1.0 + tz * tz);
  };
  const double vnorm2 = grid.norm(v) * grid.norm(v);
  PpaReport rep;

  const auto qv = calc.apply_db_sweep(qt, tg.t, v);
  for (int i = 0; i < tg.size(); ++i) {
    const double t = tg.t[static_cast<std::size_t>(i)];
    const VecC err = qv[static_cast<std::size_t>(i)] -
                     pp.apply(i, et_apply(v, grid.w, grid.h, t));
    const double nn = grid.norm(err);
    rep.total += tg.wlog[static_cast<std::size_t>(i)] * nn * nn;
  }
  rep.total /= vnorm2;

  // annihilation of constants (gamma_t E_t reproduces Q_t^B on constants)
  for (int j = 0; j < 2; ++j) {
    VecC ej = VecC::Zero(2 * n);
    for (int i = 0; i < n; ++i) ej[j * n + i] = 1.0;
    const auto qe = calc.apply_db_sweep(qt, tg.t, ej);
    for (int i = 0; i < tg.size(); ++i) {
      const double t = tg.t[static_cast<std::size_t>(i)];
      const VecC err = qe[static_cast<std::size_t>(i)] -
                       pp.apply(i, et_apply(ej, grid.w, grid.h, t));
      rep.annihilation = std::max(rep.annihilation, grid.norm(err));
    }
  }

  if (!verbose) return rep;

  // smoothing family P_t = diag((I - t^2 Lap_w)^{-1}, (I - t^2 Lap)^{-1})
  const DiscreteD& D = calc.d_op();
  const Vec s = grid.flat_scale();
  const Mat Lw = D.divw * D.G;
  Mat Lwf(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Lwf(i, j) = s[i] * Lw(i, j) / s[j];
  Eigen::SelfAdjointEigenSolver<Mat> esw(0.5 * (Lwf + Lwf.transpose()));
  const Mat Lx = -(D.G.transpose() * D.G);
  Eigen::SelfAdjointEigenSolver<Mat> esx(0.5 * (Lx + Lx.transpose()));

  auto pt_apply = [&](const VecC& u, double t) {
    VecC out(2 * n);
    // perp block through the weighted Laplacian (flat conjugation)
    VecC y(n);
    for (int i = 0; i < n; ++i) y[i] = u[i] * s[i];
    VecC c = esw.eigenvectors().transpose().cast<cplx>() * y;
    for (int i = 0; i < n; ++i) c[i] /= (1.0 - t * t * esw.eigenvalues()[i]);
    y = esw.eigenvectors().cast<cplx>() * c;
    for (int i = 0; i < n; ++i) out[i] = y[i] / s[i];
    // par block through the plain Laplacian
    VecC z = esx.eigenvectors().transpose().cast<cplx>() * u.tail(n);
    for (int i = 0; i < n; ++i) z[i] /= (1.0 - t * t * esx.eigenvalues()[i]);
    out.tail(n) = esx.eigenvectors().cast<cplx>() * z;
    return out;
  };

  for (int i = 0; i < tg.size(); ++i) {
    const double t = tg.t[static_cast<std::size_t>(i)];
    const double wt = tg.wlog[static_cast<std::size_t>(i)];
    const VecC ptv = pt_apply(v, t);
    const VecC high = v - ptv;
    // Q_t (I - P_t) v
    const VecC qh = calc.apply_db([&](cplx z) { return qt(z, t); }, high);
    rep.term_high += wt * std::pow(grid.norm(qh), 2);
    // (Q_t - gamma_t E_t) P_t v
    const VecC qp = calc.apply_db([&](cplx z) { return qt(z, t); }, ptv);
    const VecC mid = qp - pp.apply(i, et_apply(ptv, grid.w, grid.h, t));
    rep.term_resolvent += wt * std::pow(grid.norm(mid), 2);
    // gamma_t E_t (P_t - I) v
    const VecC low = pp.apply(i, et_apply(ptv - v, grid.w, grid.h, t));
    rep.term_avg += wt * std::pow(grid.norm(low), 2);
  }
  rep.term_high /= vnorm2;
  rep.term_resolvent /= vnorm2;
  rep.term_avg /= vnorm2;
  return rep;
}

std::string QuadraticReport::to_json() const {
  nlohmann::ordered_json j;
  j["sup"] = sup_ratio;
  j["inf"] = inf_ratio;
  j["probes"] = probes;
  return j.dump(2);
}

std::string ProofReplayReport::to_json() const {
  nlohmann::ordered_json j;
  j["tau1_fit"] = tau1_fit;
  j["tau2_fit"] = tau2_fit;
  j["poincare"] = poincare;
  j["section_K"] = section_K;
  j["aggregated"] = aggregated;
  j["direct"] = direct;
  return j.dump(2);
}

}  // namespace degen
