#include "degenlab/bvp.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace degen {
namespace {

double rng_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

Vec flat_scale2(const WeightedGrid& grid) {
  const Vec s = grid.flat_scale();
  Vec s2(2 * grid.n);
  s2 << s, s;
  return s2;
}

// orthonormal flat basis of the positive spectral subspace H+(DB)
MatC hplus_flat_basis(const SpectralCalculus& calc) {
  const DiscreteD& D = calc.d_op();
  const int nn = 2 * D.grid.n;
  const VecC& lam = calc.eigenvalues();
  std::vector<int> pos;
  for (int k = 0; k < static_cast<int>(lam.size()); ++k)
    if (lam[k].real() > 0.0) pos.push_back(k);
  MatC cols(nn, static_cast<int>(pos.size()));
  VecC e = VecC::Zero(lam.size());
  for (std::size_t j = 0; j < pos.size(); ++j) {
    e.setZero();
    e[pos[j]] = 1.0;
    cols.col(static_cast<int>(j)) = D.range_basis.cast<cplx>() * calc.from_eigen_coords(e);
  }
  Eigen::HouseholderQR<MatC> qr(cols);
  return MatC(qr.householderQ() * MatC::Identity(nn, cols.cols()));
}

struct TraceSolve {
  VecC hplus;           // physical spectral datum in H+
  double smin = 0.0;    // smallest singular value of the trace matrix
  double mean_offset = 0.0;
  double cond = 0.0;
};

TraceSolve trace_solve(const SpectralCalculus& calc, BVPKind kind, const VecC& datum) {
  const DiscreteD& D = calc.d_op();
  const WeightedGrid& grid = D.grid;
  const int n = grid.n;
  if (static_cast<int>(datum.size()) != n)
    throw std::invalid_argument("boundary datum must have one value per cell");
  const Vec s2 = flat_scale2(grid);
  const Vec s = s2.head(n);
  const MatC qp = hplus_flat_basis(calc);

  TraceSolve out;
  if (kind == BVPKind::Neumann || kind == BVPKind::Regularity) {
    // flat representation of the component trace map: rows of the orthonormal
    // H+ basis (perp block for Neumann, par block for Regularity)
    const bool perp = (kind == BVPKind::Neumann);
    MatC trmat = perp ? qp.topRows(n) : qp.bottomRows(n);
    VecC rhs = datum.cwiseProduct(s.cast<cplx>());
    if (perp) {
      // compatibility: target lies in the flat dw-mean-zero hyperplane
      const VecC sc = s.cast<cplx>();
      rhs -= sc * (sc.dot(rhs) / sc.squaredNorm());
    } else {
      // dx-mean-zero: orthogonal to 1/s in flat coordinates
      VecC inv = s.cwiseInverse().cast<cplx>();
      rhs -= inv * (inv.dot(rhs) / inv.squaredNorm());
    }
    Eigen::JacobiSVD<MatC> svd(trmat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.smin = sv[sv.size() - 1];
    out.cond = sv[0] / std::max(out.smin, 1e-300);
    const VecC c = svd.solve(rhs);
    out.hplus = (qp * c).cwiseQuotient(s2.cast<cplx>());
  } else {
    // Dirichlet runs through BD: v0 in H+(BD), u = c - v_perp
    MatC bq(qp.rows(), qp.cols());
    for (int j = 0; j < qp.cols(); ++j) {
      const VecC phys = qp.col(j).cwiseQuotient(s2.cast<cplx>());
      bq.col(j) = calc.b_op().apply(phys).cwiseProduct(s2.cast<cplx>());
    }
    Eigen::HouseholderQR<MatC> qr(bq);
    const MatC qt = qr.householderQ() * MatC::Identity(bq.rows(), bq.cols());
    // augmented square system [ -Qt_perp | s ] (c, offset) = s .* datum
    MatC amat(n, qt.cols() + 1);
    amat.leftCols(qt.cols()) = -qt.topRows(n);
    amat.col(qt.cols()) = s.cast<cplx>();
    const VecC rhs = datum.cwiseProduct(s.cast<cplx>());
    Eigen::JacobiSVD<MatC> svd(amat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.smin = sv[sv.size() - 1];
    out.cond = sv[0] / std::max(out.smin, 1e-300);
    const VecC sol = svd.solve(rhs);
    const cplx c0 = sol[qt.cols()];
    out.mean_offset = c0.real();
    const VecC v0 = (qt * sol.head(qt.cols())).cwiseQuotient(s2.cast<cplx>());
    out.hplus = D.apply(v0);
  }
  return out;
}

}  // namespace

CoefficientMatrix hat_transform(const CoefficientMatrix& c) {
  const int n = c.n();
  CoefficientMatrix h;
  h.b11.resize(n);
  h.b12.resize(n);
  h.b21.resize(n);
  h.b22.resize(n);
  for (int i = 0; i < n; ++i) {
    const cplx a = c.b11[i];
    if (std::abs(a) < 1e-14)
      throw std::invalid_argument("hat transform needs invertible upper-left entry");
    const cplx ai = 1.0 / a;
    h.b11[i] = ai;
    h.b12[i] = -ai * c.b12[i];
    h.b21[i] = c.b21[i] * ai;
    h.b22[i] = c.b22[i] - c.b21[i] * ai * c.b12[i];
  }
  return h;
}

CoefficientPair make_coefficients(const WeightedGrid& grid, const CoefficientMatrix& M) {
  if (M.n() != grid.n) throw std::invalid_argument("coefficient size mismatch");
  CoefficientPair cp;
  cp.A = M;
  for (int i = 0; i < grid.n; ++i) {
    cp.A.b11[i] *= grid.w[i];
    cp.A.b12[i] *= grid.w[i];
    cp.A.b21[i] *= grid.w[i];
    cp.A.b22[i] *= grid.w[i];
  }
  cp.B = hat_transform(M);  // hat(w^{-1} A) = hat(M)
  return cp;
}

BVPSolution solve_tindep(const SpectralCalculus& calc, const CoefficientPair& cp,
                         BVPKind kind, const VecC& datum, const TGrid& tg) {
  (void)cp;
  const WeightedGrid& grid = calc.d_op().grid;
  const int n = grid.n;

  BVPSolution sol;
  sol.kind = kind;
  sol.tg = tg;
  sol.n = n;

  const TraceSolve ts = trace_solve(calc, kind, datum);
  sol.trace = ts.hplus;
  sol.trace_condition = ts.smin;
  sol.mean_offset = ts.mean_offset;

  // conormal gradient f(t) = e^{-t|DB|} h+
  auto sg = [](cplx z, double t) {
    const double s = z.real() >= 0.0 ? 1.0 : -1.0;
    return std::exp(-t * s * z);
  };
  std::vector<double> tvals(tg.t.begin(), tg.t.end());
  sol.f.tg = tg;
  sol.f.n = n;
  sol.f.vals = calc.apply_db_sweep(sg, tvals, ts.hplus);

  // potential u(t) = mean_offset - (B |DB|^{-1} e^{-t|DB|} h+)_perp
  auto sg_over = [](cplx z, double t) -> cplx {
    if (z == cplx(0.0, 0.0)) return 0.0;
    const double s = z.real() >= 0.0 ? 1.0 : -1.0;
    return std::exp(-t * s * z) / (s * z);
  };
  const std::vector<VecC> iv = calc.apply_db_sweep(sg_over, tvals, ts.hplus);
  sol.u_re.resize(iv.size());
  sol.u_im.resize(iv.size());
  for (std::size_t j = 0; j < iv.size(); ++j) {
    const VecC bu = calc.b_op().apply(iv[j]);
    Vec ur(n), ui(n);
    for (int i = 0; i < n; ++i) {
      const cplx u = sol.mean_offset - bu[i];
      ur[i] = u.real();
      ui[i] = u.imag();
    }
    sol.u_re[j] = ur;
    sol.u_im[j] = ui;
  }
  return sol;
}

std::string BVPSolution::to_csv() const {
  std::string out = "t,x,u_re,u_im,f_perp_re,f_perp_im,f_par_re,f_par_im\n";
  char buf[256];
  const double h = 1.0 / n;
  for (std::size_t j = 0; j < tg.t.size(); ++j) {
    for (int i = 0; i < n; ++i) {
      const cplx fp = f.vals[j][i], fq = f.vals[j][n + i];
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", tg.t[j],
                    (i + 0.5) * h, u_re[j][i], u_im[j][i], fp.real(), fp.imag(),
                    fq.real(), fq.imag());
      out += buf;
    }
  }
  return out;
}

double rellich_residual(const DiscreteD& D, const CoefficientMatrix& B, const VecC& f) {
  const WeightedGrid& grid = D.grid;
  const VecC bf = B.apply(f);
  const cplx full = grid.inner(bf, f);
  const int n = grid.n;
  cplx perp = 0.0;
  for (int i = 0; i < n; ++i) perp += grid.h * bf[i] * std::conj(f[i]) * grid.w[i];
  const double nrm = std::pow(grid.norm(f), 2);
  return std::abs(full - 2.0 * perp) / std::max(nrm, 1e-300);
}

UpperHalfField sE_apply(const SpectralCalculus& calc, const UpperHalfField& g,
                        const std::vector<VecC>& perturb, bool tilde) {
  const DiscreteD& D = calc.d_op();
  const int n = D.grid.n;
  const int nt = static_cast<int>(g.tg.t.size());
  if (static_cast<int>(perturb.size()) != nt)
    throw std::invalid_argument("perturbation must be sampled on the field t grid");
  const int m = calc.range_dim();
  const VecC& lam = calc.eigenvalues();

  // eigen coordinates of D(E_s g_s) (tilde: of B^{-1} E_s g_s) per s node
  MatC coef(m, nt);
  for (int si = 0; si < nt; ++si) {
    const VecC eg = perturb[si].cwiseProduct(g.vals[si]);
    const VecC y = tilde ? VecC(calc.b_op().inverse().apply(eg)) : D.apply(eg);
    const auto sp = calc.split_db(y);
    coef.col(si) = calc.to_eigen_coords(sp.coords);
  }

  UpperHalfField out;
  out.tg = g.tg;
  out.n = n;
  out.vals.assign(nt, VecC::Zero(2 * n));
  const Vec s2 = flat_scale2(D.grid);

  for (int ti = 0; ti < nt; ++ti) {
    const double t = g.tg.t[ti];
    VecC acc = VecC::Zero(m);
    for (int si = 0; si < nt; ++si) {
      const double s = g.tg.t[si];
      if (std::abs(std::log(s / t)) < 0.125) continue;  // diagonal octave
      const double wlin = g.tg.wlog[si] * s;            // ds = s dln s
      if (s < t) {
        for (int k = 0; k < m; ++k)
          if (lam[k].real() > 0.0)
            acc[k] += wlin * std::exp(-(t - s) * lam[k]) * coef(k, si);
      } else {
        for (int k = 0; k < m; ++k)
          if (lam[k].real() < 0.0)
            acc[k] -= wlin * std::exp((s - t) * lam[k]) * coef(k, si);
      }
    }
    VecC phys =
        (D.range_basis.cast<cplx>() * calc.from_eigen_coords(acc)).cwiseQuotient(
            s2.cast<cplx>());
    out.vals[ti] = tilde ? VecC(calc.b_op().apply(phys)) : phys;
  }
  return out;
}

VecC sE_residual_trace(const SpectralCalculus& calc, const UpperHalfField& g,
                       const std::vector<VecC>& perturb) {
  const DiscreteD& D = calc.d_op();
  const int nt = static_cast<int>(g.tg.t.size());
  const int m = calc.range_dim();
  const VecC& lam = calc.eigenvalues();
  VecC acc = VecC::Zero(m);
  for (int si = 0; si < nt; ++si) {
    const VecC eg = perturb[si].cwiseProduct(g.vals[si]);
    const auto sp = calc.split_db(D.apply(eg));
    const VecC c = calc.to_eigen_coords(sp.coords);
    const double s = g.tg.t[si];
    const double wlin = g.tg.wlog[si] * s;
    for (int k = 0; k < m; ++k)
      if (lam[k].real() < 0.0) acc[k] -= wlin * std::exp(s * lam[k]) * c[k];
  }
  const Vec s2 = flat_scale2(D.grid);
  return (D.range_basis.cast<cplx>() * calc.from_eigen_coords(acc)).cwiseQuotient(
      s2.cast<cplx>());
}

FDReference fd_reference_solve(const WeightedGrid& grid, const CoefficientMatrix& A,
                               BVPKind kind, const Vec& datum, double tmax, int m) {
  const int n = grid.n;
  const double h = grid.h, dt = tmax / m;
  Vec a(n), d(n);
  double offscale = 0.0;
  for (int i = 0; i < n; ++i) {
    a[i] = A.b11[i].real();
    d[i] = A.b22[i].real();
    offscale = std::max(offscale, std::abs(A.b12[i]) + std::abs(A.b21[i]));
    if (a[i] <= 0.0 || d[i] <= 0.0)
      throw std::invalid_argument("finite-difference reference needs positive diagonal coefficients");
  }
  if (offscale > 1e-12 * (a.maxCoeff() + d.maxCoeff()))
    throw std::invalid_argument("finite-difference reference supports diagonal coefficients only");

  Vec df(n);  // interface conductivities (harmonic mean)
  for (int i = 0; i < n; ++i) {
    const double dn = d[(i + 1) % n];
    df[i] = (d[i] + dn > 0.0) ? 2.0 * d[i] * dn / (d[i] + dn) : 0.0;
  }

  Vec rhs_datum = datum;
  BVPKind solve_kind = kind;
  if (kind == BVPKind::Regularity) {
    // integrate the tangential datum (dx mean zero) to a Dirichlet trace
    Vec g(n);
    double acc = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) {
      g[i] = acc + 0.5 * h * datum[i];
      acc += h * datum[i];
      mean += g[i] / n;
    }
    for (int i = 0; i < n; ++i) g[i] -= mean;
    rhs_datum = g;
    solve_kind = BVPKind::Dirichlet;
  }

  const bool neumann = (solve_kind == BVPKind::Neumann);
  if (neumann) {
    // compatibility: the physical flux datum must have zero dx mean
    rhs_datum.array() -= rhs_datum.mean();
  }

  const int nu = (m + 1) * n + (neumann ? 1 : 0);
  Eigen::SparseMatrix<double> K(nu, nu);
  std::vector<Eigen::Triplet<double>> trip;
  Vec rhs = Vec::Zero(nu);
  auto idx = [n](int j, int i) { return j * n + i; };
  auto add_lx = [&](int row, int j, double fac) {
    const int i = row % n;
    const double cp = df[i] / (h * h), cm = df[(i + n - 1) % n] / (h * h);
    trip.emplace_back(row, idx(j, (i + 1) % n), fac * cp);
    trip.emplace_back(row, idx(j, (i + n - 1) % n), fac * cm);
    trip.emplace_back(row, idx(j, i), -fac * (cp + cm));
  };

  for (int i = 0; i < n; ++i) {
    // bottom layer
    const int r0 = idx(0, i);
    if (solve_kind == BVPKind::Dirichlet) {
      trip.emplace_back(r0, r0, 1.0);
      rhs[r0] = rhs_datum[i];
    } else {
      trip.emplace_back(r0, idx(1, i), a[i] / dt);
      trip.emplace_back(r0, r0, -a[i] / dt);
      add_lx(r0, 0, 0.5 * dt);
      rhs[r0] = rhs_datum[i];
    }
    // interior layers
    for (int j = 1; j < m; ++j) {
      const int r = idx(j, i);
      const double ct = a[i] / (dt * dt);
      trip.emplace_back(r, idx(j + 1, i), ct);
      trip.emplace_back(r, idx(j - 1, i), ct);
      trip.emplace_back(r, r, -2.0 * ct);
      add_lx(r, j, 1.0);
    }
    // zero conormal flux at the top
    const int rt = idx(m, i);
    trip.emplace_back(rt, rt, -a[i] / dt);
    trip.emplace_back(rt, idx(m - 1, i), a[i] / dt);
    add_lx(rt, m, 0.5 * dt);
  }
  if (neumann) {
    // pin the w-mean of the boundary layer with a Lagrange multiplier
    const int rl = nu - 1;
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(rl, idx(0, i), grid.w[i] * h);
      trip.emplace_back(idx(0, i), rl, grid.w[i] * h);
    }
  }
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("finite-difference reference factorization failed");
  const Vec sol = lu.solve(rhs);

  FDReference out;
  out.n = n;
  out.m = m;
  out.tmax = tmax;
  out.u.resize(m + 1);
  for (int j = 0; j <= m; ++j) out.u[j] = sol.segment(idx(j, 0), n);

  // self-reported error from the half-resolution solve
  if (n % 2 == 0 && m % 2 == 0 && n >= 8 && m >= 4) {
    WeightedGrid cg;
    cg.n = n / 2;
    cg.h = 2.0 * h;
    cg.w.resize(n / 2);
    CoefficientMatrix cA;
    cA.b11.resize(n / 2);
    cA.b12 = VecC::Zero(n / 2);
    cA.b21 = VecC::Zero(n / 2);
    cA.b22.resize(n / 2);
    Vec cdat(n / 2);
    for (int k = 0; k < n / 2; ++k) {
      cg.w[k] = 0.5 * (grid.w[2 * k] + grid.w[2 * k + 1]);
      cA.b11[k] = 0.5 * (a[2 * k] + a[2 * k + 1]);
      cA.b22[k] = 0.5 * (d[2 * k] + d[2 * k + 1]);
      cdat[k] = 0.5 * (datum[2 * k] + datum[2 * k + 1]);
    }
    FDReference coarse = fd_reference_solve(cg, cA, kind, cdat, tmax, m / 2);
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= m; j += 2) {
      const Vec& uf = out.u[j];
      const Vec& uc = coarse.u[j / 2];
      for (int i = 0; i < n; ++i) {
        // fine midpoint between coarse midpoints: linear periodic interpolation
        const double x = (i + 0.5) * h;
        const double xc = x / (2.0 * h) - 0.5;  // coarse cell coordinate
        int k0 = static_cast<int>(std::floor(xc));
        const double fr = xc - k0;
        k0 = ((k0 % (n / 2)) + n / 2) % (n / 2);
        const int k1 = (k0 + 1) % (n / 2);
        const double uci = (1.0 - fr) * uc[k0] + fr * uc[k1];
        num += (uf[i] - uci) * (uf[i] - uci) * grid.w[i];
        den += uf[i] * uf[i] * grid.w[i];
      }
    }
    out.refinement_error = std::sqrt(num / std::max(den, 1e-300));
  }
  return out;
}

InteriorReport interior_checks(const WeightedGrid& grid, const BVPSolution& sol,
                               const CoefficientMatrix& B, std::uint64_t seed) {
  (void)B;
  const int n = grid.n;
  const int nt = static_cast<int>(sol.tg.t.size());
  std::mt19937_64 gen(seed);
  InteriorReport rep;

  std::vector<VecC> u(nt);
  for (int j = 0; j < nt; ++j) {
    u[j] = VecC(n);
    for (int i = 0; i < n; ++i) u[j][i] = cplx(sol.u_re[j][i], sol.u_im[j][i]);
  }
  // trapezoid dt weights from the node spacing (works for any monotone grid)
  Vec dtw = Vec::Zero(nt);
  for (int j = 0; j + 1 < nt; ++j) {
    const double half = 0.5 * (sol.tg.t[j + 1] - sol.tg.t[j]);
    dtw[j] += half;
    dtw[j + 1] += half;
  }

  for (int sample = 0; sample < 12; ++sample) {
    const int jc = nt / 4 + static_cast<int>(rng_unit(gen) * (nt / 2));
    const double tc = sol.tg.t[jc];
    const double r = 0.45 * tc;
    const double xc = rng_unit(gen);
    if (tc + 2.0 * r >= sol.tg.t[nt - 1] || tc - 2.0 * r <= sol.tg.t[0]) continue;

    double gb = 0.0, fb = 0.0, u2 = 0.0, mass = 0.0;
    cplx usum = 0.0;
    // pass 1: w-average of u over 2B
    for (int j = 0; j < nt; ++j) {
      const double t = sol.tg.t[j];
      if (std::abs(t - tc) >= 2.0 * r) continue;
      const double wt = dtw[j];
      for (int i = 0; i < n; ++i) {
        if (circle_dist((i + 0.5) * grid.h, xc) >= 2.0 * r) continue;
        usum += wt * grid.h * grid.w[i] * u[j][i];
        mass += wt * grid.h * grid.w[i];
      }
    }
    if (mass <= 0.0) continue;
    const cplx uavg = usum / mass;
    for (int j = 0; j < nt; ++j) {
      const double t = sol.tg.t[j];
      const double wt = dtw[j];
      const bool in2 = std::abs(t - tc) < 2.0 * r;
      const bool in1 = std::abs(t - tc) < r;
      if (!in2) continue;
      const int jn = std::min(j + 1, nt - 1), jp = std::max(j - 1, 0);
      const double dtj = sol.tg.t[jn] - sol.tg.t[jp];
      for (int i = 0; i < n; ++i) {
        const double dist = circle_dist((i + 0.5) * grid.h, xc);
        if (dist >= 2.0 * r) continue;
        const double cell = wt * grid.h * grid.w[i];
        u2 += cell * std::norm(u[j][i] - uavg);
        if (in1 && dist < r) {
          const cplx gx = (u[j][(i + 1) % n] - u[j][i]) / grid.h;
          const cplx gt = dtj > 0.0 ? (u[jn][i] - u[jp][i]) / dtj : cplx(0.0);
          gb += cell * (std::norm(gx) + std::norm(gt));
          fb += cell * (std::norm(sol.f.vals[j][i]) + std::norm(sol.f.vals[j][n + i]));
        }
      }
    }
    if (u2 > 1e-300) {
      rep.caccioppoli = std::max(rep.caccioppoli, gb * r * r / u2);
      rep.coercivity = std::max(rep.coercivity, fb * r * r / u2);
    }
  }

  // Whitney averages of |f| on the largest scales (top octave of the t grid)
  for (int j = 0; j < nt; ++j) {
    if (sol.tg.t[j] < 0.5 * sol.tg.t[nt - 1]) continue;
    double acc = 0.0, mass = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += grid.h * grid.w[i] *
             std::sqrt(std::norm(sol.f.vals[j][i]) + std::norm(sol.f.vals[j][n + i]));
      mass += grid.h * grid.w[i];
    }
    rep.whitney_decay = std::max(rep.whitney_decay, acc / mass);
  }
  return rep;
}

std::string InteriorReport::to_json() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\n  \"caccioppoli\": %.17g,\n  \"coercivity\": %.17g,\n"
                "  \"whitney_decay\": %.17g\n}\n",
                caccioppoli, coercivity, whitney_decay);
  return buf;
}

std::vector<PerturbationPoint> perturbation_sweep(const WeightedGrid& grid,
                                                  const CoefficientMatrix& M0,
                                                  const CoefficientMatrix& dM,
                                                  BVPKind kind, const VecC& datum,
                                                  const std::vector<double>& eps_list) {
  const DiscreteD D = build_D(grid);
  std::vector<PerturbationPoint> out;
  VecC base;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    CoefficientMatrix M = M0;
    for (int i = 0; i < M.n(); ++i) {
      M.b11[i] += eps * dM.b11[i];
      M.b12[i] += eps * dM.b12[i];
      M.b21[i] += eps * dM.b21[i];
      M.b22[i] += eps * dM.b22[i];
    }
    const CoefficientPair cp = make_coefficients(grid, M);
    SpectralCalculus calc(D, cp.B);
    const TraceSolve ts = trace_solve(calc, kind, datum);
    PerturbationPoint p;
    p.eps = eps;
    p.smin = ts.smin;
    if (k == 0) {
      base = ts.hplus;
      p.drift = 0.0;
    } else {
      p.drift = grid.norm(ts.hplus - base) / std::max(grid.norm(base), 1e-300);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace degen
