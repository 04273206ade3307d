#include "degenlab/dyadic.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace degen {

TGrid TGrid::geometric(double tmin, double tmax, int per_octave) {
  if (!(tmin > 0.0 && tmax > tmin && per_octave >= 1))
    throw std::invalid_argument("bad t-grid parameters");
  TGrid g;
  const double ds = std::log(2.0) / per_octave;
  const int m = static_cast<int>(std::ceil(std::log(tmax / tmin) / ds));
  g.t.resize(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) g.t[static_cast<std::size_t>(i)] = tmin * std::exp(ds * i);
  g.t.back() = tmax;
  g.wlog.assign(g.t.size(), 0.0);
  for (std::size_t i = 0; i + 1 < g.t.size(); ++i) {
    const double half = 0.5 * std::log(g.t[i + 1] / g.t[i]);
    g.wlog[i] += half;
    g.wlog[i + 1] += half;
  }
  return g;
}

double TGrid::integrate_log(const std::vector<double>& g) const {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += wlog[i] * g[i];
  return s;
}

double TGrid::integrate_lin(const std::vector<double>& g) const {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += wlog[i] * t[i] * g[i];
  return s;
}

int level_for_t(double t, int max_level) {
  if (t >= 1.0) return 0;
  const int d = static_cast<int>(std::floor(-std::log2(t) + 1e-12));
  return std::clamp(d, 0, max_level);
}

VecC et_apply(const VecC& u, const Vec& w, double h, double t) {
  const int n = static_cast<int>(w.size());
  int p = 0;
  while ((1 << p) < n) ++p;
  const int d = level_for_t(t, p);
  const int m = n >> d;  // cells per arc
  VecC out(2 * n);
  for (int k = 0; k < (1 << d); ++k) {
    cplx sp = 0.0, sq = 0.0;
    double sw = 0.0;
    for (int i = k * m; i < (k + 1) * m; ++i) {
      sp += u[i] * w[i];
      sq += u[n + i];
      sw += w[i];
    }
    const cplx vp = sp / sw;                       // dw average (perp)
    const cplx vq = sq / static_cast<double>(m);   // dx average (par)
    for (int i = k * m; i < (k + 1) * m; ++i) {
      out[i] = vp;
      out[n + i] = vq;
    }
  }
  (void)h;
  return out;
}

cplx arc_average(const VecC& f, const Vec& w, double h, const DyadicCube& q, bool use_w) {
  const int n = static_cast<int>(w.size());
  int p = 0;
  while ((1 << p) < n) ++p;
  if (q.level > p) throw std::invalid_argument("resolution-too-coarse for the requested arc");
  const int m = n >> q.level;
  const int base = static_cast<int>(q.index) * m;
  cplx s = 0.0;
  double norm = 0.0;
  for (int i = base; i < base + m; ++i) {
    const double ww = use_w ? w[i] : 1.0;
    s += f[i] * ww;
    norm += ww;
  }
  (void)h;
  return s / norm;
}

double arc_mass(const Vec& w, double h, const DyadicCube& q) {
  const int n = static_cast<int>(w.size());
  const int m = n >> q.level;
  const int base = static_cast<int>(q.index) * m;
  double s = 0.0;
  for (int i = base; i < base + m; ++i) s += w[i];
  return s * h;
}

namespace {

// pyramid of per-arc sums of a cell row (level p down to 0)
std::vector<Vec> arc_pyramid(const Vec& cells, int p) {
  std::vector<Vec> lv(static_cast<std::size_t>(p) + 1);
  lv[static_cast<std::size_t>(p)] = cells;
  for (int l = p - 1; l >= 0; --l) {
    const Vec& lo = lv[static_cast<std::size_t>(l) + 1];
    Vec cur(1 << l);
    for (int k = 0; k < (1 << l); ++k) cur[k] = lo[2 * k] + lo[2 * k + 1];
    lv[static_cast<std::size_t>(l)] = cur;
  }
  return lv;
}

// max over the circular x-window [k-m, k+m] for every k
Vec sliding_circular_max(const Vec& row, int m) {
  const int n = static_cast<int>(row.size());
  if (2 * m + 1 >= n) return Vec::Constant(n, row.maxCoeff());
  Vec out(n);
  std::deque<int> dq;  // indices into the doubled row, decreasing values
  auto val = [&](int j) { return row[((j % n) + n) % n]; };
  int hi = -m - 1;
  for (int k = 0; k < n; ++k) {
    const int nlo = k - m, nhi = k + m;
    while (hi < nhi) {
      ++hi;
      while (!dq.empty() && val(dq.back()) <= val(hi)) dq.pop_back();
      dq.push_back(hi);
    }
    while (!dq.empty() && dq.front() < nlo) dq.pop_front();
    out[k] = val(dq.front());
  }
  return out;
}

}  // namespace

double carleson_norm_dyadic(const TGrid& tg, const std::vector<Vec>& g,
                            const Vec& w, double h, DyadicCube* argmax) {
  const int n = static_cast<int>(w.size());
  int p = 0;
  while ((1 << p) < n) ++p;
  // per-t pyramids of int_arc g dw
  std::vector<std::vector<Vec>> pyr(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    pyr[i] = arc_pyramid((g[i].array() * w.array() * h).matrix(), p);
  const auto wpyr = arc_pyramid(w * h, p);

  double best = 0.0;
  DyadicCube bq{0, 0};
  for (int l = 0; l <= p; ++l) {
    const double len = std::ldexp(1.0, -l);
    Vec acc = Vec::Zero(1 << l);
    for (std::size_t i = 0; i < tg.t.size(); ++i)
      if (tg.t[i] <= len * (1.0 + 1e-12))
        acc += tg.wlog[i] * pyr[i][static_cast<std::size_t>(l)];
    for (int k = 0; k < (1 << l); ++k) {
      const double r = acc[k] / wpyr[static_cast<std::size_t>(l)][k];
      if (r > best) {
        best = r;
        bq = DyadicCube{l, k};
      }
    }
  }
  if (argmax) *argmax = bq;
  return std::sqrt(best);
}

namespace {

// index window (first, last] of t nodes inside (t/c0, c0 t)
std::pair<int, int> t_window(const TGrid& tg, double t, double c0) {
  int a = 0, b = -1;
  for (int j = 0; j < tg.size(); ++j) {
    if (tg.t[static_cast<std::size_t>(j)] <= t / c0) a = j + 1;
    if (tg.t[static_cast<std::size_t>(j)] < c0 * t) b = j;
  }
  return {a, b};
}

}  // namespace

Vec ntmax(const UpperHalfField& f, const Vec& w, double h, double q, double c0, double c1) {
  const int n = f.n;
  const bool inf_avg = q <= 0.0;
  // per-t rows: |f|^q w (finite q) or |f| (sup), plus prefix sums over cells
  std::vector<Vec> rows(f.vals.size()), wsum_rows;
  for (std::size_t i = 0; i < f.vals.size(); ++i) {
    Vec r(n);
    for (int j = 0; j < n; ++j) {
      const double m = std::sqrt(std::norm(f.vals[i][j]) + std::norm(f.vals[i][n + j]));
      r[j] = inf_avg ? m : std::pow(m, q) * w[j] * h;
    }
    rows[i] = r;
  }

  Vec out = Vec::Zero(n);
  auto circ_sum = [&](const Vec& pref, int lo, int hi) {
    // sum of cells lo..hi (inclusive) on the circle, pref = plain prefix sums
    const double total = pref[n];
    if (hi - lo + 1 >= n) return total;
    auto seg = [&](int a, int b) { return pref[b + 1] - pref[a]; };
    lo = ((lo % n) + n) % n;
    hi = ((hi % n) + n) % n;
    if (lo <= hi) return seg(lo, hi);
    return seg(lo, n - 1) + seg(0, hi);
  };
  // prefix sums for finite q
  std::vector<Vec> prefs, wprefs;
  if (!inf_avg) {
    prefs.resize(rows.size());
    wprefs.resize(rows.size());
    Vec wrow = (w * h).eval();
    Vec wpref(n + 1);
    wpref[0] = 0;
    for (int j = 0; j < n; ++j) wpref[j + 1] = wpref[j] + wrow[j];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Vec pr(n + 1);
      pr[0] = 0;
      for (int j = 0; j < n; ++j) pr[j + 1] = pr[j] + rows[i][j];
      prefs[i] = pr;
      wprefs[i] = wpref;
    }
  }

  for (int i = 0; i < f.tg.size(); ++i) {
    const double t = f.tg.t[static_cast<std::size_t>(i)];
    const auto [ja, jb] = t_window(f.tg, t, c0);
    if (ja > jb) continue;
    const int m = static_cast<int>(std::floor(c1 * t / h));
    if (inf_avg) {
      for (int j = ja; j <= jb; ++j) {
        const Vec mx = sliding_circular_max(rows[static_cast<std::size_t>(j)], m);
        for (int k = 0; k < n; ++k) out[k] = std::max(out[k], mx[k]);
      }
    } else {
      for (int k = 0; k < n; ++k) {
        double num = 0.0, den = 0.0;
        for (int j = ja; j <= jb; ++j) {
          const double wt = f.tg.wlog[static_cast<std::size_t>(j)] *
                            f.tg.t[static_cast<std::size_t>(j)];
          num += wt * circ_sum(prefs[static_cast<std::size_t>(j)], k - m, k + m);
          den += wt * circ_sum(wprefs[static_cast<std::size_t>(j)], k - m, k + m);
        }
        if (den > 0.0)
          out[k] = std::max(out[k], std::pow(num / den, 1.0 / q));
      }
    }
  }
  return out;
}

double boundary_l2w(const Vec& f, const Vec& w, double h) {
  return std::sqrt((f.array().square() * w.array()).sum() * h);
}

ModCarlesonReport modified_carleson_norm(const TGrid& tg, const std::vector<Vec>& a,
                                         const Vec& w, double h, double c0, double c1) {
  const int n = static_cast<int>(w.size());
  int p = 0;
  while ((1 << p) < n) ++p;
  ModCarlesonReport rep;
  for (const auto& row : a) rep.sup_norm = std::max(rep.sup_norm, row.maxCoeff());

  // F(t,x) = sup over the Whitney region of a^2/s
  std::vector<Vec> sq(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    sq[i] = (a[i].array().square() / tg.t[i]).matrix();
  std::vector<Vec> F(a.size(), Vec::Zero(n));
  for (int i = 0; i < tg.size(); ++i) {
    const double t = tg.t[static_cast<std::size_t>(i)];
    const auto [ja, jb] = t_window(tg, t, c0);
    const int m = static_cast<int>(std::floor(c1 * t / h));
    for (int j = ja; j <= jb; ++j) {
      const Vec mx = sliding_circular_max(sq[static_cast<std::size_t>(j)], m);
      for (int k = 0; k < n; ++k)
        F[static_cast<std::size_t>(i)][k] = std::max(F[static_cast<std::size_t>(i)][k], mx[k]);
    }
  }

  // Carleson functional against dt x dw; sup over arcs = sup over x
  std::vector<std::vector<Vec>> pyr(F.size());
  for (std::size_t i = 0; i < F.size(); ++i)
    pyr[i] = arc_pyramid((F[i].array() * w.array() * h).matrix(), p);
  const auto wpyr = arc_pyramid(w * h, p);
  double best = 0.0;
  for (int l = 0; l <= p; ++l) {
    const double len = std::ldexp(1.0, -l);
    Vec acc = Vec::Zero(1 << l);
    for (std::size_t i = 0; i < tg.t.size(); ++i)
      if (tg.t[i] <= len * (1.0 + 1e-12))
        acc += tg.wlog[i] * tg.t[i] * pyr[i][static_cast<std::size_t>(l)];
    for (int k = 0; k < (1 << l); ++k)
      best = std::max(best, acc[k] / wpyr[static_cast<std::size_t>(l)][k]);
  }
  rep.star = std::sqrt(best);
  return rep;
}

double y_norm(const UpperHalfField& f, const Vec& w, double h) {
  double s = 0.0;
  for (int i = 0; i < f.tg.size(); ++i) {
    double nn = 0.0;
    for (int j = 0; j < 2 * f.n; ++j)
      nn += std::norm(f.vals[static_cast<std::size_t>(i)][j]) * w[j % f.n];
    const double t = f.tg.t[static_cast<std::size_t>(i)];
    s += f.tg.wlog[static_cast<std::size_t>(i)] * t * t * nn * h;
  }
  return std::sqrt(s);
}

double ystar_norm(const UpperHalfField& f, const Vec& w, double h) {
  double s = 0.0;
  for (int i = 0; i < f.tg.size(); ++i) {
    double nn = 0.0;
    for (int j = 0; j < 2 * f.n; ++j)
      nn += std::norm(f.vals[static_cast<std::size_t>(i)][j]) * w[j % f.n];
    s += f.tg.wlog[static_cast<std::size_t>(i)] * nn * h;
  }
  return std::sqrt(s);
}

}  // namespace degen
