// Command-line driver: every module is exposed as a reproducible command
// reading one JSON config and writing a manifest plus machine-readable outputs.
//
//   degenlab <command> --config <file> [--out <dir>] [--seed <n>]
//
// Exit codes: 0 ok, 1 invalid config, 2 precondition violation,
// 3 report-level assertion failure.
#include "CLI11.hpp"
#include "json.hpp"

#include "degenlab/acceptance.hpp"
#include "degenlab/bvp.hpp"
#include "degenlab/corona.hpp"
#include "degenlab/quadratic.hpp"
#include "degenlab/weights.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace degen;

namespace {

struct RunContext {
  ordered_json config;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  void write_text(const std::string& name, const std::string& text) {
    const fs::path p = out_dir / name;
    std::ofstream os(p, std::ios::binary);
    os << text;
    outputs.push_back(p.string());
  }
  void write_json(const std::string& name, const ordered_json& j) {
    write_text(name, j.dump(2) + "\n");
  }
};

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

WeightModel weight_from(const ordered_json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw nlohmann::json::other_error::create(
        601, "field 'weight' must be an object with a 'kind'", nullptr);
  return WeightModel::from_json(j.dump());
}

CoefficientMatrix coeff_from(const ordered_json& j, int n, std::uint64_t seed) {
  const std::string kind = j.value("kind", "identity");
  const double eps = j.value("eps", 0.3);
  const double margin = j.value("margin", 0.05);
  const std::uint64_t s = j.value("seed", seed);
  if (kind == "identity") return CoefficientMatrix::identity(n);
  if (kind == "scalar")
    return CoefficientMatrix::scalar(n, cplx(j.value("re", 1.0), j.value("im", 0.0)));
  if (kind == "random_accretive")
    return CoefficientMatrix::random_accretive(n, eps, s, margin);
  if (kind == "random_hermitian")
    return CoefficientMatrix::random_hermitian(n, eps, s, margin);
  if (kind == "hat_hermitian")
    return hat_transform(CoefficientMatrix::random_hermitian(n, eps, s, margin));
  throw nlohmann::json::other_error::create(
      602, "field 'B.kind' must be one of identity|scalar|random_accretive|"
           "random_hermitian|hat_hermitian", nullptr);
}

VecC datum_from(const ordered_json& j, int n) {
  const std::string type = j.value("type", "fourier");
  VecC g = VecC::Zero(n);
  if (type == "fourier") {
    const std::vector<double> cs = j.value("cos", std::vector<double>{1.0});
    const std::vector<double> sn = j.value("sin", std::vector<double>{});
    const double mean = j.value("mean", 0.0);
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n;
      double v = mean;
      for (std::size_t k = 0; k < cs.size(); ++k)
        v += cs[k] * std::cos(2.0 * M_PI * (k + 1) * x);
      for (std::size_t k = 0; k < sn.size(); ++k)
        v += sn[k] * std::sin(2.0 * M_PI * (k + 1) * x);
      g[i] = v;
    }
    return g;
  }
  if (type == "indicator") {
    const DyadicCube q{j.value("level", 1), j.value("index", std::int64_t{0})};
    for (int i = 0; i < n; ++i)
      if (q.contains_point((i + 0.5) / n)) g[i] = 1.0;
    return g;
  }
  throw nlohmann::json::other_error::create(
      603, "field 'datum.type' must be fourier or indicator", nullptr);
}

int require_pow2(int n) {
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("N must be a power of two, at least 8");
  return n;
}

// ----------------------------------------------------------------- commands

int cmd_weight(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const int depth = ctx.config.value("depth", wm.depth());
  const int samples = ctx.config.value("samples", 64);
  const WeightProfile prof = wm.ainfty_profile(depth, samples, ctx.seed);
  ordered_json out;
  out["weight"] = ordered_json::parse(wm.to_json());
  out["profile"] = ordered_json::parse(prof.to_json());
  ctx.write_json("weight_profile.json", out);
  return 0;
}

int cmd_corona(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const double sigma_w = ctx.config.value("sigma_w", 0.5);
  const int depth = ctx.config.value("max_depth", wm.depth());
  const CoronaDecomposition cd = corona_decompose(wm, {0, 0}, sigma_w, depth);
  const Vec s = square_function_S(wm, cd, depth);
  ordered_json out = ordered_json::parse(cd.to_json());
  out["packing_ratio"] = cd.packing_ratio(wm);
  out["square_function_max"] = s.size() ? s.maxCoeff() : 0.0;
  out["square_function_mean"] = s.size() ? s.mean() : 0.0;
  ctx.write_json("corona.json", out);
  return 0;
}

int cmd_spec(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const int n = require_pow2(ctx.config.value("N", 128));
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B =
      coeff_from(ctx.config.value("B", ordered_json::object()), n, ctx.seed);
  const AccretivityReport acc = accretivity(D, B, 64, ctx.seed);
  if (acc.kappa <= 0.0) throw std::invalid_argument("coefficients not accretive on clos R(D)");
  SpectralCalculus calc(D, B);
  ordered_json out;
  out["N"] = n;
  out["accretivity"] = {{"kappa", acc.kappa}, {"upper", acc.upper}, {"angle", acc.angle}};
  out["bisector_angle"] = calc.bisector_angle();
  out["eigenvector_condition"] = calc.eigenvector_condition();
  out["reconstruction_error"] = calc.reconstruction_error();
  out["using_fallback"] = calc.using_fallback();
  out["range_dim"] = calc.range_dim();
  ctx.write_json("spec_report.json", out);
  return calc.reconstruction_error() <= 1e-6 ? 0 : 3;
}

int cmd_qest(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const int n = require_pow2(ctx.config.value("N", 128));
  const int probes = ctx.config.value("probes", 8);
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B =
      coeff_from(ctx.config.value("B", ordered_json::object()), n, ctx.seed);
  SpectralCalculus calc(D, B);
  const QuadraticReport rep = quadratic_ratio_sup(calc, default_tgrid(grid), probes, ctx.seed);
  ordered_json out = ordered_json::parse(rep.to_json());
  out["N"] = n;
  out["a2"] = wm.a2_constant(wm.depth());
  ctx.write_json("qest_report.json", out);
  return rep.inf_ratio > 0.0 ? 0 : 3;
}

int cmd_bvp(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const int n = require_pow2(ctx.config.value("N", 128));
  const std::string kind_s = ctx.config.value("kind", "dirichlet");
  BVPKind kind;
  if (kind_s == "dirichlet") kind = BVPKind::Dirichlet;
  else if (kind_s == "neumann") kind = BVPKind::Neumann;
  else if (kind_s == "regularity") kind = BVPKind::Regularity;
  else
    throw nlohmann::json::other_error::create(
        604, "field 'kind' must be dirichlet|neumann|regularity", nullptr);
  const double tmax = ctx.config.value("Tmax", 1.0);
  const int m = ctx.config.value("layers", 64);

  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const CoefficientMatrix M =
      coeff_from(ctx.config.value("M", ordered_json::object()), n, ctx.seed);
  const CoefficientPair cp = make_coefficients(grid, M);
  const DiscreteD D = build_D(grid);
  const AccretivityReport acc = accretivity(D, cp.B, 48, ctx.seed);
  if (acc.kappa <= 0.0)
    throw std::invalid_argument("transformed coefficients not accretive");
  SpectralCalculus calc(D, cp.B);
  const VecC datum = datum_from(ctx.config.value("datum", ordered_json::object()), n);

  TGrid tg;
  tg.t.resize(m + 1);
  tg.wlog.assign(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) tg.t[j] = j * (tmax / m);
  const BVPSolution sol = solve_tindep(calc, cp, kind, datum, tg);
  ctx.write_text("solution.csv", sol.to_csv());

  ordered_json out;
  out["kind"] = kind_s;
  out["N"] = n;
  out["Tmax"] = tmax;
  out["trace_condition"] = sol.trace_condition;
  out["mean_offset"] = sol.mean_offset;
  out["rellich_residual"] = rellich_residual(D, cp.B, sol.f.vals.front());
  out["interior"] =
      ordered_json::parse(interior_checks(grid, sol, cp.B, ctx.seed).to_json());
  ctx.write_json("bvp_report.json", out);
  return sol.trace_condition < 1e10 ? 0 : 3;
}

int cmd_replay(RunContext& ctx) {
  const WeightModel wm = weight_from(ctx.config.at("weight"));
  const int n = require_pow2(ctx.config.value("N", 64));
  const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
  const DiscreteD D = build_D(grid);
  const CoefficientMatrix B =
      coeff_from(ctx.config.value("B", ordered_json::object()), n, ctx.seed);
  SpectralCalculus calc(D, B);
  const TGrid tg = default_tgrid(grid);
  const PrincipalPart pp = principal_part(calc, tg);
  const StoppingParams sp = calibrate({wm}, n, wm.depth(), ctx.seed);
  const ProofReplayReport rep = proof_replay(wm, calc, pp, {0, 0}, sp, ctx.seed);
  ordered_json out = ordered_json::parse(rep.to_json());
  out["stopping_params"] = ordered_json::parse(sp.to_json());
  ctx.write_json("replay_report.json", out);
  // the aggregated bound must dominate the direct measurement
  return rep.aggregated >= rep.direct * (1.0 - 1e-9) ? 0 : 3;
}

int cmd_suite(RunContext& ctx) {
  const std::string prof_s = ctx.config.value("profile", "smoke");
  if (prof_s != "smoke" && prof_s != "full")
    throw nlohmann::json::other_error::create(
        605, "field 'profile' must be smoke or full", nullptr);
  const SuiteProfile prof = prof_s == "smoke" ? SuiteProfile::Smoke : SuiteProfile::Full;
  const auto results = run_all(prof);
  ctx.write_text("suite.csv", suite_csv(results));
  std::string lines;
  int failures = 0;
  for (const auto& r : results) {
    lines += format_line(r) + "\n";
    if (!r.pass) ++failures;
  }
  ctx.write_text("suite.txt", lines);
  std::fputs(lines.c_str(), stdout);
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical workbench for weighted first-order boundary value problems"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::int64_t seed_override = -1;

  const std::vector<std::string> names = {"weight", "corona", "spec", "qest",
                                          "bvp", "replay", "suite"};
  for (const auto& nm : names) {
    CLI::App* sub = app.add_subcommand(nm);
    sub->add_option("--config", config_path)->required(nm != "suite");
    sub->add_option("--out", out_dir);
    sub->add_option("--seed", seed_override);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  RunContext ctx;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::fprintf(stderr, "invalid-config: cannot open %s\n", config_path.c_str());
      return 1;
    }
    try {
      ctx.config = ordered_json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      std::fprintf(stderr, "invalid-config: %s\n", e.what());
      return 1;
    }
  } else {
    ctx.config = ordered_json::object();
  }
  ctx.out_dir = out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  ctx.seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                : ctx.config.value("seed", std::uint64_t{0});

  const std::string started = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  std::string status = "ok";
  try {
    if (cmd == "weight") code = cmd_weight(ctx);
    else if (cmd == "corona") code = cmd_corona(ctx);
    else if (cmd == "spec") code = cmd_spec(ctx);
    else if (cmd == "qest") code = cmd_qest(ctx);
    else if (cmd == "bvp") code = cmd_bvp(ctx);
    else if (cmd == "replay") code = cmd_replay(ctx);
    else code = cmd_suite(ctx);
    if (code == 3) status = "report-assertion-failed";
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "invalid-config: %s\n", e.what());
    status = "invalid-config";
    code = 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "precondition: %s\n", e.what());
    status = "precondition-violation";
    code = 2;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "precondition: %s\n", e.what());
    status = "precondition-violation";
    code = 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    status = "error";
    code = 2;
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ordered_json manifest;
  manifest["config"] = ctx.config;
  manifest["seed"] = ctx.seed;
  manifest["started"] = started;
  manifest["elapsed_s"] = ordered_json::parse(fmt17(elapsed));
  manifest["outputs"] = ctx.outputs;
  manifest["status"] = status;
  {
    std::ofstream os(ctx.out_dir / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << "\n";
  }
  return code;
}
