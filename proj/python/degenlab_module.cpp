// Python bindings for the main operations: weight profiles, corona
// decompositions, quadratic-estimate ratios, BVP solves and the acceptance
// criteria.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "degenlab/acceptance.hpp"
#include "degenlab/bvp.hpp"
#include "degenlab/corona.hpp"
#include "degenlab/quadratic.hpp"
#include "degenlab/weights.hpp"

namespace py = pybind11;
using namespace degen;

namespace {

WeightModel make_weight(const std::string& kind, double value, double exponent,
                        std::uint64_t seed, int depth, double beta) {
  if (kind == "constant") return WeightModel::constant(value, depth);
  if (kind == "power") return WeightModel::power(exponent, depth);
  if (kind == "random_dyadic") return WeightModel::random_dyadic(seed, depth, beta);
  throw std::invalid_argument("kind must be constant|power|random_dyadic");
}

CoefficientMatrix make_b(const std::string& kind, int n, double eps,
                         std::uint64_t seed, double margin) {
  if (kind == "identity") return CoefficientMatrix::identity(n);
  if (kind == "random_accretive")
    return CoefficientMatrix::random_accretive(n, eps, seed, margin);
  if (kind == "random_hermitian")
    return CoefficientMatrix::random_hermitian(n, eps, seed, margin);
  throw std::invalid_argument("kind must be identity|random_accretive|random_hermitian");
}

}  // namespace

PYBIND11_MODULE(degenlab, m) {
  m.doc() = "weighted first-order operators, quadratic estimates and BVPs on the circle";

  py::class_<DyadicCube>(m, "DyadicCube")
      .def(py::init([](int level, std::int64_t index) {
             return DyadicCube{level, index};
           }),
           py::arg("level"), py::arg("index"))
      .def_readonly("level", &DyadicCube::level)
      .def_readonly("index", &DyadicCube::index)
      .def_property_readonly("length", &DyadicCube::length)
      .def("contains", &DyadicCube::contains);

  py::class_<WeightProfile>(m, "WeightProfile")
      .def_readonly("a2", &WeightProfile::a2)
      .def_readonly("sigma", &WeightProfile::sigma)
      .def_readonly("tau", &WeightProfile::tau)
      .def_readonly("c0", &WeightProfile::c0)
      .def_readonly("dw", &WeightProfile::dw)
      .def("to_json", &WeightProfile::to_json);

  py::class_<WeightModel>(m, "WeightModel")
      .def(py::init(&make_weight), py::arg("kind"), py::arg("value") = 1.0,
           py::arg("exponent") = 0.0, py::arg("seed") = 0, py::arg("depth") = 10,
           py::arg("beta") = 0.3)
      .def("__call__", &WeightModel::operator())
      .def("mass", &WeightModel::mass)
      .def("a2_constant", &WeightModel::a2_constant)
      .def("profile", &WeightModel::ainfty_profile, py::arg("depth"),
           py::arg("samples") = 64, py::arg("seed") = 1)
      .def("grid_cell_averages", &WeightModel::grid_cell_averages)
      .def("to_json", &WeightModel::to_json);

  m.def("corona_summary",
        [](const WeightModel& wm, double sigma_w, int depth) {
          const CoronaDecomposition cd = corona_decompose(wm, {0, 0}, sigma_w, depth);
          py::dict d;
          d["generations"] = cd.generations.size();
          d["stopping_cubes"] = cd.all_stopping.size();
          d["packing_ratio"] = cd.packing_ratio(wm);
          return d;
        },
        py::arg("weight"), py::arg("sigma_w"), py::arg("depth"));

  m.def("quadratic_ratio",
        [](const WeightModel& wm, int n, const std::string& b_kind, double eps,
           std::uint64_t seed, int probes) {
          const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
          const DiscreteD D = build_D(grid);
          SpectralCalculus calc(D, make_b(b_kind, n, eps, seed, 0.05));
          const QuadraticReport rep =
              quadratic_ratio_sup(calc, default_tgrid(grid), probes, seed);
          return py::make_tuple(rep.sup_ratio, rep.inf_ratio);
        },
        py::arg("weight"), py::arg("n"), py::arg("b_kind") = "identity",
        py::arg("eps") = 0.3, py::arg("seed") = 1, py::arg("probes") = 8);

  m.def("solve_bvp",
        [](const WeightModel& wm, int n, const std::string& kind_s,
           const VecC& datum, double tmax, int layers) {
          BVPKind kind;
          if (kind_s == "dirichlet") kind = BVPKind::Dirichlet;
          else if (kind_s == "neumann") kind = BVPKind::Neumann;
          else if (kind_s == "regularity") kind = BVPKind::Regularity;
          else throw std::invalid_argument("kind must be dirichlet|neumann|regularity");
          const WeightedGrid grid = WeightedGrid::from_weight(wm, n);
          const CoefficientPair cp =
              make_coefficients(grid, CoefficientMatrix::identity(n));
          const DiscreteD D = build_D(grid);
          SpectralCalculus calc(D, cp.B);
          TGrid tg;
          tg.t.resize(layers + 1);
          tg.wlog.assign(layers + 1, 0.0);
          for (int j = 0; j <= layers; ++j) tg.t[j] = j * (tmax / layers);
          const BVPSolution sol = solve_tindep(calc, cp, kind, datum, tg);
          py::dict d;
          d["u"] = sol.u_re;
          d["t"] = tg.t;
          d["trace_condition"] = sol.trace_condition;
          d["mean_offset"] = sol.mean_offset;
          d["csv"] = sol.to_csv();
          return d;
        },
        py::arg("weight"), py::arg("n"), py::arg("kind"), py::arg("datum"),
        py::arg("tmax") = 1.0, py::arg("layers") = 32);

  py::class_<CriterionResult>(m, "CriterionResult")
      .def_readonly("id", &CriterionResult::id)
      .def_readonly("name", &CriterionResult::name)
      .def_readonly("value", &CriterionResult::value)
      .def_readonly("bound", &CriterionResult::bound)
      .def_readonly("passed", &CriterionResult::pass)
      .def_readonly("detail", &CriterionResult::detail);

  m.def("run_criterion",
        [](int id, const std::string& profile) {
          return run_criterion(id, profile == "full" ? SuiteProfile::Full
                                                     : SuiteProfile::Smoke);
        },
        py::arg("id"), py::arg("profile") = "smoke");
}
