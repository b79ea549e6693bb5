// Python view of the solver: operators, the time-parallel linear driver and
// the experiment runner used by the command line tool.

#include "pebk/bench.hpp"
#include "pebk/model.hpp"
#include "pebk/paraexp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pebk;

namespace {

NodeKind node_kind(const std::string& name) {
  if (name == "chebyshev") return NodeKind::chebyshev;
  if (name == "uniform") return NodeKind::uniform;
  throw InvalidArgument("node kind must be 'chebyshev' or 'uniform', got '" + name + "'");
}

RankRule rank_rule(int rank, double svd_tol) {
  if (rank > 0) return FixedRank{rank};
  return RelativeTolerance{svd_tol};
}

}  // namespace

PYBIND11_MODULE(_pebk, m) {
  m.doc() = "Time-parallel exponential block Krylov integrator";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<SparseOperator>(m, "SparseOperator")
      .def(py::init([](Index n, std::vector<Index> indptr, std::vector<Index> indices,
                       std::vector<double> data) {
             return SparseOperator(n, std::move(indptr), std::move(indices), std::move(data));
           }),
           py::arg("n"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
      .def_property_readonly("n", &SparseOperator::n)
      .def_property_readonly("nnz", &SparseOperator::nnz)
      .def("apply", py::overload_cast<const Vector&>(&SparseOperator::apply, py::const_))
      .def("to_dense", &SparseOperator::to_dense);

  m.def("ade_operator",
        [](double dx, double a, double nu) { return build_ade(GridSpec::from_spacing(dx), {a, nu}); },
        py::arg("dx"), py::arg("a") = 1.0, py::arg("nu") = 1e-2,
        "nu*D2 - a*D1 on the periodic grid with spacing dx.");
  m.def("grid_points", [](double dx) { return GridSpec::from_spacing(dx).points(); }, py::arg("dx"));
  m.def("ade_exact",
        [](const Vector& x, double t, double a, double nu) { return ade_exact(x, t, {a, nu}); },
        py::arg("x"), py::arg("t"), py::arg("a") = 1.0, py::arg("nu") = 1e-2,
        "Exact solution of the pulse problem with u(x, 0) = sin^20(pi x).");

  py::class_<Waveform>(m, "Waveform")
      .def_property_readonly("n", &Waveform::n)
      .def_property_readonly("t_start", &Waveform::t_start)
      .def_property_readonly("t_end", &Waveform::t_end)
      .def("final_state", &Waveform::final_state)
      .def("evaluate", &Waveform::evaluate, py::arg("t"));

  py::class_<ParaexpResult>(m, "ParaexpResult")
      .def_readonly("u", &ParaexpResult::u)
      .def_readonly("tau1", &ParaexpResult::tau1)
      .def_readonly("tau2", &ParaexpResult::tau2)
      .def_readonly("wall", &ParaexpResult::wall);

  m.def(
      "paraexp_solve",
      [](const SparseOperator& a, const Vector& u0, std::optional<SourceFn> g, double horizon,
         int p, int samples, double tol, int rank, double svd_tol, const std::string& nodes,
         bool threaded) {
        LinearIVP ivp;
        ivp.a = a;
        ivp.u0 = u0;
        if (g) ivp.g = *g;
        ivp.horizon = horizon;
        ivp.offset = Vector::Zero(a.n());
        const Partition partition = Partition::uniform(0.0, horizon, p, samples, node_kind(nodes));
        EbkConfig cfg;
        cfg.tol = tol;
        ParaexpOptions options;
        options.rank = rank_rule(rank, svd_tol);
        options.mode = threaded ? TimingMode::threaded : TimingMode::emulated;
        return paraexp_solve(ivp, partition, cfg, options);
      },
      py::arg("a"), py::arg("u0"), py::arg("g") = py::none(), py::arg("horizon") = 1.0,
      py::arg("p") = 1, py::arg("samples") = 32, py::arg("tol") = 1e-6, py::arg("rank") = 0,
      py::arg("svd_tol") = 1e-12, py::arg("nodes") = "chebyshev", py::arg("threaded") = false,
      py::call_guard<py::gil_scoped_release>(),
      "Solve u' = A u + g(t), u(0) = u0 on [0, horizon] with P subintervals.\n"
      "rank > 0 keeps that many singular triplets, otherwise svd_tol decides.");

  m.def("experiments", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : experiments()) out.emplace_back(e.id, e.description);
    return out;
  });

  m.def(
      "run_experiment",
      [](const std::string& id, const std::map<std::string, std::string>& params,
         const std::filesystem::path& out_dir, bool no_timing,
         std::optional<std::filesystem::path> config) {
        const Config file = config ? Config::load(*config) : Config{};
        std::vector<std::pair<std::string, std::string>> overrides(params.begin(), params.end());
        RunOptions options;
        options.out_dir = out_dir;
        options.no_timing = no_timing;
        ExperimentOutput result = run_experiment(id, file, overrides, options);
        return py::make_tuple(result.files, result.summary);
      },
      py::arg("id"), py::arg("params") = std::map<std::string, std::string>{},
      py::arg("out_dir") = ".", py::arg("no_timing") = false, py::arg("config") = py::none(),
      "Run a registered experiment; returns (written files, summary).");
}
