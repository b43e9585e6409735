#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "twlp/corpus.hpp"
#include "twlp/elim_tree.hpp"
#include "twlp/errors.hpp"
#include "twlp/ipm.hpp"
#include "twlp/lp.hpp"
#include "twlp/reference.hpp"

namespace py = pybind11;
using namespace twlp;

namespace {

TreeDecomposition td_from_text(const std::string& text) {
  std::istringstream in(text);
  return read_pace_td(in);
}

std::string td_to_text(const TreeDecomposition& td) {
  std::ostringstream out;
  write_pace_td(out, td);
  return out.str();
}

Solution solve_lp(const LpProblem& P, const TreeDecomposition& td, const std::string& mode, double eps,
                  unsigned long long seed, int k, double radius) {
  P.validate();
  SolveOptions o;
  if (mode == "exact") o.mode = SolveMode::Exact;
  else if (mode == "maintained") o.mode = SolveMode::Maintained;
  else throw InputError("unknown mode '" + mode + "'");
  o.eps = eps;
  o.seed = seed;
  o.window = k;
  o.inner_radius = radius > 0 ? radius : P.radius.value_or(0.0);
  py::gil_scoped_release release;
  return solve(P.matrix(), P.b, P.c, P.lower, P.upper, td, o);
}

}  // namespace

PYBIND11_MODULE(_twlp, m) {
  m.doc() = "LP solver for constraint matrices of small treewidth";

  auto base = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<ValueError>(m, "LpValueError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  (void)base;

  py::class_<Triplet>(m, "Triplet")
      .def(py::init<int, int, double>(), py::arg("row"), py::arg("col"), py::arg("val"))
      .def_readwrite("row", &Triplet::row)
      .def_readwrite("col", &Triplet::col)
      .def_readwrite("val", &Triplet::val)
      .def("__repr__", [](const Triplet& t) {
        return "Triplet(" + std::to_string(t.row) + ", " + std::to_string(t.col) + ", " + std::to_string(t.val) + ")";
      });

  py::class_<LpProblem>(m, "LpProblem")
      .def(py::init<>())
      .def_readwrite("d", &LpProblem::d)
      .def_readwrite("n", &LpProblem::n)
      .def_readwrite("entries", &LpProblem::entries)
      .def_readwrite("b", &LpProblem::b)
      .def_readwrite("c", &LpProblem::c)
      .def_readwrite("lower", &LpProblem::lower)
      .def_readwrite("upper", &LpProblem::upper)
      .def_readwrite("block_sizes", &LpProblem::block_sizes)
      .def_readwrite("radius", &LpProblem::radius)
      .def("validate", &LpProblem::validate);

  py::class_<TreeDecomposition>(m, "TreeDecomposition")
      .def(py::init<>())
      .def_readwrite("num_vertices", &TreeDecomposition::num_vertices)
      .def_readwrite("bags", &TreeDecomposition::bags)
      .def_readwrite("edges", &TreeDecomposition::edges)
      .def_property_readonly("width", &TreeDecomposition::width);

  py::class_<Solution>(m, "Solution")
      .def_readonly("x", &Solution::x)
      .def_readonly("s", &Solution::s)
      .def_readonly("objective", &Solution::objective)
      .def_readonly("iterations", &Solution::iterations)
      .def_readonly("restarts", &Solution::restarts)
      .def_readonly("residual", &Solution::residual)
      .def_readonly("interior", &Solution::interior)
      .def_readonly("lipschitz", &Solution::lipschitz)
      .def_readonly("outer_radius", &Solution::outer_radius)
      .def_readonly("seconds", &Solution::seconds)
      .def_property_readonly("mode",
                             [](const Solution& s) { return s.mode == SolveMode::Exact ? "exact" : "maintained"; });

  m.def("parse_lp", &parse_lp, py::arg("text"));
  m.def("write_lp", &write_lp, py::arg("problem"));
  m.def("parse_td", &td_from_text, py::arg("text"), "PACE .td text");
  m.def("write_td", &td_to_text, py::arg("td"));
  m.def(
      "check_td",
      [](const LpProblem& P, const TreeDecomposition& td) { return check_td(dual_graph(P.matrix()), td); },
      py::arg("problem"), py::arg("td"), "None when td decomposes the dual graph, otherwise the failed axiom");

  m.def(
      "generate",
      [](const std::string& kind, int size, unsigned long long seed, int width) {
        auto k = parse_instance_kind(kind);
        if (!k) throw InputError("unknown instance kind '" + kind + "'");
        Instance I = generate_instance(*k, size, seed, width);
        return py::make_tuple(I.lp, I.td, I.interior);
      },
      py::arg("kind"), py::arg("size"), py::arg("seed") = 1, py::arg("width") = 0,
      "(problem, td, interior point) for kind in path-flow, grid-flow, random-tw");

  m.def("corpus", [] {
    py::list out;
    for (const auto& e : builtin_corpus())
      out.append(py::make_tuple(e.name(), to_string(e.kind), e.size, e.seed, e.width));
    return out;
  });

  m.def("solve", &solve_lp, py::arg("problem"), py::arg("td"), py::arg("mode") = "exact", py::arg("eps") = 1e-6,
        py::arg("seed") = 1, py::arg("k") = 0, py::arg("radius") = 0.0);

  m.def(
      "reference_solve",
      [](const LpProblem& P) {
        ReferenceResult r = reference_solve(P);
        return py::make_tuple(r.objective, r.x);
      },
      py::arg("problem"), "(objective, x) from the dense predictor-corrector reference");
}
