#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liouville/conformal_energy.hpp"
#include "liouville/green_bubble.hpp"
#include "liouville/inequality_lab.hpp"
#include "liouville/ricci_flow.hpp"
#include "liouville/variational_solver.hpp"

namespace py = pybind11;
using namespace liouville;

namespace {

py::dict breakdown(const EnergyBreakdown& e) {
  py::dict d;
  d["dirichlet"] = e.dirichlet;
  d["curvature_term"] = e.curvature_term;
  d["log_volume_term"] = e.log_volume_term;
  d["total"] = e.total;
  return d;
}

py::dict report_dict(const InequalityReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["samples"] = r.samples;
  d["worst_margin"] = r.worst_margin;
  d["worst_seed"] = r.worst_seed;
  d["empirical_constant"] = r.empirical_constant;
  d["parameters"] = r.parameters;
  std::vector<double> margins;
  for (const auto& s : r.per_sample) margins.push_back(s.margin);
  d["margins"] = margins;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Liouville energy lab on a triangulated 2-sphere";

  auto base = py::register_exception<Error>(m, "LiouvilleError", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<MeshQualityError>(m, "MeshQualityError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ResolutionError>(m, "ResolutionError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<StiffnessError>(m, "StiffnessError", base.ptr());

  py::class_<TriangulatedSphere>(m, "TriangulatedSphere")
      .def_property_readonly("vertices",
                             [](const TriangulatedSphere& s) {
                               Eigen::MatrixX3d x(s.vertex_count(), 3);
                               for (int i = 0; i < s.vertex_count(); ++i) x.row(i) = s.vertices[i].transpose();
                               return x;
                             })
      .def_property_readonly("faces",
                             [](const TriangulatedSphere& s) {
                               Eigen::MatrixX3i f(s.face_count(), 3);
                               for (int i = 0; i < s.face_count(); ++i) f.row(i) << s.faces[i][0], s.faces[i][1], s.faces[i][2];
                               return f;
                             })
      .def_readonly("background_factor", &TriangulatedSphere::background_factor)
      .def_property_readonly("vertex_count", &TriangulatedSphere::vertex_count)
      .def_property_readonly("face_count", &TriangulatedSphere::face_count)
      .def_property_readonly("edge_count", &TriangulatedSphere::edge_count)
      .def_property_readonly("euler_characteristic", &TriangulatedSphere::euler_characteristic);

  py::class_<DiscreteOperators>(m, "DiscreteOperators")
      .def_readonly("stiffness", &DiscreteOperators::stiffness)
      .def_readonly("round_mass", &DiscreteOperators::round_mass)
      .def_readonly("mass", &DiscreteOperators::mass)
      .def_readonly("curvature", &DiscreteOperators::curvature)
      .def_readonly("total_area", &DiscreteOperators::total_area)
      .def_readonly("mean_edge_length", &DiscreteOperators::mean_edge_length)
      .def_property_readonly("size", &DiscreteOperators::size)
      .def_property_readonly("mesh", [](const DiscreteOperators& o) { return *o.mesh; });

  py::class_<BandBasis>(m, "BandBasis")
      .def(py::init<const TriangulatedSphere&, int>(), py::arg("mesh"), py::arg("bands"))
      .def_property_readonly("eigenvalues", &BandBasis::eigenvalues)
      .def("sample", &BandBasis::sample, py::arg("seed"), py::arg("amplitude"));

  m.def("build_icosphere", &build_icosphere, py::arg("level"));
  m.def("set_conformal_background", &set_conformal_background, py::arg("mesh"), py::arg("phi"),
        py::arg("normalize") = true);
  m.def("assemble_operators", &assemble_operators, py::arg("mesh"));
  m.def("integrate", &integrate, py::arg("ops"), py::arg("f"));

  m.def("liouville_energy", [](const DiscreteOperators& o, const ScalarField& u) { return breakdown(liouville_energy(o, u)); },
        py::arg("ops"), py::arg("u"));
  m.def("perturbed_functional",
        [](const DiscreteOperators& o, const ScalarField& u, double eps) { return breakdown(perturbed_functional(o, u, eps)); },
        py::arg("ops"), py::arg("u"), py::arg("eps"));
  m.def("perturbed_gradient", &perturbed_gradient, py::arg("ops"), py::arg("u"), py::arg("eps"));
  m.def("onofri_deficit", &onofri_deficit, py::arg("round_ops"), py::arg("u"));
  m.def("conformal_curvature", &conformal_curvature, py::arg("ops"), py::arg("u"));
  m.def("mobius_dilation_factor", &mobius_dilation_factor, py::arg("mesh"), py::arg("lam"));

  py::class_<MinimizerResult>(m, "MinimizerResult")
      .def_readonly("eps", &MinimizerResult::eps)
      .def_readonly("u_min", &MinimizerResult::u_min)
      .def_readonly("v_field", &MinimizerResult::v_field)
      .def_readonly("energy", &MinimizerResult::energy)
      .def_readonly("el_residual", &MinimizerResult::el_residual)
      .def_readonly("peak_value", &MinimizerResult::peak_value)
      .def_readonly("peak_vertex", &MinimizerResult::peak_vertex)
      .def_readonly("converged", &MinimizerResult::converged)
      .def_property_readonly("energies", [](const MinimizerResult& r) {
        std::vector<double> e;
        for (const auto& it : r.iterations) e.push_back(it.energy);
        return e;
      });

  m.def(
      "minimize_perturbed",
      [](const DiscreteOperators& o, double eps, std::optional<ScalarField> initial, double tol, int max_iter) {
        SolverConfig cfg;
        cfg.eps = eps;
        cfg.gradient_tolerance = tol;
        cfg.max_iterations = max_iter;
        return minimize_perturbed(o, cfg, initial ? *initial : ScalarField::Zero(o.size()));
      },
      py::arg("ops"), py::arg("eps"), py::arg("initial") = py::none(), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 2000);
  m.def(
      "sweep_eps",
      [](const DiscreteOperators& o, const std::vector<double>& eps, bool warm) {
        return sweep_eps(o, SolverConfig{}, eps, warm);
      },
      py::arg("ops"), py::arg("eps_list"), py::arg("warm_start") = true);
  m.def("disk_min_dirichlet", [](double a, double b, double r, int n) { return disk_min_dirichlet(a, b, r, n).value; },
        py::arg("a"), py::arg("b"), py::arg("r"), py::arg("grid_n") = 512);
  m.def("disk_dirichlet_lower_bound", &disk_dirichlet_lower_bound, py::arg("a"), py::arg("b"), py::arg("r"));

  m.def(
      "green",
      [](const DiscreteOperators& o, int pole) {
        GreenResult g = solve_green(o, pole);
        const double a = extract_A(g, o);
        py::dict d;
        d["field"] = g.field;
        d["A"] = a;
        d["fit_residual"] = g.fit_residual;
        d["fit_vertices"] = g.fit_vertices;
        return d;
      },
      py::arg("ops"), py::arg("pole"));
  m.def("conformal_distances", &conformal_distances, py::arg("ops"), py::arg("pole"));
  m.def("bubble_profile", py::overload_cast<double>(&bubble_profile), py::arg("radius"));
  m.def(
      "bubble_checks",
      [](double R, int n) {
        const auto r = bubble_checks(R, n);
        py::dict d;
        d["dirichlet_integral"] = r.dirichlet_integral;
        d["dirichlet_closed_form"] = r.dirichlet_closed_form;
        d["mass_integral"] = r.mass_integral;
        d["mass_closed_form"] = r.mass_closed_form;
        d["pde_residual_max"] = r.pde_residual_max;
        return d;
      },
      py::arg("R"), py::arg("quadrature_n") = 1001);
  m.def("lower_bound_predictor", &lower_bound_predictor, py::arg("A"));

  m.def("check_onofri", [](const DiscreteOperators& o, const BandBasis& b, int n, std::uint64_t seed) {
    return report_dict(check_onofri(o, b, n, seed));
  }, py::arg("round_ops"), py::arg("basis"), py::arg("samples"), py::arg("seed"));
  m.def("check_local_mt", [](double r, int n, std::uint64_t seed) { return report_dict(check_local_mt(r, n, seed)); },
        py::arg("r"), py::arg("samples"), py::arg("seed"));
  m.def("poincare_constant", [](const DiscreteOperators& o, double p) { return poincare_constant(o, p).empirical_constant; },
        py::arg("ops"), py::arg("p"));
  m.def("brezis_merle_check", [](double r, double delta, int n, std::uint64_t seed) {
    return report_dict(brezis_merle_check(r, delta, n, seed));
  }, py::arg("r"), py::arg("delta"), py::arg("samples"), py::arg("seed"));

  m.def(
      "run_flow",
      [](const DiscreteOperators& o, const ScalarField& u0, double t_end, double dt0) {
        const FlowTrace t = run_flow(o, u0, t_end, dt0);
        py::dict d;
        d["times"] = t.times;
        d["energies"] = t.energies;
        d["volumes"] = t.volumes;
        d["curvature_deviation"] = t.curvature_deviation;
        d["final_field"] = t.final_field;
        return d;
      },
      py::arg("ops"), py::arg("u0"), py::arg("t_end"), py::arg("dt0") = 0.01);
}
