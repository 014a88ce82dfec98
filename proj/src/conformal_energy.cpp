#include "liouville/conformal_energy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "liouville/errors.hpp"

namespace liouville {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

void check_eps(double eps, const char* where) {
  if (!(eps > 0.0 && eps < 8.0 * kPi)) {
    throw ParameterError(where, "eps must lie in (0, 8pi), got " + std::to_string(eps));
  }
}

EnergyBreakdown liouville_energy(const DiscreteOperators& ops, const ScalarField& u) {
  check_field(ops, u, "conformal_energy::liouville_energy");
  EnergyBreakdown e;
  e.dirichlet = u.dot(ops.stiffness * u);
  e.curvature_term = 4.0 * ops.curvature.cwiseProduct(ops.mass).dot(u);
  e.total = e.dirichlet + e.curvature_term;
  return e;
}

EnergyBreakdown perturbed_functional(const DiscreteOperators& ops, const ScalarField& u, double eps) {
  const char* where = "conformal_energy::perturbed_functional";
  check_eps(eps, where);
  check_field(ops, u, where);
  const double weight = 8.0 * kPi - eps;
  EnergyBreakdown e;
  e.dirichlet = 0.5 * u.dot(ops.stiffness * u);
  e.curvature_term = weight / (4.0 * kPi) * ops.curvature.cwiseProduct(ops.mass).dot(u);
  e.log_volume_term = -weight * log_integral_exp(ops, u);
  e.total = e.dirichlet + e.curvature_term + e.log_volume_term;
  return e;
}

Eigen::VectorXd perturbed_differential(const DiscreteOperators& ops, const ScalarField& u, double eps) {
  const char* where = "conformal_energy::perturbed_gradient";
  check_eps(eps, where);
  check_field(ops, u, where);
  const double weight = 8.0 * kPi - eps;
  const double log_z = log_integral_exp(ops, u);
  Eigen::VectorXd d = ops.stiffness * u;
  d.array() += ops.mass.array() *
               (weight / (4.0 * kPi) * ops.curvature.array() - weight * (u.array() - log_z).exp());
  return d;
}

ScalarField perturbed_gradient(const DiscreteOperators& ops, const ScalarField& u, double eps) {
  return perturbed_differential(ops, u, eps).cwiseQuotient(ops.mass);
}

double onofri_deficit(const DiscreteOperators& round_ops, const ScalarField& u) {
  const char* where = "conformal_energy::onofri_deficit";
  check_field(round_ops, u, where);
  if (!round_ops.mesh->is_round()) throw ParameterError(where, "requires the round background");
  return u.dot(round_ops.stiffness * u) / (16.0 * kPi) + u.dot(round_ops.mass) / (4.0 * kPi) -
         (log_integral_exp(round_ops, u) - std::log(4.0 * kPi));
}

ScalarField conformal_curvature(const DiscreteOperators& ops, const ScalarField& u) {
  check_field(ops, u, "conformal_energy::conformal_curvature");
  return (-u.array()).exp() * (negative_laplacian(ops, u).array() + 2.0 * ops.curvature.array());
}

ScalarField mobius_dilation_factor(const TriangulatedSphere& mesh, double lambda) {
  if (!(lambda > 0.0)) {
    throw ParameterError("conformal_energy::mobius_dilation_factor", "lambda must be positive");
  }
  // With x3 the height, 1 + |y|^2 = 2 / (1 - x3) and
  // 1 + lambda^2 |y|^2 = ((1 - x3) + lambda^2 (1 + x3)) / (1 - x3).
  ScalarField u(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const double z = mesh.vertices[i].z();
    u[i] = 2.0 * std::log(2.0 * lambda / ((1.0 - z) + lambda * lambda * (1.0 + z)));
  }
  return u;
}

}  // namespace liouville
