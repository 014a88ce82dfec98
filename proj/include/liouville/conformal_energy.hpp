#pragma once

#include "liouville/sphere_mesh.hpp"

namespace liouville {

/// Parts of an energy functional. Each part is the term exactly as it enters
/// `total`; for I_eps the Dirichlet part therefore carries the factor 1/2.
struct EnergyBreakdown {
  double dirichlet = 0.0;
  double curvature_term = 0.0;
  double log_volume_term = 0.0;
  double total = 0.0;
};

/// Liouville energy  int |grad u|^2 + 2 R_g u  with R_g = 2 K_g.
EnergyBreakdown liouville_energy(const DiscreteOperators& ops, const ScalarField& u);

/// I_eps(u) = 1/2 int |grad u|^2 + (8pi - eps)/(4pi) int K_g u - (8pi - eps) ln int e^u.
EnergyBreakdown perturbed_functional(const DiscreteOperators& ops, const ScalarField& u, double eps);

/// Exact differential of the discrete I_eps as a covector (one entry per
/// vertex, paired with directions by the plain dot product).
Eigen::VectorXd perturbed_differential(const DiscreteOperators& ops, const ScalarField& u, double eps);

/// Field form of the gradient: the differential divided by the mass weights,
/// i.e. -Delta u + (8pi-eps)/(4pi) K_g - (8pi-eps) e^u / int e^u.
/// Pairs with directions through the mass-weighted inner product.
ScalarField perturbed_gradient(const DiscreteOperators& ops, const ScalarField& u, double eps);

/// (1/16pi) int |grad u|^2 + (1/4pi) int u - ln((1/4pi) int e^u) on the round
/// sphere; nonnegative in the continuum.
double onofri_deficit(const DiscreteOperators& round_ops, const ScalarField& u);

/// Scalar curvature of e^u g:  e^{-u} (-Delta_g u + R_g).
ScalarField conformal_curvature(const DiscreteOperators& ops, const ScalarField& u);

/// Volume-preserving conformal factor of the dilation y -> lambda y in
/// stereographic coordinates from the north pole:
/// 2 ln(lambda (1 + |y|^2) / (1 + lambda^2 |y|^2)).
ScalarField mobius_dilation_factor(const TriangulatedSphere& mesh, double lambda);

void check_eps(double eps, const char* where);

}  // namespace liouville
