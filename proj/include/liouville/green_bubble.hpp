#pragma once

#include <utility>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/linear_algebra.hpp"
#include "liouville/sphere_mesh.hpp"

namespace liouville {

struct GreenResult {
  ScalarField field;  // G(., pole) with int G = 0
  int pole = -1;
  double A_value = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};  // annulus radii in the metric g
  double fit_residual = 0.0;
  int fit_vertices = 0;
};

/// Solves -Delta G + 2 K_g = 8 pi delta_pole with int G = 0. The stiffness
/// factorization is shared across poles.
class GreenSolver {
 public:
  explicit GreenSolver(const DiscreteOperators& ops);
  GreenResult solve(int pole) const;

 private:
  const DiscreteOperators& ops_;
  PinnedLaplacian laplacian_;
};

GreenResult solve_green(const DiscreteOperators& ops, int pole);

/// Distance in the metric g from `pole` to every vertex, measured along the
/// round great-circle arc with the trapezoid rule for the length element
/// e^{phi/2}. Exact on the round background.
Eigen::VectorXd conformal_distances(const DiscreteOperators& ops, int pole);

/// Fits G + 4 ln d to a constant on the annulus 4..8 mean edge lengths
/// around the pole (lengths scaled by e^{phi(pole)/2}). Stores the constant,
/// the window and the RMS fit residual in `green` and returns the constant.
/// Throws ResolutionError when fewer than 30 vertices fall in the annulus.
double extract_A(GreenResult& green, const DiscreteOperators& ops);

/// phi_0(x) = -2 ln(1 + pi |x|^2).
double bubble_profile(double radius);
std::vector<double> bubble_profile(const std::vector<Eigen::Vector2d>& points);

struct BubbleReport {
  double R = 0.0;
  double dirichlet_integral = 0.0;
  double dirichlet_closed_form = 0.0;   // 16 pi [ln(1+pi R^2) + 1/(1+pi R^2) - 1]
  double dirichlet_asymptotic = 0.0;    // 16 pi [ln(1+pi R^2) - 1]
  double mass_integral = 0.0;
  double mass_closed_form = 0.0;        // pi R^2 / (1 + pi R^2)
  double pde_residual_max = 0.0;
  double rescaled_profile_error = -1.0; // < 0 when no field was supplied
  // Rescaling data (rescale_diagnostic only).
  double tau = 0.0;
  double peak_value = 0.0;
  int peak_vertex = -1;
  int samples = 0;
};

/// Mesh-free identities of the bubble on B_R: residual of -Delta phi_0 = 8 pi e^{phi_0}
/// from analytic derivatives on `quadrature_n` radii, and the mass and
/// Dirichlet integrals by adaptive Gauss-Kronrod quadrature.
BubbleReport bubble_checks(double R, int quadrature_n);

/// Pulls v back to the tangent plane at its maximum through normal
/// coordinates, rescales by tau = e^{beta/2} (beta = max v), interpolates the
/// piecewise-linear field on a polar grid of B_R, and reports
/// sup |v(tau^{-1} x + x_peak) - 2 ln tau - phi_0(x)|.
BubbleReport rescale_diagnostic(const ScalarField& v, const DiscreteOperators& ops, double R,
                                int radial_n = 32, int angular_n = 32);

/// -4 pi A - 8 pi ln pi - 8 pi.
double lower_bound_predictor(double A);

}  // namespace liouville
