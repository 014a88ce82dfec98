#pragma once

#include <vector>

#include "liouville/errors.hpp"
#include "liouville/sphere_mesh.hpp"

namespace liouville {

struct LineSearch {
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double min_step = 0x1p-30;
};

struct SolverConfig {
  double eps = 0.5;
  int max_iterations = 2000;
  /// Stop when the mass norm of the gradient field drops below
  /// gradient_tolerance * max(1, |energy|).
  double gradient_tolerance = 1e-8;
  LineSearch line_search;
  bool newton_polish = true;
  /// Gradient iterations before Newton steps take over (when newton_polish).
  int gradient_phase_cap = 50;
  /// Gradient norm (relative, as above) below which Newton steps take over.
  double newton_switch = 1e-2;

  void validate(const char* where) const;
};

struct IterationRecord {
  int step = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double el_residual = 0.0;
};

struct MinimizerResult {
  double eps = 0.0;
  ScalarField u_min;    // normalized by int K_g u = 0
  ScalarField v_field;  // u_min - ln int e^{u_min}, so int e^v = 1
  double energy = 0.0;
  double el_residual = 0.0;  // relative defect of the mean-field equation
  double peak_value = 0.0;
  int peak_vertex = -1;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool polished = false;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& where, const std::string& what, MinimizerResult best)
      : Error(ErrorKind::Convergence, where, what), best_(std::move(best)) {}
  const MinimizerResult& best() const noexcept { return best_; }

 private:
  MinimizerResult best_;
};

/// u - (int K_g u) / (int K_g).
ScalarField project_constraint(const DiscreteOperators& ops, const ScalarField& u);

/// Relative mean-field residual of v:
///   || -Delta v + (8pi-eps)/(4pi) K_g - (8pi-eps) e^v ||_M / ((8pi-eps)/(4pi) ||K_g||_M).
/// For u not normalized, it is evaluated at v = u - ln int e^u.
double mean_field_residual(const DiscreteOperators& ops, const ScalarField& u, double eps);

/// Projected descent on I_eps over {int K_g u = 0}: H1-preconditioned gradient
/// steps, then Newton steps (when newton_polish), both with Armijo backtracking,
/// followed by a mean-field Newton polish of the Euler-Lagrange equation.
MinimizerResult minimize_perturbed(const DiscreteOperators& ops, const SolverConfig& cfg,
                                   const ScalarField& initial);

/// Minimizes for each eps in turn from u = 0 and, with warm_start, also from
/// the previous minimizer; keeps the lower energy.
std::vector<MinimizerResult> sweep_eps(const DiscreteOperators& ops, const SolverConfig& base,
                                       const std::vector<double>& eps_list, bool warm_start);

/// Damped Newton on -Delta v + (8pi-eps)/(4pi) K_g = (8pi-eps) e^v.
/// Converges to relative residual `tolerance`; throws NumericError when the
/// damping floor is hit or the iteration cap is exhausted.
MinimizerResult solve_mean_field(const DiscreteOperators& ops, double eps, const ScalarField& initial,
                                 double tolerance = 1e-10, int max_iterations = 100);

struct DiskResult {
  double value = 0.0;  // min of int |grad w|^2
  double multiplier = 0.0;
  std::vector<double> radii;
  std::vector<double> profile;
  int iterations = 0;
};

/// Minimizes int_{B_r} |grad w|^2 over radial w with w(r) = b and
/// int_{B_r} e^{2w} = a. The profile is piecewise linear on grid_n intervals;
/// both integrals are exact for that space (Gauss-Legendre on each interval
/// for the exponential), so the discrete minimum bounds the continuum infimum
/// from above.
DiskResult disk_min_dirichlet(double a, double b, double r, int grid_n);

/// 4 pi (ln t + 1/t - 1), t = a e^{-2b} / (pi r^2).
double disk_dirichlet_lower_bound(double a, double b, double r);

}  // namespace liouville
