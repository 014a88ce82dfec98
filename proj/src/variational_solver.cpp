#include "liouville/variational_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss.hpp>

#include "liouville/conformal_energy.hpp"

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

double curvature_weight(double eps) { return (8.0 * kPi - eps) / (4.0 * kPi); }

// -Delta v + c1 K - c2 e^v, as a covector (multiplied by the mass weights).
Eigen::VectorXd mean_field_defect(const DiscreteOperators& ops, const ScalarField& v, double eps) {
  Eigen::VectorXd f = ops.stiffness * v;
  f.array() += ops.mass.array() * (curvature_weight(eps) * ops.curvature.array() -
                                   (8.0 * kPi - eps) * v.array().exp());
  return f;
}

double dual_norm(const DiscreteOperators& ops, const Eigen::VectorXd& covector) {
  return std::sqrt(covector.cwiseAbs2().cwiseQuotient(ops.mass).sum());
}

double residual_scale(const DiscreteOperators& ops, double eps) {
  return curvature_weight(eps) * mass_norm(ops, ops.curvature);
}

// Jacobian S - (8pi - eps) diag(e^v M) of the mean-field operator. The same
// matrix gives the Newton direction of I_eps at u = v + const, since the
// rank-one part of the Hessian only moves the solution along constants.
class MeanFieldJacobian {
 public:
  explicit MeanFieldJacobian(const DiscreteOperators& ops) : ops_(ops), jacobian_(ops.stiffness) {
    diagonal_.resize(ops.size());
    for (int i = 0; i < ops.size(); ++i) diagonal_[i] = &jacobian_.coeffRef(i, i);
    lu_.analyzePattern(jacobian_);
  }

  bool factor(const ScalarField& v, double eps) {
    const double c2 = 8.0 * kPi - eps;
    for (int i = 0; i < ops_.size(); ++i) {
      *diagonal_[i] = ops_.stiffness.coeff(i, i) - c2 * std::exp(v[i]) * ops_.mass[i];
    }
    lu_.factorize(jacobian_);
    return lu_.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) { return lu_.solve(rhs); }

 private:
  const DiscreteOperators& ops_;
  SparseMatrix jacobian_;
  std::vector<double*> diagonal_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

void fill_fields(const DiscreteOperators& ops, double eps, const ScalarField& u, MinimizerResult& out) {
  out.eps = eps;
  out.u_min = project_constraint(ops, u);
  out.v_field = out.u_min.array() - log_integral_exp(ops, out.u_min);
  out.energy = perturbed_functional(ops, out.u_min, eps).total;
  out.el_residual = dual_norm(ops, mean_field_defect(ops, out.v_field, eps)) / residual_scale(ops, eps);
  out.peak_vertex = 0;
  for (int i = 1; i < out.v_field.size(); ++i) {
    if (out.v_field[i] > out.v_field[out.peak_vertex]) out.peak_vertex = i;
  }
  out.peak_value = out.v_field[out.peak_vertex];
}

}  // namespace

void SolverConfig::validate(const char* where) const {
  check_eps(eps, where);
  if (max_iterations < 1) throw ParameterError(where, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw ParameterError(where, "gradient_tolerance must be > 0");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0) ||
      !(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw ParameterError(where, "invalid line-search parameters");
  }
}

ScalarField project_constraint(const DiscreteOperators& ops, const ScalarField& u) {
  check_field(ops, u, "variational_solver::project_constraint");
  const Eigen::VectorXd k = ops.curvature.cwiseProduct(ops.mass);
  return u.array() - k.dot(u) / k.sum();
}

double mean_field_residual(const DiscreteOperators& ops, const ScalarField& u, double eps) {
  check_eps(eps, "variational_solver::mean_field_residual");
  const ScalarField v = u.array() - log_integral_exp(ops, u);
  return dual_norm(ops, mean_field_defect(ops, v, eps)) / residual_scale(ops, eps);
}

MinimizerResult minimize_perturbed(const DiscreteOperators& ops, const SolverConfig& cfg,
                                   const ScalarField& initial) {
  const char* where = "variational_solver::minimize_perturbed";
  cfg.validate(where);
  check_field(ops, initial, where);
  const double eps = cfg.eps;
  const double scale = residual_scale(ops, eps);

  SparseMatrix h1 = ops.stiffness;
  for (int i = 0; i < ops.size(); ++i) h1.coeffRef(i, i) += ops.mass[i];
  Eigen::SimplicialLDLT<SparseMatrix> preconditioner(h1);
  if (preconditioner.info() != Eigen::Success) throw NumericError(where, "H1 factorization failed");
  MeanFieldJacobian jacobian(ops);

  ScalarField u = project_constraint(ops, initial);
  double energy = perturbed_functional(ops, u, eps).total;
  Eigen::VectorXd grad = perturbed_differential(ops, u, eps);
  double grad_norm = dual_norm(ops, grad);

  MinimizerResult result;
  result.iterations.push_back({0, energy, grad_norm, grad_norm / scale});

  const auto& ls = cfg.line_search;
  bool newton_phase = false;
  for (int it = 1; it <= cfg.max_iterations + 1; ++it) {
    const double tol = cfg.gradient_tolerance * std::max(1.0, std::abs(energy));
    if (grad_norm < tol) {
      result.converged = true;
      break;
    }
    if (it > cfg.max_iterations) break;

    newton_phase = newton_phase || (cfg.newton_polish && (it > cfg.gradient_phase_cap ||
                                                          grad_norm < cfg.newton_switch * tol /
                                                                          cfg.gradient_tolerance));
    Eigen::VectorXd dir;
    double slope = 0.0;
    if (newton_phase) {
      const ScalarField v = u.array() - log_integral_exp(ops, u);
      if (jacobian.factor(v, eps)) {
        dir = project_constraint(ops, -jacobian.solve(grad));
        slope = grad.dot(dir);
      }
      if (!(slope < -1e-14 * grad.norm() * dir.norm())) dir.resize(0);
    }
    if (dir.size() == 0) {
      dir = project_constraint(ops, -preconditioner.solve(grad));
      slope = grad.dot(dir);
    }

    double step = 1.0;
    ScalarField trial;
    double trial_energy = 0.0;
    bool accepted = false;
    while (step >= ls.min_step) {
      trial = u + step * dir;
      trial_energy = perturbed_functional(ops, trial, eps).total;
      if (trial_energy <= energy + ls.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
      step *= ls.shrink;
    }
    if (!accepted) {
      // Decrease below rounding of the energy: accept convergence only if the
      // gradient is within a small factor of the tolerance.
      if (grad_norm < 100.0 * tol) {
        result.converged = true;
        break;
      }
      fill_fields(ops, eps, u, result);
      throw ConvergenceError(where, "line search failed at iteration " + std::to_string(it) +
                                        " (gradient norm " + std::to_string(grad_norm) + ")",
                             result);
    }
    u = project_constraint(ops, trial);
    energy = trial_energy;
    grad = perturbed_differential(ops, u, eps);
    grad_norm = dual_norm(ops, grad);
    result.iterations.push_back({it, energy, grad_norm, grad_norm / scale});
  }

  fill_fields(ops, eps, u, result);
  if (!result.converged) {
    throw ConvergenceError(where,
                           "iteration cap " + std::to_string(cfg.max_iterations) +
                               " reached (gradient norm " + std::to_string(grad_norm) + ")",
                           result);
  }
  if (cfg.newton_polish) {
    try {
      MinimizerResult polished = solve_mean_field(ops, eps, result.v_field);
      if (polished.el_residual < result.el_residual &&
          polished.energy <= result.energy + 1e-12 * std::max(1.0, std::abs(result.energy))) {
        polished.iterations = std::move(result.iterations);
        polished.converged = true;
        polished.polished = true;
        result = std::move(polished);
      }
    } catch (const NumericError&) {
      // keep the descent iterate
    }
  }
  return result;
}

std::vector<MinimizerResult> sweep_eps(const DiscreteOperators& ops, const SolverConfig& base,
                                       const std::vector<double>& eps_list, bool warm_start) {
  std::vector<MinimizerResult> out;
  out.reserve(eps_list.size());
  const ScalarField zero = ScalarField::Zero(ops.size());
  for (double eps : eps_list) {
    SolverConfig cfg = base;
    cfg.eps = eps;
    MinimizerResult best = minimize_perturbed(ops, cfg, zero);
    if (warm_start && !out.empty()) {
      MinimizerResult warm = minimize_perturbed(ops, cfg, out.back().u_min);
      if (warm.energy < best.energy) best = std::move(warm);
    }
    out.push_back(std::move(best));
  }
  return out;
}

MinimizerResult solve_mean_field(const DiscreteOperators& ops, double eps, const ScalarField& initial,
                                 double tolerance, int max_iterations) {
  const char* where = "variational_solver::solve_mean_field";
  check_eps(eps, where);
  check_field(ops, initial, where);
  const double scale = residual_scale(ops, eps);
  MeanFieldJacobian jacobian(ops);

  MinimizerResult result;
  ScalarField v = initial;
  Eigen::VectorXd defect = mean_field_defect(ops, v, eps);
  double residual = dual_norm(ops, defect) / scale;
  auto record = [&](int step) {
    result.iterations.push_back(
        {step, perturbed_functional(ops, v, eps).total, residual * scale, residual});
  };
  record(0);

  for (int it = 1; residual >= tolerance; ++it) {
    if (it > max_iterations) {
      throw NumericError(where, "no convergence after " + std::to_string(max_iterations) +
                                    " Newton steps (residual " + std::to_string(residual) + ")");
    }
    if (!jacobian.factor(v, eps)) throw NumericError(where, "singular Jacobian");
    const Eigen::VectorXd dir = -jacobian.solve(defect);
    double step = 1.0;
    for (;;) {
      const ScalarField trial = v + step * dir;
      const Eigen::VectorXd trial_defect = mean_field_defect(ops, trial, eps);
      const double trial_residual = dual_norm(ops, trial_defect) / scale;
      if (std::isfinite(trial_residual) && trial_residual < residual) {
        v = trial;
        defect = trial_defect;
        residual = trial_residual;
        break;
      }
      step *= 0.5;
      if (step < 0x1p-30) {
        throw NumericError(where, "Newton damping floor reached at iteration " + std::to_string(it) +
                                      " (residual " + std::to_string(residual) + ")");
      }
    }
    record(it);
  }

  fill_fields(ops, eps, v, result);
  // fill_fields renormalizes v so that int e^v = 1 exactly; a converged root
  // already satisfies it up to the residual.
  result.converged = true;
  return result;
}

double disk_dirichlet_lower_bound(double a, double b, double r) {
  const double t = a * std::exp(-2.0 * b) / (kPi * r * r);
  return 4.0 * kPi * (std::log(t) + 1.0 / t - 1.0);
}

DiskResult disk_min_dirichlet(double a, double b, double r, int grid_n) {
  const char* where = "variational_solver::disk_min_dirichlet";
  if (!(a > 0.0) || !(r > 0.0) || !std::isfinite(b)) {
    throw ParameterError(where, "need a > 0, r > 0 and finite b");
  }
  if (grid_n < 256) throw ParameterError(where, "grid_n must be >= 256");
  const int n = grid_n;
  const double h = r / n;

  // Gauss-Legendre nodes on [0, 1].
  using Rule = boost::math::quadrature::gauss<double, 10>;
  std::vector<double> nodes;
  std::vector<double> weights;
  for (std::size_t q = 0; q < Rule::abscissa().size(); ++q) {
    const double x = Rule::abscissa()[q];
    const double w = Rule::weights()[q];
    nodes.push_back(0.5 * (1.0 - x));
    weights.push_back(0.5 * w);
    if (x != 0.0) {
      nodes.push_back(0.5 * (1.0 + x));
      weights.push_back(0.5 * w);
    }
  }

  // w has n+1 nodes; w[n] = b is fixed.
  struct Constraint {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd hess_diag;
    Eigen::VectorXd hess_off;  // coupling (i, i+1)
  };
  auto constraint = [&](const Eigen::VectorXd& w) {
    Constraint c;
    c.grad = Eigen::VectorXd::Zero(n + 1);
    c.hess_diag = Eigen::VectorXd::Zero(n + 1);
    c.hess_off = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double s = nodes[q];
        const double rho = (i + s) * h;
        const double val = 2.0 * kPi * weights[q] * h * rho * std::exp(2.0 * ((1.0 - s) * w[i] + s * w[i + 1]));
        c.value += val;
        c.grad[i] += 2.0 * (1.0 - s) * val;
        c.grad[i + 1] += 2.0 * s * val;
        c.hess_diag[i] += 4.0 * (1.0 - s) * (1.0 - s) * val;
        c.hess_diag[i + 1] += 4.0 * s * s * val;
        c.hess_off[i] += 4.0 * s * (1.0 - s) * val;
      }
    }
    return c;
  };
  // Dirichlet form: 2 pi sum (w_{i+1} - w_i)^2 rho_{i+1/2} / h.
  Eigen::VectorXd edge_weight(n);
  for (int i = 0; i < n; ++i) edge_weight[i] = 2.0 * kPi * (i + 0.5) * h / h;
  auto dirichlet = [&](const Eigen::VectorXd& w) {
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += edge_weight[i] * (w[i + 1] - w[i]) * (w[i + 1] - w[i]);
    return d;
  };
  auto dirichlet_grad = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) {
      const double f = 2.0 * edge_weight[i] * (w[i + 1] - w[i]);
      g[i] -= f;
      g[i + 1] += f;
    }
    return g;
  };

  // Feasible start: w = b + alpha (1 - rho^2 / r^2), alpha by bisection on the constraint.
  Eigen::VectorXd shape(n + 1);
  for (int i = 0; i <= n; ++i) shape[i] = 1.0 - (i * h / r) * (i * h / r);
  auto start = [&](double alpha) { return Eigen::VectorXd((b + alpha * shape.array()).matrix()); };
  double lo = -1.0;
  double hi = 1.0;
  while (constraint(start(lo)).value > a) lo *= 2.0;
  while (constraint(start(hi)).value < a) hi *= 2.0;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
    const double mid = 0.5 * (lo + hi);
    (constraint(start(mid)).value < a ? lo : hi) = mid;
  }
  Eigen::VectorXd w = start(0.5 * (lo + hi));

  Constraint c = constraint(w);
  Eigen::VectorXd gd = dirichlet_grad(w);
  double mu = c.grad.head(n).dot(gd.head(n)) / c.grad.head(n).squaredNorm();

  // KKT residual: stationarity on free nodes, constraint scaled by 1/a.
  auto kkt_residual = [&](const Eigen::VectorXd& ww, double mm, const Constraint& cc) {
    Eigen::VectorXd res(n + 1);
    res.head(n) = (dirichlet_grad(ww) - mm * cc.grad).head(n);
    res[n] = (cc.value - a) / a;
    return res;
  };
  Eigen::VectorXd res = kkt_residual(w, mu, c);
  const double dirichlet_scale = std::max(1.0, edge_weight.sum());

  DiskResult out;
  Eigen::SparseLU<SparseMatrix> lu;
  int it = 0;
  bool done = false;
  for (; it < 200 && !done; ++it) {
    if (res.head(n).norm() < 1e-13 * dirichlet_scale && std::abs(res[n]) < 1e-15) break;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * n);
    for (int i = 0; i < n; ++i) {
      double diag = -mu * c.hess_diag[i];
      diag += 2.0 * edge_weight[i];
      if (i > 0) diag += 2.0 * edge_weight[i - 1];
      trip.emplace_back(i, i, diag);
      if (i + 1 < n) {
        const double off = -2.0 * edge_weight[i] - mu * c.hess_off[i];
        trip.emplace_back(i, i + 1, off);
        trip.emplace_back(i + 1, i, off);
      }
      trip.emplace_back(i, n, -c.grad[i]);
      trip.emplace_back(n, i, c.grad[i] / a);
    }
    SparseMatrix kkt(n + 1, n + 1);
    kkt.setFromTriplets(trip.begin(), trip.end());
    lu.compute(kkt);
    if (lu.info() != Eigen::Success) throw NumericError(where, "singular KKT system");
    const Eigen::VectorXd delta = lu.solve(-res);

    double step = 1.0;
    const double norm0 = res.norm();
    for (;;) {
      Eigen::VectorXd wt = w;
      wt.head(n) += step * delta.head(n);
      const double mt = mu + step * delta[n];
      const Constraint ct = constraint(wt);
      const Eigen::VectorXd rt = kkt_residual(wt, mt, ct);
      if (std::isfinite(rt.norm()) && rt.norm() < norm0) {
        w = wt;
        mu = mt;
        c = ct;
        res = rt;
        break;
      }
      step *= 0.5;
      if (step < 0x1p-30) {
        // Rounding floor: no step reduces an already tiny residual.
        if (norm0 < 1e-10 * dirichlet_scale) {
          done = true;
          break;
        }
        throw NumericError(where, "Newton damping floor reached");
      }
    }
  }
  if (it >= 200) throw NumericError(where, "KKT Newton did not converge");
  out.value = dirichlet(w);
  out.multiplier = mu;
  out.iterations = it;
  out.radii.resize(n + 1);
  out.profile.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    out.radii[i] = i * h;
    out.profile[i] = w[i];
  }
  return out;
}

}  // namespace liouville
