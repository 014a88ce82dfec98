#include "liouville/ricci_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "liouville/conformal_energy.hpp"

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

double volume(const DiscreteOperators& ops, const ScalarField& u) {
  return std::exp(log_integral_exp(ops, u));
}

double curvature_deviation(const DiscreteOperators& ops, const ScalarField& u) {
  return (conformal_curvature(ops, u).array() - 2.0).abs().maxCoeff();
}

void append(FlowTrace& trace, const DiscreteOperators& ops, const ScalarField& u, double t, double dt,
            double energy) {
  trace.times.push_back(t);
  trace.energies.push_back(energy);
  trace.volumes.push_back(volume(ops, u));
  trace.curvature_deviation.push_back(curvature_deviation(ops, u));
  trace.step_sizes.push_back(dt);
}

FlowStep accept_step(const DiscreteOperators& ops, const ScalarField& u, double energy, double dt,
                     const FlowConfig& cfg) {
  FlowStep out;
  while (dt >= cfg.dt_min) {
    ScalarField next = semi_implicit_step(ops, u, dt);
    const double e = liouville_energy(ops, next).total;
    if (std::isfinite(e) && e <= energy + cfg.energy_tolerance * std::max(1.0, std::abs(energy))) {
      out.u = std::move(next);
      out.dt = dt;
      out.energy = e;
      return out;
    }
    dt *= 0.5;
    ++out.rejections;
  }
  out.dt = dt;
  return out;
}

}  // namespace

void FlowConfig::validate(const char* where) const {
  if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw ParameterError(where, "need 0 < dt_min <= dt_max");
  if (!(growth >= 1.0)) throw ParameterError(where, "growth must be >= 1");
  if (!(energy_tolerance >= 0.0)) throw ParameterError(where, "energy_tolerance must be >= 0");
}

ScalarField normalize_volume(const DiscreteOperators& ops, const ScalarField& u) {
  return u.array() + (std::log(4.0 * kPi) - log_integral_exp(ops, u));
}

ScalarField semi_implicit_step(const DiscreteOperators& ops, const ScalarField& u, double dt) {
  const char* where = "ricci_flow::flow_step";
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError(where, "dt must be positive");
  check_field(ops, u, where);
  const Eigen::VectorXd weight = u.array().exp().matrix().cwiseProduct(ops.mass);

  SparseMatrix system = ops.stiffness;
  for (int i = 0; i < ops.size(); ++i) system.coeffRef(i, i) += weight[i] / dt;
  Eigen::SimplicialLDLT<SparseMatrix> factor(system);
  if (factor.info() != Eigen::Success) throw NumericError(where, "factorization failed");

  const Eigen::VectorXd rhs =
      weight.cwiseProduct(u) / dt + 2.0 * weight - 2.0 * ops.curvature.cwiseProduct(ops.mass);
  const ScalarField next = factor.solve(rhs);
  if (factor.info() != Eigen::Success || !next.allFinite()) throw NumericError(where, "solve failed");
  return normalize_volume(ops, next);
}

FlowStep flow_step(const DiscreteOperators& ops, const ScalarField& u, double dt, const FlowConfig& cfg) {
  const char* where = "ricci_flow::flow_step";
  cfg.validate(where);
  const FlowStep step = accept_step(ops, u, liouville_energy(ops, u).total, dt, cfg);
  if (step.u.size() == 0) {
    FlowTrace partial;
    partial.final_field = u;
    throw StiffnessError(where, "step size fell below dt_min", std::move(partial));
  }
  return step;
}

FlowTrace run_flow(const DiscreteOperators& ops, const ScalarField& u0, double t_end, double dt0,
                   const FlowConfig& cfg) {
  const char* where = "ricci_flow::run_flow";
  cfg.validate(where);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError(where, "t_end must be positive");
  if (!(dt0 > 0.0)) throw ParameterError(where, "dt0 must be positive");
  check_field(ops, u0, where);

  FlowTrace trace;
  ScalarField u = normalize_volume(ops, u0);
  double energy = liouville_energy(ops, u).total;
  double t = 0.0;
  append(trace, ops, u, t, 0.0, energy);

  double dt = std::min(dt0, cfg.dt_max);
  while (t < t_end) {
    const bool last = t + dt >= t_end;
    const double attempt = last ? t_end - t : dt;
    FlowStep step = accept_step(ops, u, energy, attempt, cfg);
    trace.rejected_steps += step.rejections;
    if (step.u.size() == 0) {
      trace.final_field = u;
      throw StiffnessError(where, "step size fell below dt_min at t = " + std::to_string(t), std::move(trace));
    }
    u = std::move(step.u);
    energy = step.energy;
    t = (last && step.rejections == 0) ? t_end : t + step.dt;
    append(trace, ops, u, t, step.dt, energy);
    dt = std::min(cfg.dt_max, step.dt * (step.rejections == 0 ? cfg.growth : 1.0));
  }
  trace.final_field = u;
  return trace;
}

}  // namespace liouville
