#pragma once

#include <vector>

#include "liouville/errors.hpp"
#include "liouville/sphere_mesh.hpp"

namespace liouville {

struct FlowTrace {
  std::vector<double> times;
  std::vector<double> energies;  // Liouville energy
  std::vector<double> volumes;
  std::vector<double> curvature_deviation;  // max |R - 2|
  std::vector<double> step_sizes;           // 0 for the initial record
  ScalarField final_field;
  int rejected_steps = 0;
};

class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& where, const std::string& what, FlowTrace partial)
      : Error(ErrorKind::Stiffness, where, what), partial_(std::move(partial)) {}
  const FlowTrace& partial() const noexcept { return partial_; }

 private:
  FlowTrace partial_;
};

struct FlowConfig {
  double dt_min = 1e-8;
  double dt_max = 2.0;
  double growth = 1.5;
  /// Relative energy increase tolerated before a step is rejected.
  double energy_tolerance = 1e-12;

  void validate(const char* where) const;
};

/// u + ln(4 pi) - ln int e^u, so that the metric e^u g has volume 4 pi.
ScalarField normalize_volume(const DiscreteOperators& ops, const ScalarField& u);

/// One step of du/dt = 2 - R_{e^u g}: implicit in the Laplacian, explicit in
/// the weight e^u, followed by volume renormalization. No acceptance test.
ScalarField semi_implicit_step(const DiscreteOperators& ops, const ScalarField& u, double dt);

struct FlowStep {
  ScalarField u;
  double dt = 0.0;  // step actually taken
  double energy = 0.0;
  int rejections = 0;
};

/// Semi-implicit step with energy-based acceptance: halves dt while the
/// Liouville energy increases; throws StiffnessError below cfg.dt_min.
FlowStep flow_step(const DiscreteOperators& ops, const ScalarField& u, double dt, const FlowConfig& cfg = {});

/// Integrates the normalized flow to t_end, growing dt after accepted steps.
/// Records every accepted step. StiffnessError carries the partial trace.
FlowTrace run_flow(const DiscreteOperators& ops, const ScalarField& u0, double t_end, double dt0,
                   const FlowConfig& cfg = {});

}  // namespace liouville
