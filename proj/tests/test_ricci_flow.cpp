#include <doctest.h>

#include <cmath>

#include "liouville/conformal_energy.hpp"
#include "liouville/ricci_flow.hpp"
#include "liouville/rng.hpp"
#include "oracles.hpp"

using namespace liouville;

namespace {

double volume(const DiscreteOperators& ops, const ScalarField& u) {
  return (u.array().exp() * ops.mass.array()).sum();
}

}  // namespace

TEST_CASE("the round metric is stationary") {
  const auto ops = assemble_operators(build_icosphere(4));
  const ScalarField zero = ScalarField::Zero(ops.size());
  CHECK(semi_implicit_step(ops, zero, 0.5).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(normalize_volume(ops, ScalarField::Constant(ops.size(), 3.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a single step preserves volume and decreases the Liouville energy") {
  const auto mesh = build_icosphere(4);
  const auto ops = assemble_operators(mesh);
  const BandBasis basis(mesh, 3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ScalarField u = normalize_volume(ops, basis.sample(s, 0.8));
    const double e0 = liouville_energy(ops, u).total;
    for (double dt : {0.01, 0.5}) {
      const ScalarField next = semi_implicit_step(ops, u, dt);
      CHECK(std::abs(volume(ops, next) - 4.0 * oracle::pi) < 1e-9);
      CHECK(liouville_energy(ops, next).total < e0);
    }
    const auto step = flow_step(ops, u, 0.1);
    CHECK(step.rejections == 0);
    CHECK(step.dt == 0.1);
    CHECK(step.energy == doctest::Approx(liouville_energy(ops, step.u).total).epsilon(1e-14));
  }
}

TEST_CASE("flow from amplitude 0.3 data approaches constant curvature") {
  const auto mesh = build_icosphere(4);
  const auto ops = assemble_operators(mesh);
  const ScalarField u0 = BandBasis(mesh, 2).sample(derive_seed(1, streams::initial, 0), 0.3);
  // The deviation settles on a mesh floor (about 9e-4 at this level, shrinking
  // fourfold per refinement), so run past the transient.
  const auto trace = run_flow(ops, u0, 20.0, 0.01);
  REQUIRE(trace.times.size() >= 2);
  CHECK(trace.times.front() == 0.0);
  CHECK(trace.step_sizes.front() == 0.0);
  CHECK(trace.times.back() == doctest::Approx(20.0).epsilon(1e-14));
  for (std::size_t i = 1; i < trace.times.size(); ++i) {
    CHECK(trace.energies[i] <= trace.energies[i - 1] + 1e-12 * std::max(1.0, std::abs(trace.energies[i - 1])));
    CHECK(std::abs(trace.volumes[i] - trace.volumes[i - 1]) < 1e-9);
    CHECK(trace.times[i] > trace.times[i - 1]);
  }
  CHECK(trace.curvature_deviation.back() < 1e-3);
  CHECK(trace.curvature_deviation.back() < trace.curvature_deviation.front());
  const ScalarField r = conformal_curvature(ops, trace.final_field);
  CHECK((r.array() - 2.0).abs().maxCoeff() == doctest::Approx(trace.curvature_deviation.back()));
}

TEST_CASE("zero energy tolerance at equilibrium exhausts dt and reports the partial trace") {
  const auto ops = assemble_operators(build_icosphere(3));
  FlowConfig cfg;
  cfg.energy_tolerance = 0.0;
  try {
    run_flow(ops, ScalarField::Zero(ops.size()), 1.0, 0.1, cfg);
    FAIL("expected StiffnessError");
  } catch (const StiffnessError& e) {
    CHECK(e.kind() == ErrorKind::Stiffness);
    CHECK_FALSE(e.partial().times.empty());
    CHECK(e.partial().final_field.size() == ops.size());
    CHECK(e.partial().rejected_steps > 0);
  }
}

TEST_CASE("flow parameters are validated") {
  const auto ops = assemble_operators(build_icosphere(2));
  const ScalarField u = ScalarField::Zero(ops.size());
  CHECK_THROWS_AS(run_flow(ops, u, -1.0, 0.1), ParameterError);
  CHECK_THROWS_AS(run_flow(ops, u, 1.0, 0.0), ParameterError);
  FlowConfig bad;
  bad.dt_min = 1.0;
  bad.dt_max = 0.5;
  CHECK_THROWS_AS(run_flow(ops, u, 1.0, 0.1, bad), ParameterError);
  CHECK_THROWS_AS(semi_implicit_step(ops, u, -0.1), ParameterError);
  CHECK_THROWS_AS(run_flow(ops, ScalarField::Zero(4), 1.0, 0.1), DataError);
}
