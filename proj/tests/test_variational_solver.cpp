#include <doctest.h>

#include <cmath>

#include "liouville/conformal_energy.hpp"
#include "liouville/variational_solver.hpp"
#include "oracles.hpp"

using namespace liouville;

namespace {

ScalarField coordinate(const TriangulatedSphere& mesh, int axis) {
  ScalarField f(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) f[i] = mesh.vertices[i][axis];
  return f;
}

double spread(const ScalarField& u) { return u.maxCoeff() - u.minCoeff(); }

}  // namespace

TEST_CASE("round sphere minimum is the constant field") {
  const auto mesh = build_icosphere(4);
  const auto ops = assemble_operators(mesh);
  for (double eps : {0.5, 0.1}) {
    SolverConfig cfg;
    cfg.eps = eps;
    const ScalarField start = 0.5 * coordinate(mesh, 2) + 0.3 * coordinate(mesh, 0).cwiseProduct(coordinate(mesh, 1));
    const auto res = minimize_perturbed(ops, cfg, start);
    CHECK(res.converged);
    CHECK(res.energy == doctest::Approx(oracle::round_minimum(eps)).epsilon(1e-2));
    CHECK(spread(res.u_min) < 1e-3);
    CHECK(res.el_residual < 1e-8);
    CHECK(std::abs(integrate(ops, res.v_field.array().exp().matrix()) - 1.0) < 1e-10);
    CHECK(std::abs(integrate(ops, ops.curvature.cwiseProduct(res.u_min))) < 1e-10);
    CHECK_FALSE(res.iterations.empty());
  }
}

TEST_CASE("recorded energies never increase") {
  const auto mesh = build_icosphere(3);
  const auto round = build_icosphere(3);
  const auto ops = assemble_operators(set_conformal_background(mesh, BandBasis(round, 2).sample(7, 0.3), true));
  SolverConfig cfg;
  cfg.eps = 0.25;
  const auto res = minimize_perturbed(ops, cfg, BandBasis(round, 3).sample(2, 1.0));
  for (std::size_t i = 1; i < res.iterations.size(); ++i) {
    CHECK(res.iterations[i].energy <= res.iterations[i - 1].energy + 1e-12 * std::abs(res.iterations[i - 1].energy));
  }
  CHECK(res.el_residual < 1e-8);
  const double at_min = res.energy;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ScalarField trial = res.u_min + 0.1 * BandBasis(round, 2).sample(100 + s, 1.0);
    CHECK(perturbed_functional(ops, trial, 0.25).total >= at_min - 1e-9);
  }
}

TEST_CASE("project_constraint lands on the constraint set and is idempotent") {
  const auto round = build_icosphere(3);
  const auto ops = assemble_operators(set_conformal_background(round, BandBasis(round, 2).sample(4, 0.5), true));
  const ScalarField u = coordinate(round, 0).array().exp() + 2.0;
  const ScalarField p = project_constraint(ops, u);
  CHECK(std::abs(integrate(ops, ops.curvature.cwiseProduct(p))) < 1e-12);
  CHECK((project_constraint(ops, p) - p).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(spread(p - u) < 1e-14);
}

TEST_CASE("mean-field Newton solves the constant case on the round sphere") {
  const auto ops = assemble_operators(build_icosphere(4));
  const double eps = 0.5;
  const auto res = solve_mean_field(ops, eps, ScalarField::Constant(ops.size(), 1.0));
  // (8pi - eps)/(4pi) = (8pi - eps) e^v gives e^v = 1/(4pi).
  CHECK((res.v_field.array() + std::log(4.0 * oracle::pi)).abs().maxCoeff() < 1e-8);
  CHECK(mean_field_residual(ops, res.v_field, eps) < 1e-10);
  CHECK(std::abs(integrate(ops, res.v_field.array().exp().matrix()) - 1.0) < 1e-10);
}

TEST_CASE("sweep with warm start keeps energies ordered on a bumpy metric") {
  const auto round = build_icosphere(3);
  const auto ops = assemble_operators(set_conformal_background(round, BandBasis(round, 2).sample(7, 0.3), true));
  SolverConfig cfg;
  const auto results = sweep_eps(ops, cfg, {0.5, 0.25, 0.1}, true);
  REQUIRE(results.size() == 3);
  for (const auto& r : results) CHECK(std::isfinite(r.energy));
  // E_eps is nonincreasing as eps decreases: I_eps is affine in eps with slope
  // ln int e^u - (1/4pi) int K u >= 0 by Jensen at any u with int K u = 0.
  CHECK(results[1].energy <= results[0].energy + 1e-9);
  CHECK(results[2].energy <= results[1].energy + 1e-9);
}

TEST_CASE("solver parameters are validated") {
  const auto ops = assemble_operators(build_icosphere(2));
  SolverConfig cfg;
  cfg.eps = -1.0;
  CHECK_THROWS_AS(minimize_perturbed(ops, cfg, ScalarField::Zero(ops.size())), ParameterError);
  cfg.eps = 0.5;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(minimize_perturbed(ops, cfg, ScalarField::Zero(ops.size())), ParameterError);
  cfg.max_iterations = 10;
  CHECK_THROWS_AS(minimize_perturbed(ops, cfg, ScalarField::Zero(3)), DataError);
}

TEST_CASE("iteration cap raises ConvergenceError carrying the best iterate") {
  const auto mesh = build_icosphere(3);
  const auto ops = assemble_operators(mesh);
  SolverConfig cfg;
  cfg.max_iterations = 2;
  cfg.newton_polish = false;
  cfg.gradient_tolerance = 1e-14;
  const ScalarField start = 2.0 * coordinate(mesh, 2);
  try {
    minimize_perturbed(ops, cfg, start);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::Convergence);
    CHECK(e.best().energy < perturbed_functional(ops, project_constraint(ops, start), cfg.eps).total);
  }
}

TEST_CASE("disk minimum: equality at t = 1 and the lower bound elsewhere") {
  const auto eq = disk_min_dirichlet(oracle::pi, 0.0, 1.0, 256);
  CHECK(std::abs(eq.value) < 1e-8);
  CHECK(std::abs(disk_dirichlet_lower_bound(oracle::pi, 0.0, 1.0)) < 1e-15);
  for (double a : {0.5 * oracle::pi, 2.0 * oracle::pi, 4.0 * oracle::pi}) {
    const auto res = disk_min_dirichlet(a, 0.0, 1.0, 512);
    const double bound = disk_dirichlet_lower_bound(a, 0.0, 1.0);
    CHECK(res.value >= bound - 1e-10);
    CHECK(res.value - bound < 1e-2 * std::max(1.0, bound));
    CHECK(res.profile.back() == doctest::Approx(0.0).epsilon(1e-12));
  }
  const double t = 2.0;
  CHECK(disk_dirichlet_lower_bound(2.0 * oracle::pi, 0.0, 1.0) ==
        doctest::Approx(4.0 * oracle::pi * (std::log(t) + 1.0 / t - 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(disk_min_dirichlet(-1.0, 0.0, 1.0, 64), ParameterError);
  CHECK_THROWS_AS(disk_min_dirichlet(1.0, 0.0, 0.0, 64), ParameterError);
}
