// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "liouville/conformal_energy.hpp"
#include "liouville/green_bubble.hpp"
#include "liouville/inequality_lab.hpp"
#include "liouville/ricci_flow.hpp"
#include "liouville/rng.hpp"
#include "liouville/variational_solver.hpp"
#include "oracles.hpp"

using namespace liouville;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome criterion1() {
  Outcome o;
  const auto mesh = build_icosphere(5);
  const auto ops = assemble_operators(mesh);
  const ScalarField start = BandBasis(mesh, 3).sample(derive_seed(1, streams::initial, 1), 1.0);
  for (double eps : {0.5, 0.25, 0.1}) {
    const auto t0 = Clock::now();
    SolverConfig cfg;
    cfg.eps = eps;
    const auto r = minimize_perturbed(ops, cfg, start);
    const double target = oracle::round_minimum(eps);
    const double rel = std::abs(r.energy - target) / std::abs(target);
    const double spread = r.u_min.maxCoeff() - r.u_min.minCoeff();
    const double t = seconds_since(t0);
    o.require(rel < 1e-2 && spread < 1e-3 && t < 120.0,
              "eps=" + fmt("%g", eps) + " E=" + fmt("%.5f", r.energy) + " rel=" + fmt("%.1e", rel) +
                  " spread=" + fmt("%.1e", spread) + " t=" + fmt("%.1fs", t));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto one = bubble_checks(1.0, 1001);
  o.require(one.pde_residual_max < 1e-10, "pde_residual=" + fmt("%.1e", one.pde_residual_max));
  o.require(std::abs(one.dirichlet_integral - oracle::bubble_dirichlet(1.0)) < 1e-6,
            "dirichlet(B_1)=" + fmt("%.10f", one.dirichlet_integral));
  o.require(std::abs(one.dirichlet_integral - 33.302) < 1e-3, "vs 33.302");
  double mass_err = 0.0;
  for (double R : {0.5, 1.0, 2.0, 10.0, 100.0}) {
    mass_err = std::max(mass_err, std::abs(bubble_checks(R, 101).mass_integral - oracle::bubble_mass(R)));
  }
  o.require(mass_err < 1e-8, "mass_err=" + fmt("%.1e", mass_err));
  const double t = seconds_since(t0);
  o.require(t < 10.0, "t=" + fmt("%.2fs", t));
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto mesh = build_icosphere(6);
  const auto ops = assemble_operators(mesh);
  auto g = solve_green(ops, 0);
  const auto nb = vertex_neighbors(mesh);
  std::vector<char> ring(ops.size(), 0);
  ring[0] = 1;
  for (int k = 0; k < 2; ++k) {
    auto next = ring;
    for (int i = 0; i < ops.size(); ++i)
      if (ring[i])
        for (int j : nb[i]) next[j] = 1;
    ring = next;
  }
  double worst = 0.0;
  for (int i = 0; i < ops.size(); ++i) {
    if (ring[i]) continue;
    worst = std::max(worst, std::abs(g.field[i] - oracle::round_green(oracle::arc(mesh.vertices[0], mesh.vertices[i]))));
  }
  o.require(worst < 0.05, "max_err=" + fmt("%.4f", worst));
  const double a = extract_A(g, ops);
  o.require(std::abs(a - 0.7726) < 0.05, "A=" + fmt("%.4f", a));
  const double pred = lower_bound_predictor(4.0 * std::log(2.0) - 2.0);
  const double exact = -8.0 * oracle::pi * std::log(4.0 * oracle::pi);
  o.require(std::abs(pred - exact) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(exact),
            "predictor_err=" + fmt("%.1e", std::abs(pred - exact)));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const double allowance = 1e-3;
  const auto t0 = Clock::now();
  const auto mesh = build_icosphere(5);
  const auto ops = assemble_operators(mesh);
  const std::uint64_t seed = 2024;
  auto report = [&](const InequalityReport& r) {
    o.require(r.violations(allowance) == 0, r.name + " n=" + std::to_string(r.samples) +
                                                " worst=" + fmt("%.3e", r.worst_margin));
  };
  report(check_onofri(ops, BandBasis(mesh, 3), 1000, seed));
  report(check_local_mt(1.0, 1000, seed));
  const auto global = check_global_mt(ops, BandBasis(mesh, 3), 0.1, 1000, seed);
  report(global);
  o.require(global.empirical_constant < std::log(4.0 * oracle::pi) + allowance,
            "sup F=" + fmt("%.5f", global.empirical_constant));
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const auto gap = thm21_gap(t * oracle::pi, 0.0, 1.0, 512);
    const bool ok = gap.worst_margin >= -allowance && (t != 1.0 || std::abs(gap.worst_margin) < 1e-8);
    o.require(ok, "gap(t=" + fmt("%g", t) + ")=" + fmt("%.2e", gap.worst_margin));
  }
  report(brezis_merle_check(1.0, 2.0 * oracle::pi, 1000, seed));
  const double t = seconds_since(t0);
  o.require(t < 600.0, "t=" + fmt("%.1fs", t));
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto rep = poincare_constant(assemble_operators(build_icosphere(5)), 2.0);
  o.require(std::abs(rep.empirical_constant - 0.5) < 0.02 * 0.5, "c_2=" + fmt("%.5f", rep.empirical_constant));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto mesh = build_icosphere(5);
  const auto ops = assemble_operators(mesh);
  const ScalarField u0 = BandBasis(mesh, 2).sample(derive_seed(1, streams::initial, 0), 0.3);
  const auto tr = run_flow(ops, u0, 10.0, 0.01);
  bool monotone = true;
  double drift = 0.0;
  for (std::size_t i = 1; i < tr.times.size(); ++i) {
    monotone = monotone && tr.energies[i] <= tr.energies[i - 1];
    drift = std::max(drift, std::abs(tr.volumes[i] - tr.volumes[i - 1]));
  }
  o.require(monotone, "energy monotone over " + std::to_string(tr.times.size() - 1) + " steps");
  o.require(drift < 1e-9, "volume_drift=" + fmt("%.1e", drift));
  o.require(tr.curvature_deviation.back() < 1e-3, "max|R-2|=" + fmt("%.2e", tr.curvature_deviation.back()));
  const double t = seconds_since(t0);
  o.require(t < 120.0, "t=" + fmt("%.1fs", t));
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::vector<double> eps{0.5, 0.25, 0.1};
  std::vector<std::vector<double>> energies;
  for (int level : {5, 6}) {
    const auto round = build_icosphere(level);
    const auto ops =
        assemble_operators(set_conformal_background(round, BandBasis(round, 2).sample(7, 0.3), true));
    std::vector<double> e;
    for (const auto& r : sweep_eps(ops, SolverConfig{}, eps, true)) e.push_back(r.energy);
    bool finite = true, monotone = true;
    for (std::size_t i = 0; i < e.size(); ++i) {
      finite = finite && std::isfinite(e[i]);
      if (i > 0) monotone = monotone && e[i] <= e[i - 1];
    }
    o.require(finite && monotone, "L" + std::to_string(level) + " E=" + fmt("%.5f", e[0]) + "," +
                                      fmt("%.5f", e[1]) + "," + fmt("%.5f", e[2]));
    energies.push_back(e);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    worst = std::max(worst, std::abs(energies[1][i] - energies[0][i]) / std::abs(energies[1][i]));
  }
  o.require(worst < 5e-3, "level_change=" + fmt("%.2e", worst));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto round = build_icosphere(5);
  const BandBasis basis(round, 3);
  const auto mesh = set_conformal_background(round, BandBasis(round, 2).sample(7, 0.3), true);
  const auto ops = assemble_operators(mesh);
  const double gb = integrate(ops, ops.curvature);
  o.require(std::abs(gb - 4.0 * oracle::pi) < 1e-9, "gauss_bonnet_err=" + fmt("%.1e", std::abs(gb - 4.0 * oracle::pi)));

  const auto round_ops = assemble_operators(round);
  const auto other_ops = assemble_operators(set_conformal_background(round, basis.sample(3, 1.5), false));
  double conformal = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ScalarField u = basis.sample(100 + s, 1.0);
    const double d0 = dirichlet_energy(round_ops, u);
    conformal = std::max({conformal, std::abs(dirichlet_energy(ops, u) - d0), std::abs(dirichlet_energy(other_ops, u) - d0)});
  }
  o.require(conformal < 1e-10, "conformal_invariance_err=" + fmt("%.1e", conformal));

  const ScalarField u = basis.sample(5, 1.0);
  const double base = perturbed_functional(ops, u, 0.5).total;
  double shift = 0.0;
  for (double c : {-20.0, -1.0, 3.0, 20.0}) {
    shift = std::max(shift, std::abs(perturbed_functional(ops, (u.array() + c).matrix(), 0.5).total - base));
  }
  o.require(shift < 1e-9, "shift_err=" + fmt("%.1e", shift));

  const Eigen::VectorXd d = perturbed_differential(ops, u, 0.5);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  double fd_err = 0.0;
  const double h = 1e-6;
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd dir(ops.size());
    for (auto& x : dir) x = normal(rng);
    dir.normalize();
    const double fd = (perturbed_functional(ops, u + h * dir, 0.5).total - perturbed_functional(ops, u - h * dir, 0.5).total) / (2.0 * h);
    fd_err = std::max(fd_err, std::abs(fd - d.dot(dir)) / std::max(std::abs(d.dot(dir)), d.norm()));
  }
  o.require(fd_err < 1e-5, "gradient_fd_rel=" + fmt("%.1e", fd_err));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s (%.1fs) %s\n", i + 1, o.pass ? "PASS" : "FAIL", seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
