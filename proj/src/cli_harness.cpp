#include "liouville/cli_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "liouville/conformal_energy.hpp"
#include "liouville/green_bubble.hpp"
#include "liouville/inequality_lab.hpp"
#include "liouville/io.hpp"
#include "liouville/ricci_flow.hpp"
#include "liouville/rng.hpp"
#include "liouville/sphere_mesh.hpp"
#include "liouville/variational_solver.hpp"

#ifndef LIOUVILLE_VERSION
#define LIOUVILLE_VERSION "0.0.0"
#endif

namespace liouville::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json energy_json(const EnergyBreakdown& e) {
  return {{"dirichlet", number(e.dirichlet)},
          {"curvature_term", number(e.curvature_term)},
          {"log_volume_term", number(e.log_volume_term)},
          {"total", number(e.total)}};
}

json report_json(const InequalityReport& rep) {
  json params = json::object();
  for (const auto& [k, v] : rep.parameters) params[k] = number(v);
  return {{"name", rep.name},
          {"samples", rep.samples},
          {"worst_margin", number(rep.worst_margin)},
          {"worst_seed", rep.worst_seed},
          {"empirical_constant", number(rep.empirical_constant)},
          {"violations_beyond_1e-3", rep.violations(1e-3)},
          {"parameters", params}};
}

json bubble_json(const BubbleReport& rep) {
  json j = {{"R", rep.R},
            {"dirichlet_integral", number(rep.dirichlet_integral)},
            {"dirichlet_closed_form", number(rep.dirichlet_closed_form)},
            {"dirichlet_asymptotic", number(rep.dirichlet_asymptotic)},
            {"mass_integral", number(rep.mass_integral)},
            {"mass_closed_form", number(rep.mass_closed_form)},
            {"pde_residual_max", number(rep.pde_residual_max)}};
  if (rep.rescaled_profile_error >= 0.0) {
    j["rescaled_profile_error"] = rep.rescaled_profile_error;
    j["tau"] = rep.tau;
    j["peak_vertex"] = rep.peak_vertex;
    j["peak_value"] = rep.peak_value;
    j["samples"] = rep.samples;
  }
  return j;
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

/// Minimal line plot; axis ranges padded by 5%.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<double>& xs, const std::vector<double>& ys) {
  constexpr double w = 640, h = 420, left = 80, right = 20, top = 40, bottom = 60;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (std::isfinite(xs[i]) && std::isfinite(ys[i])) pts.emplace_back(xs[i], ys[i]);
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto sy = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  std::ostringstream s;
  s << std::setprecision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w - left - right << "\" height=\""
    << h - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << svg_escape(title)
    << "</text>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << svg_escape(xlabel) << "</text>\n";
  s << "<text x=\"18\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << h / 2 << ")\">" << svg_escape(ylabel) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << sx(xv) << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << xv << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
      << "</text>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (auto [x, y] : pts) s << sx(x) << ',' << sy(y) << ' ';
  s << "\"/>\n";
  for (auto [x, y] : pts) {
    if (pts.size() <= 60) s << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

struct Background {
  TriangulatedSphere round;
  TriangulatedSphere metric;
  DiscreteOperators ops;
  DiscreteOperators round_ops;
  std::string source;
};

Background make_background(const RunSpec& spec) {
  Background bg;
  if (spec.mesh_file.empty()) {
    bg.round = build_icosphere(spec.level);
    bg.source = "icosphere level " + std::to_string(spec.level);
  } else {
    bg.round = io::read_off(spec.mesh_file);
    bg.source = "file " + spec.mesh_file.filename().string();
  }
  bg.round_ops = assemble_operators(bg.round);
  if (spec.metric_amplitude > 0.0) {
    const ScalarField phi = BandBasis(bg.round, spec.metric_bands).sample(spec.metric_seed, spec.metric_amplitude);
    bg.metric = set_conformal_background(bg.round, phi, true);
    bg.ops = assemble_operators(bg.metric);
  } else {
    bg.metric = bg.round;
    bg.ops = bg.round_ops;
  }
  return bg;
}

class Artifacts {
 public:
  Artifacts(fs::path dir, bool plots) : dir_(std::move(dir)), plots_(plots) { fs::create_directories(dir_); }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  void json_file(const std::string& name, const json& j) { io::write_text(path(name), j.dump(2) + "\n"); }
  void plot(const std::string& name, const std::string& title, const std::string& xl, const std::string& yl,
            const std::vector<double>& xs, const std::vector<double>& ys) {
    if (plots_) io::write_text(path(name), svg_plot(title, xl, yl, xs, ys));
  }
  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  bool plots_;
  std::vector<std::string> names_;
};

SolverConfig solver_config(const RunSpec& spec, double eps) {
  SolverConfig cfg;
  cfg.eps = eps;
  if (spec.tolerance > 0.0) cfg.gradient_tolerance = spec.tolerance;
  if (spec.max_iterations > 0) cfg.max_iterations = spec.max_iterations;
  return cfg;
}

json minimizer_json(const MinimizerResult& r, const DiscreteOperators& ops) {
  return {{"eps", r.eps},
          {"energy", energy_json(perturbed_functional(ops, r.u_min, r.eps))},
          {"el_residual", number(r.el_residual)},
          {"peak_value", number(r.peak_value)},
          {"peak_vertex", r.peak_vertex},
          {"iterations", static_cast<int>(r.iterations.size())},
          {"converged", r.converged},
          {"polished", r.polished}};
}

json run_minimize(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  const double eps = spec.eps.front();
  const MinimizerResult r = minimize_perturbed(bg.ops, solver_config(spec, eps), ScalarField::Zero(bg.ops.size()));
  std::vector<std::vector<double>> rows;
  std::vector<double> steps, energies;
  for (const auto& it : r.iterations) {
    rows.push_back({double(it.step), it.energy, it.grad_norm, it.el_residual});
    steps.push_back(it.step);
    energies.push_back(it.energy);
  }
  io::write_table(art.path("trace.csv"), {"step", "energy", "grad_norm", "el_residual"}, rows);
  io::write_field(art.path("u_min.csv"), r.u_min);
  const json summary = minimizer_json(r, bg.ops);
  art.json_file("energy.json", summary["energy"]);
  art.plot("energy_trace.svg", "I_eps along the descent", "iteration", "energy", steps, energies);
  out << "eps=" << eps << " E=" << io::format_number(r.energy) << " el_residual=" << r.el_residual << "\n";
  return summary;
}

json run_sweep(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  json list = json::array();
  const auto results = sweep_eps(bg.ops, solver_config(spec, spec.eps.front()), spec.eps, spec.metric_amplitude > 0.0);
  for (const MinimizerResult& r : results) {
    const double eps = r.eps;
    rows.push_back({eps, r.energy, r.el_residual, r.peak_value, double(r.iterations.size())});
    xs.push_back(eps);
    ys.push_back(r.energy);
    list.push_back(minimizer_json(r, bg.ops));
    out << "eps=" << eps << " E=" << io::format_number(r.energy) << "\n";
  }
  io::write_table(art.path("sweep.csv"), {"eps", "energy", "el_residual", "peak_value", "iterations"}, rows);
  art.plot("sweep.svg", "E_eps versus eps", "eps", "E_eps", xs, ys);
  return {{"runs", list}};
}

json run_mean_field(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  const double eps = spec.eps.front();
  const double tol = spec.tolerance > 0.0 ? spec.tolerance : 1e-10;
  const int max_it = spec.max_iterations > 0 ? spec.max_iterations : 100;
  const MinimizerResult r = solve_mean_field(bg.ops, eps, ScalarField::Zero(bg.ops.size()), tol, max_it);
  io::write_field(art.path("v.csv"), r.v_field);
  out << "eps=" << eps << " residual=" << r.el_residual << " E=" << io::format_number(r.energy) << "\n";
  json summary = minimizer_json(r, bg.ops);
  art.json_file("mean_field.json", summary);
  return summary;
}

json run_green(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  if (spec.pole >= bg.ops.size()) throw ParameterError("green_bubble::solve_green", "pole index out of range");
  GreenResult g = solve_green(bg.ops, spec.pole);
  const double a = extract_A(g, bg.ops);
  io::write_field(art.path("green.csv"), g.field);
  const Eigen::VectorXd d = conformal_distances(bg.ops, spec.pole);
  std::vector<int> order(bg.ops.size());
  for (int i = 0; i < bg.ops.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  for (int i : order) {
    if (i == spec.pole) continue;
    rows.push_back({double(i), d[i], g.field[i]});
    xs.push_back(d[i]);
    ys.push_back(g.field[i]);
  }
  io::write_table(art.path("green_profile.csv"), {"vertex", "distance", "G"}, rows);
  art.plot("green_profile.svg", "Green's function versus distance", "distance", "G", xs, ys);
  const json summary = {{"pole", g.pole},
                        {"A_value", a},
                        {"fit_window", {g.fit_window.first, g.fit_window.second}},
                        {"fit_residual", g.fit_residual},
                        {"fit_vertices", g.fit_vertices},
                        {"distance", spec.metric_amplitude > 0.0 ? "great-circle trapezoid (approximate)" : "exact arc"},
                        {"lower_bound_predictor", lower_bound_predictor(a)}};
  art.json_file("green.json", summary);
  out << "A=" << io::format_number(a) << " fit_residual=" << g.fit_residual << "\n";
  return summary;
}

json run_bubble(const RunSpec& spec, Artifacts& art, std::ostream& out) {
  BubbleReport rep = bubble_checks(spec.R, spec.quadrature_n);
  if (!spec.field_file.empty()) {
    const Background bg = make_background(spec);
    const ScalarField v = io::read_field(spec.field_file, bg.ops.size());
    const BubbleReport scaled = rescale_diagnostic(v, bg.ops, spec.R);
    rep.rescaled_profile_error = scaled.rescaled_profile_error;
    rep.tau = scaled.tau;
    rep.peak_vertex = scaled.peak_vertex;
    rep.peak_value = scaled.peak_value;
    rep.samples = scaled.samples;
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  constexpr int n = 200;
  for (int j = 0; j <= n; ++j) {
    const double r = spec.R * j / n;
    rows.push_back({r, bubble_profile(r)});
    xs.push_back(r);
    ys.push_back(bubble_profile(r));
  }
  io::write_table(art.path("profile.csv"), {"r", "phi"}, rows);
  art.plot("profile.svg", "Bubble profile", "r", "phi_0", xs, ys);
  const json summary = bubble_json(rep);
  art.json_file("bubble.json", summary);
  out << "dirichlet_integral=" << io::format_number(rep.dirichlet_integral)
      << " mass_integral=" << io::format_number(rep.mass_integral) << "\n";
  return summary;
}

json run_flow_command(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  const BandBasis basis(bg.round, 2);
  const ScalarField u0 = basis.sample(derive_seed(spec.seed, streams::initial, 0), spec.flow_amplitude);
  const FlowTrace tr = run_flow(bg.ops, u0, spec.t_end, spec.dt);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    rows.push_back({tr.times[i], tr.energies[i], tr.volumes[i], tr.curvature_deviation[i], tr.step_sizes[i]});
  }
  io::write_table(art.path("flow.csv"), {"t", "energy", "volume", "max_curv_dev", "dt"}, rows);
  io::write_field(art.path("u_final.csv"), tr.final_field);
  art.plot("flow_energy.svg", "Liouville energy along the flow", "t", "energy", tr.times, tr.energies);
  const json summary = {{"steps", static_cast<int>(tr.times.size()) - 1},
                        {"rejected_steps", tr.rejected_steps},
                        {"final_energy", tr.energies.back()},
                        {"final_curvature_deviation", tr.curvature_deviation.back()},
                        {"final_volume", tr.volumes.back()}};
  art.json_file("flow.json", summary);
  out << "steps=" << tr.times.size() - 1 << " final max|R-2|=" << tr.curvature_deviation.back() << "\n";
  return summary;
}

void write_margins(Artifacts& art, const InequalityReport& rep) {
  std::ostringstream s;
  s << "seed,margin\n";
  for (const auto& m : rep.per_sample) s << m.seed << ',' << io::format_number(m.margin) << '\n';
  io::write_text(art.path("margins_" + rep.name + ".csv"), s.str());
}

json run_inequalities(const RunSpec& spec, const Background& bg, Artifacts& art, std::ostream& out) {
  const double eps = spec.eps.front();
  const BandBasis basis(bg.round, 3);
  std::vector<InequalityReport> reps;
  reps.push_back(check_onofri(bg.round_ops, basis, spec.samples, spec.seed));
  reps.push_back(check_local_mt(1.0, spec.samples, spec.seed));
  reps.push_back(check_local_mt(0.1, spec.samples, spec.seed, 1.0, eps));
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    InequalityReport gap = thm21_gap(t * kPi, 0.0, 1.0, spec.grid_n);
    gap.name += "_t" + io::format_number(t);
    reps.push_back(gap);
  }
  AscentConfig ascent;
  if (spec.max_iterations > 0) ascent.max_iterations = spec.max_iterations;
  reps.push_back(check_global_mt(bg.ops, basis, eps, spec.trials, spec.seed, ascent));
  InequalityReport c2 = poincare_constant(bg.ops, 2.0);
  c2.name = "poincare_p2";
  reps.push_back(c2);
  InequalityReport c1 = poincare_constant(bg.ops, 1.0, 4, spec.seed);
  c1.name = "poincare_p1";
  reps.push_back(c1);
  reps.push_back(brezis_merle_check(1.0, 2.0 * kPi, spec.samples, spec.seed));

  json list = json::array();
  for (const auto& rep : reps) {
    list.push_back(report_json(rep));
    if (rep.samples > 1) write_margins(art, rep);
    out << std::left << std::setw(16) << rep.name << " worst_margin=" << io::format_number(rep.worst_margin)
        << " empirical=" << io::format_number(rep.empirical_constant) << "\n";
  }
  const json summary = {{"reports", list}};
  art.json_file("inequalities.json", summary);
  return summary;
}

json run_disk(const RunSpec& spec, Artifacts& art, std::ostream& out) {
  const DiskResult d = disk_min_dirichlet(spec.a, spec.b, spec.r, spec.grid_n);
  const double bound = disk_dirichlet_lower_bound(spec.a, spec.b, spec.r);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.radii.size(); ++i) rows.push_back({d.radii[i], d.profile[i]});
  io::write_table(art.path("disk_profile.csv"), {"r", "w"}, rows);
  art.plot("disk_profile.svg", "Disk minimizer profile", "r", "w", d.radii, d.profile);
  const json summary = {{"value", d.value}, {"lower_bound", bound}, {"gap", d.value - bound},
                        {"multiplier", d.multiplier}, {"newton_iterations", d.iterations}};
  art.json_file("disk.json", summary);
  out << "value=" << io::format_number(d.value) << " bound=" << io::format_number(bound) << "\n";
  return summary;
}

void run_mesh_info(const RunSpec& spec, std::ostream& out) {
  const Background bg = make_background(spec);
  const auto& m = *bg.ops.mesh;
  out << "V=" << m.vertex_count() << " F=" << m.face_count() << " E=" << m.edge_count()
      << " chi=" << m.euler_characteristic() << "\n";
  out << "area=" << io::format_number(bg.ops.total_area)
      << " gauss_bonnet=" << io::format_number(bg.ops.curvature.dot(bg.ops.mass))
      << " mean_edge=" << io::format_number(bg.ops.mean_edge_length) << "\n";
  out << "K_min=" << io::format_number(bg.ops.curvature.minCoeff())
      << " K_max=" << io::format_number(bg.ops.curvature.maxCoeff()) << "\n";
}

json inputs_json(const RunSpec& spec) {
  json eps = json::array();
  for (double e : spec.eps) eps.push_back(e);
  return {{"command", spec.command},     {"level", spec.level},
          {"mesh_file", spec.mesh_file.string()},
          {"metric_seed", spec.metric_seed}, {"metric_amp", spec.metric_amplitude},
          {"metric_bands", spec.metric_bands}, {"eps", eps},
          {"seed", spec.seed},           {"tol", spec.tolerance},
          {"max_iter", spec.max_iterations}, {"R", spec.R},
          {"quadrature_n", spec.quadrature_n}, {"field_file", spec.field_file.string()},
          {"pole", spec.pole},           {"t_end", spec.t_end},
          {"dt", spec.dt},               {"flow_amp", spec.flow_amplitude},
          {"samples", spec.samples},     {"trials", spec.trials},
          {"a", spec.a},                 {"b", spec.b},
          {"r", spec.r},                 {"grid_n", spec.grid_n},
          {"plots", spec.plots}};
}

json versions_json() {
  return {{"liouville_lab", LIOUVILLE_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__},
          {"cpp_standard", static_cast<long>(__cplusplus)}};
}

}  // namespace

void RunSpec::validate() const {
  const char* where = "cli_harness::parse_and_run";
  if (std::find_if(std::begin(kCommands), std::end(kCommands), [&](const char* c) { return command == c; }) ==
      std::end(kCommands)) {
    throw ParameterError(where, "unknown command '" + command + "'");
  }
  if (level < 0 || level > 8) throw ParameterError(where, "level must lie in [0, 8]");
  for (double e : eps) {
    if (!(e > 0.0 && e < 8.0 * kPi)) throw ParameterError(where, "eps must lie in (0, 8 pi)");
  }
  if (!(metric_amplitude >= 0.0) || !std::isfinite(metric_amplitude)) {
    throw ParameterError(where, "metric-amp must be finite and >= 0");
  }
  if (metric_bands < 1 || metric_bands > 6) throw ParameterError(where, "metric-bands must lie in [1, 6]");
  if (tolerance == 0.0 || std::isnan(tolerance)) throw ParameterError(where, "tol must be positive");
  if (max_iterations == 0) throw ParameterError(where, "max-iter must be positive");
  if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError(where, "R must be positive");
  if (quadrature_n < 2) throw ParameterError(where, "quadrature-n must be >= 2");
  if (pole < 0) throw ParameterError(where, "pole must be >= 0");
  if (!(t_end > 0.0) || !(dt > 0.0)) throw ParameterError(where, "t-end and dt must be positive");
  if (!(flow_amplitude >= 0.0)) throw ParameterError(where, "flow-amp must be >= 0");
  if (samples < 1 || trials < 1) throw ParameterError(where, "samples and trials must be >= 1");
  if (!(a > 0.0) || !(r > 0.0)) throw ParameterError(where, "a and r must be positive");
  if (grid_n < 256) throw ParameterError(where, "grid-n must be >= 256");
}

bool parse_args(int argc, const char* const* argv, RunSpec& spec, std::ostream& out) {
  CLI::App app{"Liouville energy lab on a triangulated 2-sphere", "liouville_lab"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key = value configuration file (flags override it)");

  std::vector<double> eps_values;
  std::string out_dir, mesh_file, field_file;
  app.add_option("command", spec.command, "minimize | sweep-eps | mean-field | green | bubble | flow | "
                                           "inequalities | disk | mesh-info")
      ->required();
  app.add_option("--level", spec.level, "icosphere subdivision level");
  app.add_option("--mesh-file", mesh_file, "OFF mesh (projected to the unit sphere)");
  app.add_option("--metric-seed", spec.metric_seed, "seed of the background conformal factor");
  app.add_option("--metric-amp", spec.metric_amplitude, "RMS amplitude of the background factor (0 = round)");
  app.add_option("--metric-bands", spec.metric_bands, "harmonic degrees used by the background factor");
  app.add_option("--eps", eps_values, "eps value or comma-separated list")->delimiter(',');
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", spec.seed, "top-level seed");
  app.add_option("--tol", spec.tolerance, "tolerance override");
  app.add_option("--max-iter", spec.max_iterations, "iteration cap override");
  app.add_option("--R", spec.R, "bubble radius");
  app.add_option("--quadrature-n", spec.quadrature_n, "radii in the bubble PDE check");
  app.add_option("--field", field_file, "field file for the bubble rescaling diagnostic");
  app.add_option("--pole", spec.pole, "Green's function pole vertex");
  app.add_option("--t-end", spec.t_end, "flow end time");
  app.add_option("--dt", spec.dt, "initial flow step");
  app.add_option("--flow-amp", spec.flow_amplitude, "amplitude of the random initial flow data");
  app.add_option("--samples", spec.samples, "samples per inequality suite");
  app.add_option("--trials", spec.trials, "ascent starts for the global inequality");
  app.add_option("--a", spec.a, "disk constraint int e^{2w} = a");
  app.add_option("--b", spec.b, "disk boundary value");
  app.add_option("--r", spec.r, "disk radius");
  app.add_option("--grid-n", spec.grid_n, "radial grid intervals");
  app.add_option("--plots", spec.plots, "write SVG plots (true/false)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  } catch (const CLI::ParseError& e) {
    throw ParameterError("cli_harness::parse_and_run", e.what());
  }
  if (!eps_values.empty()) spec.eps = eps_values;
  spec.output_dir = out_dir;
  spec.mesh_file = mesh_file;
  spec.field_file = field_file;
  spec.validate();
  return true;
}

void run(const RunSpec& spec, std::ostream& out) {
  spec.validate();
  if (spec.command == "mesh-info") {
    run_mesh_info(spec, out);
    if (spec.output_dir.empty()) return;
  }
  const auto start = std::chrono::steady_clock::now();
  Artifacts art(spec.output_dir.empty() ? fs::path("liouville_out") : spec.output_dir, spec.plots);

  json mesh_info = json::object();
  json summary = json::object();
  auto describe = [&](const Background& bg) {
    mesh_info = {{"source", bg.source},
                 {"vertices", bg.ops.size()},
                 {"faces", bg.ops.mesh->face_count()},
                 {"gauss_bonnet_corrected", bg.ops.gauss_bonnet_corrected}};
  };
  if (spec.command == "bubble") {
    summary = run_bubble(spec, art, out);
  } else if (spec.command == "disk") {
    summary = run_disk(spec, art, out);
  } else if (spec.command != "mesh-info") {
    const Background bg = make_background(spec);
    describe(bg);
    if (spec.command == "minimize") summary = run_minimize(spec, bg, art, out);
    else if (spec.command == "sweep-eps") summary = run_sweep(spec, bg, art, out);
    else if (spec.command == "mean-field") summary = run_mean_field(spec, bg, art, out);
    else if (spec.command == "green") summary = run_green(spec, bg, art, out);
    else if (spec.command == "flow") summary = run_flow_command(spec, bg, art, out);
    else if (spec.command == "inequalities") summary = run_inequalities(spec, bg, art, out);
  } else {
    describe(make_background(spec));
  }

  const json manifest = {
      {"tool", "liouville_lab"},
      {"inputs", inputs_json(spec)},
      {"mesh", mesh_info},
      {"versions", versions_json()},
      {"seed_scheme",
       "sample seeds are derive_seed(seed, stream, index) = mix64(mix64(seed ^ mix64(stream)) + index) with "
       "SplitMix64 mix64; streams: initial=2 onofri=3 local_mt=4 global_mt=5 poincare=6 brezis_merle=7; the "
       "background factor uses metric-seed directly"},
      {"outputs", art.names()},
      {"timing_file", "timing.json"},
      {"summary", summary}};
  io::write_text(art.dir() / "manifest.json", manifest.dump(2) + "\n");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_text(art.dir() / "timing.json", json{{"wall_seconds", wall}}.dump(2) + "\n");
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter:
    case ErrorKind::Data:
    case ErrorKind::MeshQuality:
    case ErrorKind::Resolution:
      return 2;
    case ErrorKind::Convergence:
      return 3;
    case ErrorKind::Numeric:
    case ErrorKind::Stiffness:
      return 4;
  }
  return 1;
}

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    RunSpec spec;
    if (!parse_args(argc, argv, spec, out)) return 0;
    run(spec, out);
    return 0;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "] " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error " << e.what() << "\n";
    return 1;
  }
}

}  // namespace liouville::cli
