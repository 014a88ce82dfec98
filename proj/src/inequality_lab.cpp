#include "liouville/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "liouville/conformal_energy.hpp"
#include "liouville/linear_algebra.hpp"
#include "liouville/rng.hpp"
#include "liouville/variational_solver.hpp"

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRadialModes = 8;

void record(InequalityReport& rep, std::uint64_t seed, double margin) {
  if (rep.per_sample.empty() || margin < rep.worst_margin) {
    rep.worst_margin = margin;
    rep.worst_seed = seed;
  }
  rep.per_sample.push_back({seed, margin});
  rep.samples = static_cast<int>(rep.per_sample.size());
}

double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

template <class F>
double radial_integral(F f, double r) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, r, 15, 1e-13, &error);
}

/// H^1 inner product (S + M) with projection onto {k^T d = 0}.
class ConstrainedPreconditioner {
 public:
  ConstrainedPreconditioner(const DiscreteOperators& ops, const Eigen::VectorXd& k) : k_(k) {
    SparseMatrix h = ops.stiffness;
    for (int i = 0; i < ops.size(); ++i) h.coeffRef(i, i) += ops.mass[i];
    factor_.compute(h);
    if (factor_.info() != Eigen::Success) {
      throw NumericError("inequality_lab", "H1 factorization failed");
    }
    hk_ = factor_.solve(k_);
    khk_ = k_.dot(hk_);
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& covector) const {
    Eigen::VectorXd d = factor_.solve(covector);
    return d - (k_.dot(d) / khk_) * hk_;
  }

  Eigen::VectorXd smooth(const Eigen::VectorXd& covector) const { return factor_.solve(covector); }

 private:
  Eigen::VectorXd k_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
  Eigen::VectorXd hk_;
  double khk_ = 1.0;
};

/// Projected Armijo ascent. `value` returns the objective; `covector` its
/// differential. Stops on stagnation, tolerance, cap or divergence.
template <class Value, class Covector, class Stop>
double ascend(Eigen::VectorXd& u, const ConstrainedPreconditioner& pre, Value value, Covector covector,
              Stop diverged, int max_iterations, double tolerance) {
  double f = value(u);
  for (int it = 0; it < max_iterations && !diverged(f); ++it) {
    const Eigen::VectorXd g = covector(u);
    const Eigen::VectorXd d = pre.direction(g);
    const double slope = g.dot(d);
    if (!(slope > tolerance * tolerance * std::max(1.0, std::abs(f)))) break;
    double t = 1.0;
    bool accepted = false;
    while (t >= 0x1p-30) {
      const Eigen::VectorXd trial = u + t * d;
      const double ft = value(trial);
      if (std::isfinite(ft) && ft >= f + 1e-4 * t * slope) {
        u = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return f;
}

}  // namespace

int InequalityReport::violations(double allowance) const {
  return static_cast<int>(std::count_if(per_sample.begin(), per_sample.end(),
                                        [&](const SampleMargin& s) { return s.margin < -allowance; }));
}

double local_mt_margin(double r, std::uint64_t sample_seed, double amplitude_scale, double extra_exponent) {
  if (!(r > 0.0)) throw ParameterError("inequality_lab::check_local_mt", "disk radius must be positive");
  std::mt19937_64 gen(sample_seed);
  std::normal_distribution<double> normal;
  const double scale = amplitude_scale * uniform(gen, 0.0, 4.0);
  double coeff[kRadialModes];
  for (int k = 0; k < kRadialModes; ++k) coeff[k] = scale * normal(gen) / (k + 1);

  auto u = [&](double rho) {
    double s = 0.0;
    for (int k = 0; k < kRadialModes; ++k) s += coeff[k] * std::cos((k + 0.5) * kPi * rho / r);
    return s;
  };
  auto du = [&](double rho) {
    double s = 0.0;
    for (int k = 0; k < kRadialModes; ++k) {
      const double w = (k + 0.5) * kPi / r;
      s -= coeff[k] * w * std::sin(w * rho);
    }
    return s;
  };
  const double exp_integral = radial_integral([&](double rho) { return 2.0 * kPi * rho * std::exp(u(rho)); }, r);
  const double dirichlet = radial_integral(
      [&](double rho) {
        const double g = du(rho);
        return 2.0 * kPi * rho * g * g;
      },
      r);
  return std::log(kPi * r * r) + 1.0 + (1.0 / (16.0 * kPi) + extra_exponent) * dirichlet - std::log(exp_integral);
}

InequalityReport check_local_mt(double r, int samples, std::uint64_t seed, double amplitude_scale,
                                double extra_exponent) {
  if (samples < 1) throw ParameterError("inequality_lab::check_local_mt", "samples must be >= 1");
  InequalityReport rep;
  rep.name = extra_exponent > 0.0 ? "local_mt_eps" : "local_mt";
  rep.parameters = {{"r", r}, {"amplitude_scale", amplitude_scale}, {"extra_exponent", extra_exponent}};
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t s = derive_seed(seed, streams::local_mt, i);
    record(rep, s, local_mt_margin(r, s, amplitude_scale, extra_exponent));
  }
  return rep;
}

InequalityReport thm21_gap(double a, double b, double r, int grid_n) {
  const DiskResult disk = disk_min_dirichlet(a, b, r, grid_n);
  InequalityReport rep;
  rep.name = "thm21_gap";
  rep.parameters = {{"a", a}, {"b", b}, {"r", r}, {"grid_n", grid_n}};
  rep.empirical_constant = disk.value;
  record(rep, 0, disk.value - disk_dirichlet_lower_bound(a, b, r));
  return rep;
}

double onofri_sample_margin(const DiscreteOperators& round_ops, const BandBasis& basis,
                            std::uint64_t sample_seed) {
  std::mt19937_64 gen(sample_seed);
  const double kind = uniform(gen, 0.0, 1.0);
  if (kind < 0.25) {
    return onofri_deficit(round_ops, mobius_dilation_factor(*round_ops.mesh, uniform(gen, 1.0, 3.0)));
  }
  const double amplitude = uniform(gen, 0.0, 3.0);
  return onofri_deficit(round_ops, basis.sample(gen(), amplitude));
}

InequalityReport check_onofri(const DiscreteOperators& round_ops, const BandBasis& basis, int samples,
                              std::uint64_t seed) {
  if (samples < 1) throw ParameterError("inequality_lab::check_onofri", "samples must be >= 1");
  InequalityReport rep;
  rep.name = "onofri";
  rep.parameters = {{"bands", basis.bands()}};
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t s = derive_seed(seed, streams::onofri, i);
    record(rep, s, onofri_sample_margin(round_ops, basis, s));
  }
  return rep;
}

namespace {

double global_mt_ascent_with(const DiscreteOperators& ops, const BandBasis& basis,
                             const ConstrainedPreconditioner& pre, double eps, std::uint64_t sample_seed,
                             const AscentConfig& cfg) {
  const double c = 1.0 / (16.0 * kPi) + eps;
  std::mt19937_64 gen(sample_seed);
  const double amplitude = uniform(gen, 0.0, cfg.start_amplitude);
  Eigen::VectorXd u = project_constraint(ops, basis.sample(gen(), amplitude));

  auto value = [&](const Eigen::VectorXd& w) { return log_integral_exp(ops, w) - c * w.dot(ops.stiffness * w); };
  auto covector = [&](const Eigen::VectorXd& w) {
    const double log_z = log_integral_exp(ops, w);
    Eigen::VectorXd g = (w.array() - log_z).exp().matrix().cwiseProduct(ops.mass);
    g -= 2.0 * c * (ops.stiffness * w);
    return g;
  };
  auto diverged = [&](double f) { return !(f <= cfg.divergence_threshold); };
  return ascend(u, pre, value, covector, diverged, cfg.max_iterations, cfg.gradient_tolerance);
}

}  // namespace

double global_mt_ascent(const DiscreteOperators& ops, const BandBasis& basis, double eps,
                        std::uint64_t sample_seed, const AscentConfig& cfg) {
  check_eps(eps, "inequality_lab::check_global_mt");
  const ConstrainedPreconditioner pre(ops, ops.curvature.cwiseProduct(ops.mass));
  return global_mt_ascent_with(ops, basis, pre, eps, sample_seed, cfg);
}

InequalityReport check_global_mt(const DiscreteOperators& ops, const BandBasis& basis, double eps, int trials,
                                 std::uint64_t seed, const AscentConfig& cfg) {
  const char* where = "inequality_lab::check_global_mt";
  if (!(eps > 0.0)) throw ParameterError(where, "eps must be positive");
  if (trials < 1) throw ParameterError(where, "trials must be >= 1");
  if (basis.round_mass().size() != ops.size()) throw ParameterError(where, "band basis does not match the mesh");
  const ConstrainedPreconditioner pre(ops, ops.curvature.cwiseProduct(ops.mass));
  InequalityReport rep;
  rep.name = "global_mt";
  rep.parameters = {{"eps", eps}, {"divergence_threshold", cfg.divergence_threshold},
                    {"max_iterations", cfg.max_iterations}};
  rep.empirical_constant = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = derive_seed(seed, streams::global_mt, i);
    const double f = global_mt_ascent_with(ops, basis, pre, eps, s, cfg);
    rep.empirical_constant = std::max(rep.empirical_constant, f);
    record(rep, s, cfg.divergence_threshold - f);
  }
  return rep;
}

InequalityReport poincare_constant(const DiscreteOperators& ops, double p, int trials, std::uint64_t seed) {
  const char* where = "inequality_lab::poincare_constant";
  if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError(where, "p must be >= 1");
  if (trials < 1) throw ParameterError(where, "trials must be >= 1");
  const Eigen::VectorXd k = ops.curvature.cwiseProduct(ops.mass);
  const PinnedLaplacian solver(ops.stiffness);
  const EigenPairs pairs = lowest_constrained_eigenpairs(ops.stiffness, solver, ops.mass, k, 1);

  InequalityReport rep;
  rep.name = "poincare";
  rep.parameters = {{"p", p}};
  if (p == 2.0) {
    rep.empirical_constant = 1.0 / pairs.values[0];
    record(rep, 0, 0.0);
    return rep;
  }

  const ConstrainedPreconditioner pre(ops, k);
  auto norm_p = [&](const Eigen::VectorXd& u) { return ops.mass.dot(u.cwiseAbs().array().pow(p).matrix()); };
  auto value = [&](const Eigen::VectorXd& u) {
    return (2.0 / p) * std::log(norm_p(u)) - std::log(u.dot(ops.stiffness * u));
  };
  auto covector = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd su = ops.stiffness * u;
    const Eigen::VectorXd weak =
        (u.array().abs().pow(p - 1.0) * u.array().sign()).matrix().cwiseProduct(ops.mass);
    return Eigen::VectorXd(2.0 * weak / norm_p(u) - 2.0 * su / u.dot(su));
  };
  auto never = [](double) { return false; };

  std::vector<double> quotients;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = derive_seed(seed, streams::poincare, i);
    Eigen::VectorXd u = pairs.vectors.col(0);
    if (i > 0) {
      std::mt19937_64 gen(s);
      std::normal_distribution<double> normal;
      Eigen::VectorXd noise(ops.size());
      for (int j = 0; j < ops.size(); ++j) noise[j] = normal(gen) * ops.mass[j];
      Eigen::VectorXd rough = pre.smooth(noise);
      rough -= (k.dot(rough) / k.sum()) * Eigen::VectorXd::Ones(ops.size());
      u = rough / std::sqrt(rough.dot(ops.mass.cwiseProduct(rough)));
    }
    quotients.push_back(std::exp(ascend(u, pre, value, covector, never, 500, 1e-7)));
    seeds.push_back(s);
  }
  rep.empirical_constant = *std::max_element(quotients.begin(), quotients.end());
  for (std::size_t i = 0; i < quotients.size(); ++i) record(rep, seeds[i], rep.empirical_constant - quotients[i]);
  return rep;
}

namespace {

struct RadialSource {
  std::vector<double> centers, widths, weights;
  double operator()(double rho) const {
    double f = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double z = (rho - centers[i]) / widths[i];
      f += weights[i] * std::exp(-z * z);
    }
    return f;
  }
};

/// int_{B_r} exp(alpha |u| / ||f||_1) for -Delta u = f, u(r) = 0, by the
/// trapezoid rule on the uniform radial grid.
double brezis_merle_integral(const RadialSource& f, double r, double delta, int grid_n) {
  const double h = r / grid_n;
  std::vector<double> rho(grid_n + 1), fv(grid_n + 1), enclosed(grid_n + 1, 0.0), u(grid_n + 1, 0.0);
  for (int j = 0; j <= grid_n; ++j) {
    rho[j] = h * j;
    fv[j] = f(rho[j]);
  }
  double l1 = 0.0;
  for (int j = 1; j <= grid_n; ++j) {
    enclosed[j] = enclosed[j - 1] + 0.5 * h * (fv[j - 1] * rho[j - 1] + fv[j] * rho[j]);
    l1 += 0.5 * h * (std::abs(fv[j - 1]) * rho[j - 1] + std::abs(fv[j]) * rho[j]);
  }
  l1 *= 2.0 * kPi;
  if (!(l1 > 0.0)) return kPi * r * r;
  // u(rho) = int_rho^r enclosed(s)/s ds; enclosed(s)/s -> 0 at s = 0.
  auto flux = [&](int j) { return j == 0 ? 0.0 : enclosed[j] / rho[j]; };
  for (int j = grid_n - 1; j >= 0; --j) u[j] = u[j + 1] + 0.5 * h * (flux(j) + flux(j + 1));
  const double alpha = (4.0 * kPi - delta) / l1;
  double total = 0.0;
  for (int j = 1; j <= grid_n; ++j) {
    total += 0.5 * h * (rho[j - 1] * std::exp(alpha * std::abs(u[j - 1])) + rho[j] * std::exp(alpha * std::abs(u[j])));
  }
  return 2.0 * kPi * total;
}

void check_bm_parameters(double r, double delta, int grid_n) {
  const char* where = "inequality_lab::brezis_merle_check";
  if (!(r > 0.0)) throw ParameterError(where, "disk radius must be positive");
  if (!(delta > 0.0 && delta < 4.0 * kPi)) throw ParameterError(where, "delta must lie in (0, 4 pi)");
  if (grid_n < 64) throw ParameterError(where, "grid_n must be >= 64");
}

}  // namespace

double brezis_merle_bump_integral(double r, double delta, double width, int grid_n) {
  check_bm_parameters(r, delta, grid_n);
  return brezis_merle_integral(RadialSource{{0.0}, {width}, {1.0}}, r, delta, grid_n);
}

double brezis_merle_margin(double r, double delta, std::uint64_t sample_seed, int grid_n) {
  check_bm_parameters(r, delta, grid_n);
  std::mt19937_64 gen(sample_seed);
  std::normal_distribution<double> normal;
  const double w_max = 0.5 * r;
  const double w_min = 4.0 * r / grid_n;
  const int bumps = 1 + static_cast<int>(gen() % 3);
  RadialSource f;
  for (int i = 0; i < bumps; ++i) {
    const bool ring = uniform(gen, 0.0, 1.0) < 0.5;
    f.centers.push_back(ring ? uniform(gen, 0.0, 0.8 * r) : 0.0);
    f.widths.push_back(std::exp(uniform(gen, std::log(w_min), std::log(w_max))));
    f.weights.push_back(normal(gen));
  }
  const double bound = 16.0 * kPi * kPi * r * r / delta;
  return std::log(bound) - std::log(brezis_merle_integral(f, r, delta, grid_n));
}

InequalityReport brezis_merle_check(double r, double delta, int samples, std::uint64_t seed, int grid_n) {
  check_bm_parameters(r, delta, grid_n);
  if (samples < 1) throw ParameterError("inequality_lab::brezis_merle_check", "samples must be >= 1");
  InequalityReport rep;
  rep.name = "brezis_merle";
  rep.parameters = {{"r", r}, {"delta", delta}, {"grid_n", grid_n}};
  const double bound = 16.0 * kPi * kPi * r * r / delta;
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t s = derive_seed(seed, streams::brezis_merle, i);
    const double margin = brezis_merle_margin(r, delta, s, grid_n);
    rep.empirical_constant = std::max(rep.empirical_constant, bound * std::exp(-margin));
    record(rep, s, margin);
  }
  return rep;
}

}  // namespace liouville
