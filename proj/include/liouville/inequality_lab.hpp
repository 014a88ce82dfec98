#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/sphere_mesh.hpp"

namespace liouville {

struct SampleMargin {
  std::uint64_t seed = 0;
  double margin = 0.0;
};

/// Margins follow the convention bound - quantity, so >= 0 means the
/// inequality held for that sample.
struct InequalityReport {
  std::string name;
  int samples = 0;
  double worst_margin = 0.0;
  std::uint64_t worst_seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
  /// Empirical constant where the check has one (ln C_3, c_p, C(delta)).
  double empirical_constant = 0.0;
  std::vector<SampleMargin> per_sample;

  int violations(double allowance) const;
};

/// ln(pi r^2 e) + c int|grad u|^2 - ln int e^u on the disk of radius r for the
/// radial field u = sum_k c_k cos((k - 1/2) pi rho / r) drawn from `sample_seed`,
/// with c = 1/(16 pi) + extra_exponent. Integrals by adaptive Gauss-Kronrod.
double local_mt_margin(double r, std::uint64_t sample_seed, double amplitude_scale = 1.0,
                       double extra_exponent = 0.0);

/// Local Moser-Trudinger bound on the disk, sampled over `samples` random radial
/// H^1_0 fields. extra_exponent > 0 gives the (1/16pi + eps) variant.
InequalityReport check_local_mt(double r, int samples, std::uint64_t seed, double amplitude_scale = 1.0,
                                double extra_exponent = 0.0);

/// disk_min_dirichlet(a, b, r) - 4 pi (ln t + 1/t - 1), t = a e^{-2b} / (pi r^2).
InequalityReport thm21_gap(double a, double b, double r, int grid_n);

/// Onofri deficit on the round sphere over random band fields and
/// Mobius dilation factors.
double onofri_sample_margin(const DiscreteOperators& round_ops, const BandBasis& basis,
                            std::uint64_t sample_seed);
InequalityReport check_onofri(const DiscreteOperators& round_ops, const BandBasis& basis, int samples,
                              std::uint64_t seed);

struct AscentConfig {
  int max_iterations = 5000;
  double divergence_threshold = 1e6;
  double gradient_tolerance = 1e-6;
  double start_amplitude = 2.0;
};

/// Maximizes F(u) = ln int e^u - (1/(16 pi) + eps) int|grad u|^2 over
/// {int K_g u = 0} from a random start with H^1-preconditioned projected
/// gradient ascent. Returns the final F.
double global_mt_ascent(const DiscreteOperators& ops, const BandBasis& basis, double eps,
                        std::uint64_t sample_seed, const AscentConfig& cfg = {});

/// Multi-start ascent. Margin per trial = divergence_threshold - F; the
/// empirical ln C_3(eps) is the sup of F over trials.
InequalityReport check_global_mt(const DiscreteOperators& ops, const BandBasis& basis, double eps,
                                 int trials, std::uint64_t seed, const AscentConfig& cfg = {});

/// Empirical c_p in (int |u|^p)^{2/p} <= c_p int|grad u|^2 on {int K_g u = 0}.
/// p = 2 is the constrained generalized eigenproblem; other p use multi-start
/// projected ascent of the quotient seeded with the p = 2 eigenvector.
InequalityReport poincare_constant(const DiscreteOperators& ops, double p, int trials = 8,
                                   std::uint64_t seed = 0);

/// ln C_BM - ln int_{B_r} exp((4 pi - delta)|u| / ||f||_1) for -Delta u = f
/// radial on B_r with u(r) = 0, where C_BM = 16 pi^2 r^2 / delta is the
/// explicit Brezis-Merle constant (diameter 2r). f is a random mix of radial
/// Gaussian bumps and rings with widths between r/2 and 4 grid cells.
double brezis_merle_margin(double r, double delta, std::uint64_t sample_seed, int grid_n = 4096);

/// Exponential integral for a single centered Gaussian bump of the given width.
double brezis_merle_bump_integral(double r, double delta, double width, int grid_n = 4096);

InequalityReport brezis_merle_check(double r, double delta, int samples, std::uint64_t seed,
                                    int grid_n = 4096);

}  // namespace liouville
