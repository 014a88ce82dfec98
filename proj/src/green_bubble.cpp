#include "liouville/green_bubble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

int peak_of(const ScalarField& v) {
  int peak = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[peak]) peak = i;
  }
  return peak;
}

double arc_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

template <class F>
double adaptive_integral(F f, double lo, double hi, const char* where) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14, &error);
  if (!std::isfinite(value) || error > 1e-11 * std::max(1.0, std::abs(value))) {
    throw NumericError(where, "quadrature did not converge (error estimate " + std::to_string(error) + ")");
  }
  return value;
}

}  // namespace

GreenSolver::GreenSolver(const DiscreteOperators& ops) : ops_(ops), laplacian_(ops.stiffness) {}

GreenResult GreenSolver::solve(int pole) const {
  if (pole < 0 || pole >= ops_.size()) {
    throw ParameterError("green_bubble::solve_green", "pole index out of range");
  }
  Eigen::VectorXd rhs = -2.0 * ops_.curvature.cwiseProduct(ops_.mass);
  rhs[pole] += 8.0 * kPi;
  GreenResult out;
  out.pole = pole;
  out.field = laplacian_.solve(rhs);
  out.field.array() -= out.field.dot(ops_.mass) / ops_.mass.sum();
  return out;
}

GreenResult solve_green(const DiscreteOperators& ops, int pole) { return GreenSolver(ops).solve(pole); }

Eigen::VectorXd conformal_distances(const DiscreteOperators& ops, int pole) {
  const auto& mesh = *ops.mesh;
  const Eigen::Vector3d& p = mesh.vertices[pole];
  const double scale_p = std::exp(0.5 * mesh.background_factor[pole]);
  Eigen::VectorXd d(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    d[i] = arc_angle(p, mesh.vertices[i]) * 0.5 * (scale_p + std::exp(0.5 * mesh.background_factor[i]));
  }
  return d;
}

double extract_A(GreenResult& green, const DiscreteOperators& ops) {
  const char* where = "green_bubble::extract_A";
  check_field(ops, green.field, where);
  const Eigen::VectorXd d = conformal_distances(ops, green.pole);
  const double unit = ops.mean_edge_length * std::exp(0.5 * ops.mesh->background_factor[green.pole]);
  green.fit_window = {4.0 * unit, 8.0 * unit};

  double weight = 0.0;
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < ops.size(); ++i) {
    if (d[i] >= green.fit_window.first && d[i] <= green.fit_window.second) {
      sum += ops.mass[i] * (green.field[i] + 4.0 * std::log(d[i]));
      weight += ops.mass[i];
      ++count;
    }
  }
  if (count < 30) {
    throw ResolutionError(where, "only " + std::to_string(count) + " vertices in the fit annulus");
  }
  const double a = sum / weight;
  double sq = 0.0;
  for (int i = 0; i < ops.size(); ++i) {
    if (d[i] >= green.fit_window.first && d[i] <= green.fit_window.second) {
      const double r = green.field[i] + 4.0 * std::log(d[i]) - a;
      sq += ops.mass[i] * r * r;
    }
  }
  green.A_value = a;
  green.fit_residual = std::sqrt(sq / weight);
  green.fit_vertices = count;
  return a;
}

double bubble_profile(double radius) { return -2.0 * std::log1p(kPi * radius * radius); }

std::vector<double> bubble_profile(const std::vector<Eigen::Vector2d>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(bubble_profile(x.norm()));
  return out;
}

BubbleReport bubble_checks(double R, int quadrature_n) {
  const char* where = "green_bubble::bubble_checks";
  if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError(where, "R must be positive");
  if (quadrature_n < 2) throw ParameterError(where, "quadrature_n must be >= 2");
  BubbleReport rep;
  rep.R = R;

  for (int j = 0; j < quadrature_n; ++j) {
    const double r = R * j / (quadrature_n - 1);
    const double q = 1.0 + kPi * r * r;
    // phi'' = -4 pi (1 - pi r^2) / q^2 and phi'/r = -4 pi / q.
    const double lap = -4.0 * kPi * (1.0 - kPi * r * r) / (q * q) - 4.0 * kPi / q;
    const double rhs = 8.0 * kPi * std::exp(bubble_profile(r));
    rep.pde_residual_max = std::max(rep.pde_residual_max, std::abs(-lap - rhs));
  }

  rep.mass_integral = adaptive_integral(
      [](double r) { return 2.0 * kPi * r * std::exp(bubble_profile(r)); }, 0.0, R, where);
  rep.dirichlet_integral = adaptive_integral(
      [](double r) {
        const double slope = -4.0 * kPi * r / (1.0 + kPi * r * r);
        return 2.0 * kPi * r * slope * slope;
      },
      0.0, R, where);
  const double s = kPi * R * R;
  rep.mass_closed_form = s / (1.0 + s);
  rep.dirichlet_closed_form = 16.0 * kPi * (std::log1p(s) + 1.0 / (1.0 + s) - 1.0);
  rep.dirichlet_asymptotic = 16.0 * kPi * (std::log1p(s) - 1.0);
  return rep;
}

BubbleReport rescale_diagnostic(const ScalarField& v, const DiscreteOperators& ops, double R,
                                int radial_n, int angular_n) {
  const char* where = "green_bubble::rescale_diagnostic";
  check_field(ops, v, where);
  if (!(R > 0.0)) throw ParameterError(where, "R must be positive");
  if (radial_n < 1 || angular_n < 3) throw ParameterError(where, "grid too small");
  const auto& mesh = *ops.mesh;

  const int peak = peak_of(v);
  const auto neighbors = vertex_neighbors(mesh);
  for (int j : neighbors[peak]) {
    if (!(v[j] < v[peak])) throw ResolutionError(where, "field has no strict maximum");
  }
  for (int i = 0; i < v.size(); ++i) {
    if (i != peak && v[i] == v[peak]) throw ResolutionError(where, "field has no strict maximum");
  }

  BubbleReport rep = bubble_checks(R, 2);
  rep.peak_vertex = peak;
  rep.peak_value = v[peak];
  rep.tau = std::exp(0.5 * v[peak]);
  const double scale = std::exp(0.5 * mesh.background_factor[peak]);
  const double radius = R / (rep.tau * scale);  // round angle of the pulled-back ball
  if (radius < 3.0 * ops.mean_edge_length) {
    throw ResolutionError(where, "rescaled ball spans fewer than 3 edge lengths");
  }
  if (radius > 0.5 * kPi) throw ResolutionError(where, "rescaled ball leaves the normal-coordinate chart");

  const Eigen::Vector3d p = mesh.vertices[peak];
  const Eigen::Vector3d helper = std::abs(p.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (helper - helper.dot(p) * p).normalized();
  const Eigen::Vector3d e2 = p.cross(e1);

  std::vector<Eigen::Matrix3d> inverse;
  std::vector<int> candidate;
  const double reach = radius + 3.0 * ops.mean_edge_length;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    double nearest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) nearest = std::min(nearest, arc_angle(p, mesh.vertices[tri[k]]));
    if (nearest <= reach) {
      Eigen::Matrix3d m;
      m << mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]];
      candidate.push_back(f);
      inverse.push_back(m.inverse());
    }
  }

  auto interpolate = [&](const Eigen::Vector3d& q) {
    for (std::size_t c = 0; c < candidate.size(); ++c) {
      const Eigen::Vector3d w = inverse[c] * q;
      const double total = w.sum();
      if (total <= 0.0) continue;
      const Eigen::Vector3d lambda = w / total;
      if (lambda.minCoeff() < -1e-12) continue;
      const auto& tri = mesh.faces[candidate[c]];
      return lambda[0] * v[tri[0]] + lambda[1] * v[tri[1]] + lambda[2] * v[tri[2]];
    }
    throw NumericError("green_bubble::rescale_diagnostic", "sample point not covered by the mesh");
  };

  const double log_tau2 = 2.0 * std::log(rep.tau);
  double worst = 0.0;
  int samples = 0;
  for (int j = 0; j <= radial_n; ++j) {
    const double r = R * j / radial_n;
    const double angle = r / (rep.tau * scale);
    const int rays = j == 0 ? 1 : angular_n;
    for (int k = 0; k < rays; ++k) {
      const double theta = 2.0 * kPi * k / angular_n;
      const Eigen::Vector3d q =
          std::cos(angle) * p + std::sin(angle) * (std::cos(theta) * e1 + std::sin(theta) * e2);
      const double phi_eps = interpolate(q) - log_tau2;
      worst = std::max(worst, std::abs(phi_eps - bubble_profile(r)));
      ++samples;
    }
  }
  rep.rescaled_profile_error = worst;
  rep.samples = samples;
  return rep;
}

double lower_bound_predictor(double A) {
  return -4.0 * kPi * A - 8.0 * kPi * std::log(kPi) - 8.0 * kPi;
}

}  // namespace liouville
