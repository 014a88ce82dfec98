#include "liouville/sphere_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>

#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "liouville/errors.hpp"
#include "liouville/linear_algebra.hpp"

namespace liouville {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kMinTriangleArea = 1e-14;
constexpr double kMinAngleDegrees = 1.0;
constexpr double kGaussBonnetDrift = 1e-9;

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Signed area of the spherical triangle spanned by unit vectors a, b, c.
double spherical_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const double triple = a.dot(b.cross(c));
  const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(triple, denom);
}

double corner_cotangent(const Eigen::Vector3d& apex, const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
  const Eigen::Vector3d e1 = p - apex;
  const Eigen::Vector3d e2 = q - apex;
  return e1.dot(e2) / e1.cross(e2).norm();
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::MeshQuality: return "mesh-quality error";
    case ErrorKind::Convergence: return "convergence error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Resolution: return "resolution error";
    case ErrorKind::Stiffness: return "stiffness error";
  }
  return "error";
}

int TriangulatedSphere::edge_count() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) edges.insert(edge_key(f[k], f[(k + 1) % 3]));
  }
  return static_cast<int>(edges.size());
}

bool TriangulatedSphere::is_round() const {
  return background_factor.size() == 0 || background_factor.cwiseAbs().maxCoeff() == 0.0;
}

TriangulatedSphere build_icosphere(int level) {
  if (level < 0 || level > 8) {
    throw ParameterError("sphere_mesh::build_icosphere",
                         "level must be in [0, 8], got " + std::to_string(level));
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangulatedSphere mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const int id = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(refined);
  }
  mesh.background_factor = ScalarField::Zero(mesh.vertex_count());
  return mesh;
}

void validate_mesh(const TriangulatedSphere& mesh) {
  const char* where = "sphere_mesh::validate_mesh";
  const int n = mesh.vertex_count();
  if (n < 4 || mesh.faces.empty()) throw MeshQualityError(where, "mesh is empty");
  if (mesh.background_factor.size() != n) {
    throw MeshQualityError(where, "background factor size does not match vertex count");
  }
  for (int i = 0; i < n; ++i) {
    if (!mesh.vertices[i].allFinite() || std::abs(mesh.vertices[i].norm() - 1.0) > 1e-12) {
      throw MeshQualityError(where, "vertex " + std::to_string(i) + " is not on the unit sphere");
    }
  }
  // Each directed edge once, each undirected edge twice with opposite directions.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      if (a < 0 || a >= n || b < 0 || b >= n || a == b) {
        throw MeshQualityError(where, "face references an invalid vertex index");
      }
      if (++directed[{a, b}] > 1) throw MeshQualityError(where, "inconsistent face orientation");
    }
  }
  for (const auto& [e, count] : directed) {
    if (!directed.contains({e.second, e.first})) {
      throw MeshQualityError(where, "mesh is not closed (boundary edge " + std::to_string(e.first) +
                                        "-" + std::to_string(e.second) + ")");
    }
  }
  const int edges = static_cast<int>(directed.size() / 2);
  const int chi = n - edges + mesh.face_count();
  if (chi != 2) throw MeshQualityError(where, "Euler characteristic is " + std::to_string(chi));

  const double min_angle = kMinAngleDegrees * std::numbers::pi / 180.0;
  for (const auto& f : mesh.faces) {
    const auto& a = mesh.vertices[f[0]];
    const auto& b = mesh.vertices[f[1]];
    const auto& c = mesh.vertices[f[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (area < kMinTriangleArea) throw MeshQualityError(where, "degenerate triangle");
    if (spherical_area(a, b, c) <= 0.0) throw MeshQualityError(where, "inverted triangle");
    const std::array<const Eigen::Vector3d*, 3> p{&a, &b, &c};
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d e1 = *p[(k + 1) % 3] - *p[k];
      const Eigen::Vector3d e2 = *p[(k + 2) % 3] - *p[k];
      const double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2));
      if (angle < min_angle) throw MeshQualityError(where, "triangle angle below 1 degree");
    }
  }
}

TriangulatedSphere set_conformal_background(const TriangulatedSphere& mesh, const ScalarField& phi,
                                            bool normalize) {
  const char* where = "sphere_mesh::set_conformal_background";
  if (phi.size() != mesh.vertex_count()) throw DataError(where, "field size mismatch");
  if (!phi.allFinite()) throw DataError(where, "background factor has non-finite entries");
  TriangulatedSphere out = mesh;
  out.background_factor = phi;
  if (normalize) {
    out.background_factor.setZero();
    const DiscreteOperators round = assemble_operators(out);
    const double log_area = log_integral_exp(round, phi);
    out.background_factor = phi.array() + (std::log(kFourPi) - log_area);
  }
  return out;
}

DiscreteOperators assemble_operators(const TriangulatedSphere& mesh) {
  validate_mesh(mesh);
  const int n = mesh.vertex_count();
  DiscreteOperators ops;
  ops.mesh = std::make_shared<const TriangulatedSphere>(mesh);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.faces.size() * 12);
  ops.round_mass = Eigen::VectorXd::Zero(n);
  for (const auto& f : mesh.faces) {
    const auto& a = mesh.vertices[f[0]];
    const auto& b = mesh.vertices[f[1]];
    const auto& c = mesh.vertices[f[2]];
    const double third = spherical_area(a, b, c) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int i = f[k];
      const int j = f[(k + 1) % 3];
      const int o = f[(k + 2) % 3];
      ops.round_mass[i] += third;
      const double w =
          0.5 * corner_cotangent(mesh.vertices[o], mesh.vertices[i], mesh.vertices[j]);
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }
  ops.stiffness.resize(n, n);
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.stiffness.makeCompressed();

  double edge_sum = 0.0;
  int edge_total = 0;
  for (int k = 0; k < ops.stiffness.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(ops.stiffness, k); it; ++it) {
      if (it.row() < it.col()) {
        edge_sum += (mesh.vertices[it.row()] - mesh.vertices[it.col()]).norm();
        ++edge_total;
      }
    }
  }
  ops.mean_edge_length = edge_sum / edge_total;

  const Eigen::ArrayXd phi = mesh.background_factor.array();
  ops.mass = ops.round_mass.array() * phi.exp();
  const Eigen::VectorXd lap_phi = ops.stiffness * mesh.background_factor;
  ops.curvature = (-phi).exp() * (1.0 + 0.5 * lap_phi.array() / ops.round_mass.array());

  const double gb = ops.curvature.dot(ops.mass);
  if (std::abs(gb - kFourPi) > kGaussBonnetDrift) {
    ops.mass *= kFourPi / gb;
    ops.gauss_bonnet_corrected = true;
  }
  ops.total_area = ops.mass.sum();
  return ops;
}

void check_field(const DiscreteOperators& ops, const ScalarField& f, const char* where) {
  if (f.size() != ops.size()) {
    throw DataError(where, "field has " + std::to_string(f.size()) + " entries, mesh has " +
                               std::to_string(ops.size()) + " vertices");
  }
  if (!f.allFinite()) throw DataError(where, "field has non-finite entries");
}

double integrate(const DiscreteOperators& ops, const ScalarField& f) {
  check_field(ops, f, "sphere_mesh::integrate");
  return f.dot(ops.mass);
}

double dirichlet_energy(const DiscreteOperators& ops, const ScalarField& u) {
  check_field(ops, u, "sphere_mesh::dirichlet_energy");
  return u.dot(ops.stiffness * u);
}

ScalarField negative_laplacian(const DiscreteOperators& ops, const ScalarField& u) {
  return (ops.stiffness * u).cwiseQuotient(ops.mass);
}

double mass_norm(const DiscreteOperators& ops, const ScalarField& f) {
  return std::sqrt(f.cwiseAbs2().dot(ops.mass));
}

double log_integral_exp(const DiscreteOperators& ops, const ScalarField& u) {
  const double shift = u.maxCoeff();
  return shift + std::log(((u.array() - shift).exp() * ops.mass.array()).sum());
}

BandBasis::BandBasis(const TriangulatedSphere& mesh, int bands) : bands_(bands) {
  if (bands < 1) throw ParameterError("sphere_mesh::random_band_field", "bands must be >= 1");
  TriangulatedSphere round = mesh;
  round.background_factor = ScalarField::Zero(mesh.vertex_count());
  const DiscreteOperators ops = assemble_operators(round);
  const int count = (bands + 1) * (bands + 1) - 1;
  if (count >= ops.size() / 2) {
    throw ParameterError("sphere_mesh::random_band_field", "too many bands for this mesh");
  }
  const PinnedLaplacian solver(ops.stiffness);
  const EigenPairs pairs =
      lowest_constrained_eigenpairs(ops.stiffness, solver, ops.round_mass, ops.round_mass, count);
  eigenvalues_ = pairs.values;
  eigenfields_ = pairs.vectors;
  round_mass_ = ops.round_mass;

  Eigen::MatrixXd harmonics(ops.size(), count);
  for (int i = 0; i < ops.size(); ++i) {
    const Eigen::Vector3d& x = mesh.vertices[i];
    const double theta = std::acos(std::clamp(x.z(), -1.0, 1.0));
    const double azimuth = std::atan2(x.y(), x.x());
    int col = 0;
    for (int l = 1; l <= bands; ++l) {
      for (int m = -l; m <= l; ++m) {
        const unsigned ul = static_cast<unsigned>(l);
        if (m == 0) {
          harmonics(i, col) = boost::math::spherical_harmonic_r(ul, 0, theta, azimuth);
        } else if (m > 0) {
          harmonics(i, col) = std::sqrt(2.0) * boost::math::spherical_harmonic_r(ul, m, theta, azimuth);
        } else {
          harmonics(i, col) = std::sqrt(2.0) * boost::math::spherical_harmonic_i(ul, -m, theta, azimuth);
        }
        ++col;
      }
    }
  }
  // Mass-orthogonal projection onto span(eigenfields_).
  canonical_ = eigenfields_ * (eigenfields_.transpose() * round_mass_.asDiagonal() * harmonics);
}

ScalarField BandBasis::sample(std::uint64_t seed, double amplitude) const {
  const int n = static_cast<int>(eigenfields_.rows());
  if (amplitude == 0.0) return ScalarField::Zero(n);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd coeffs(canonical_.cols());
  for (auto& c : coeffs) c = normal(gen);
  ScalarField f = canonical_ * coeffs;
  const double rms = std::sqrt(f.cwiseAbs2().dot(round_mass_) / round_mass_.sum());
  return f * (amplitude / rms);
}

ScalarField random_band_field(const TriangulatedSphere& mesh, std::uint64_t seed, int bands,
                              double amplitude) {
  return BandBasis(mesh, bands).sample(seed, amplitude);
}

std::vector<std::vector<int>> vertex_neighbors(const TriangulatedSphere& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertex_count());
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      adj[f[k]].push_back(f[(k + 1) % 3]);
      adj[f[k]].push_back(f[(k + 2) % 3]);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

}  // namespace liouville
