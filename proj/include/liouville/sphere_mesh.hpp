#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include "liouville/errors.hpp"

namespace liouville {

/// Per-vertex real values, indexed like the mesh vertex list.
using ScalarField = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Closed genus-0 triangle mesh embedded in the unit sphere, carrying the
/// log conformal factor phi of the background metric g = e^phi g_round.
struct TriangulatedSphere {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  ScalarField background_factor;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int edge_count() const;
  int euler_characteristic() const { return vertex_count() - edge_count() + face_count(); }
  bool is_round() const;
};

/// Discrete operators of the metric g on a TriangulatedSphere.
///
/// The stiffness matrix is the cotangent form of the unit-sphere embedding.
/// The 2D Dirichlet energy is conformally invariant, so it does not depend
/// on the background factor. Mass weights are one third of the spherical
/// triangle areas around each vertex, times e^phi; for the round metric they
/// tile the sphere and sum to 4*pi up to rounding.
struct DiscreteOperators {
  std::shared_ptr<const TriangulatedSphere> mesh;
  SparseMatrix stiffness;
  Eigen::VectorXd round_mass;
  Eigen::VectorXd mass;
  ScalarField curvature;  // Gaussian curvature K_g
  double total_area = 0.0;
  double mean_edge_length = 0.0;  // round-metric chord length
  bool gauss_bonnet_corrected = false;

  int size() const { return static_cast<int>(mass.size()); }
};

/// Icosahedron subdivided `level` times and projected to the unit sphere.
TriangulatedSphere build_icosphere(int level);

/// Replaces the background factor. With `normalize`, a constant is added so
/// the total area of e^phi g_round is 4*pi.
TriangulatedSphere set_conformal_background(const TriangulatedSphere& mesh, const ScalarField& phi,
                                            bool normalize);

DiscreteOperators assemble_operators(const TriangulatedSphere& mesh);

/// Validates topology and geometry: closed 2-manifold, Euler characteristic 2,
/// unit-norm vertices, consistent orientation. Throws MeshQualityError.
void validate_mesh(const TriangulatedSphere& mesh);

/// Sum of f(v) * mass(v).
double integrate(const DiscreteOperators& ops, const ScalarField& f);

/// u^T S u for the stiffness form S.
double dirichlet_energy(const DiscreteOperators& ops, const ScalarField& u);

/// -Delta_g u as a vertex field: M^{-1} S u.
ScalarField negative_laplacian(const DiscreteOperators& ops, const ScalarField& u);

/// sqrt(sum f^2 mass).
double mass_norm(const DiscreteOperators& ops, const ScalarField& f);

/// Sum over vertices of e^{u} mass, evaluated as exp(max u) * sum e^{u - max u} mass.
/// Returns the logarithm.
double log_integral_exp(const DiscreteOperators& ops, const ScalarField& u);

void check_field(const DiscreteOperators& ops, const ScalarField& f, const char* where);

/// Lowest nonconstant eigenfields of the round-metric pencil (stiffness, mass)
/// grouped by spherical-harmonic band: bands = b keeps degrees 1..b,
/// i.e. (b+1)^2 - 1 fields.
///
/// Eigenfields inside a band are only defined up to rotation, so samples are
/// drawn in a canonical basis: real spherical harmonics of degree 1..b
/// projected onto the discrete eigenspace. A seed then describes the same
/// continuum field at every refinement level.
class BandBasis {
 public:
  BandBasis(const TriangulatedSphere& mesh, int bands);

  int bands() const { return bands_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenfields() const { return eigenfields_; }
  const Eigen::MatrixXd& canonical_fields() const { return canonical_; }
  const Eigen::VectorXd& round_mass() const { return round_mass_; }

  /// Deterministic random combination scaled to the requested RMS amplitude
  /// (RMS taken with round mass weights over area 4*pi).
  ScalarField sample(std::uint64_t seed, double amplitude) const;

 private:
  int bands_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenfields_;
  Eigen::MatrixXd canonical_;
  Eigen::VectorXd round_mass_;
};

ScalarField random_band_field(const TriangulatedSphere& mesh, std::uint64_t seed, int bands,
                              double amplitude);

/// Vertex-to-vertex adjacency (sorted, unique).
std::vector<std::vector<int>> vertex_neighbors(const TriangulatedSphere& mesh);

}  // namespace liouville
