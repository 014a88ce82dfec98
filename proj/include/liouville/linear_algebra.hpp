#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "liouville/sphere_mesh.hpp"

namespace liouville {

/// Solves S x = b for the singular stiffness form S (kernel = constants) and
/// compatible right-hand sides (sum b = 0). Vertex 0 is pinned to zero and
/// the reduced SPD system is factored once.
class PinnedLaplacian {
 public:
  explicit PinnedLaplacian(const SparseMatrix& stiffness);

  /// Returns the solution with x[0] = 0. Incompatible parts of b are ignored.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  int size() const { return n_; }

 private:
  int n_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // mass-orthonormal columns
  int iterations = 0;
};

/// Lowest eigenpairs of S u = lambda M u + mu k restricted to {k^T u = 0},
/// with M = diag(mass). Block inverse iteration with Rayleigh-Ritz.
/// Throws NumericError when the residual tolerance is not met.
EigenPairs lowest_constrained_eigenpairs(const SparseMatrix& stiffness, const PinnedLaplacian& solver,
                                         const Eigen::VectorXd& mass,
                                         const Eigen::VectorXd& constraint, int count,
                                         double tolerance = 1e-9, int max_iterations = 500,
                                         std::uint64_t start_seed = 0x5eed);

}  // namespace liouville
