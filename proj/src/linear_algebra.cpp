#include "liouville/linear_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "liouville/errors.hpp"

namespace liouville {

PinnedLaplacian::PinnedLaplacian(const SparseMatrix& stiffness) : n_(static_cast<int>(stiffness.rows())) {
  const SparseMatrix reduced = stiffness.bottomRightCorner(n_ - 1, n_ - 1);
  factor_.compute(reduced);
  if (factor_.info() != Eigen::Success) {
    throw NumericError("linear_algebra::PinnedLaplacian", "factorization of the stiffness form failed");
  }
}

Eigen::VectorXd PinnedLaplacian::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x(n_);
  x[0] = 0.0;
  x.tail(n_ - 1) = factor_.solve(b.tail(n_ - 1));
  return x;
}

EigenPairs lowest_constrained_eigenpairs(const SparseMatrix& stiffness, const PinnedLaplacian& solver,
                                         const Eigen::VectorXd& mass,
                                         const Eigen::VectorXd& constraint, int count,
                                         double tolerance, int max_iterations,
                                         std::uint64_t start_seed) {
  const char* where = "linear_algebra::lowest_constrained_eigenpairs";
  const int n = static_cast<int>(mass.size());
  const int block = std::min(n - 2, count + std::max(5, count / 2 + 2));
  if (count < 1 || block < count) throw ParameterError(where, "invalid eigenpair count");
  const double k_sum = constraint.sum();
  if (std::abs(k_sum) < 1e-300) throw NumericError(where, "constraint is orthogonal to constants");
  const Eigen::VectorXd k_over_m = constraint.cwiseQuotient(mass);
  const double k_dual_norm2 = constraint.dot(k_over_m);

  auto project = [&](Eigen::Ref<Eigen::VectorXd> x) { x.array() -= constraint.dot(x) / k_sum; };
  // Solution operator of S x = M u + mu k on the constraint set.
  auto apply_inverse = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd rhs = mass.cwiseProduct(u);
    rhs += (-rhs.sum() / k_sum) * constraint;
    Eigen::VectorXd x = solver.solve(rhs);
    project(x);
    return x;
  };

  std::mt19937_64 gen(start_seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::MatrixXd x(n, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = uniform(gen);
    project(x.col(j));
  }

  EigenPairs out;
  double worst = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::MatrixXd y(n, block);
    for (int j = 0; j < block; ++j) y.col(j) = apply_inverse(x.col(j));
    const Eigen::MatrixXd sy = stiffness * y;
    Eigen::MatrixXd a = y.transpose() * sy;
    Eigen::MatrixXd b = y.transpose() * mass.asDiagonal() * y;
    a = 0.5 * (a + a.transpose()).eval();
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(a, b);
    if (ritz.info() != Eigen::Success) throw NumericError(where, "Rayleigh-Ritz step failed");
    x = y * ritz.eigenvectors();
    const Eigen::MatrixXd sx = sy * ritz.eigenvectors();

    worst = 0.0;
    for (int j = 0; j < count; ++j) {
      const double theta = ritz.eigenvalues()[j];
      Eigen::VectorXd r = sx.col(j) - theta * mass.cwiseProduct(x.col(j));
      r -= (k_over_m.dot(r) / k_dual_norm2) * constraint;
      const double res = std::sqrt(r.cwiseAbs2().cwiseQuotient(mass).sum()) / std::max(theta, 1e-300);
      worst = std::max(worst, res);
    }
    if (worst < tolerance) {
      out.values = ritz.eigenvalues().head(count);
      out.vectors = x.leftCols(count);
      out.iterations = it;
      return out;
    }
  }
  throw NumericError(where, "eigensolver did not converge (residual " + std::to_string(worst) + ")");
}

}  // namespace liouville
