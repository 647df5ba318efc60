#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace gausstrace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Centered nondegenerate Gaussian measure N(0, Q) on R^n.
///
/// Points handed to every other component of the library are expressed in
/// the eigenbasis of Q: coordinate k of a point x is <x, e_k>. In these
/// coordinates Q = diag(lambda_1, ..., lambda_n), the Cameron-Martin basis is
/// v_k = sqrt(lambda_k) e_k and all H-inner products reduce to Euclidean ones
/// on the D_k coordinates. `to_eigen` / `from_eigen` convert from and to the
/// ambient frame when a covariance was supplied in a non-diagonal basis.
class GaussianSpace {
 public:
  /// Diagonal covariance in the standard basis.
  static GaussianSpace diagonal(const Vector& eigenvalues);
  static GaussianSpace isotropic(std::size_t dim, double variance = 1.0);
  /// Symmetric positive definite covariance; eigendecomposed here.
  static GaussianSpace from_covariance(const Matrix& covariance);
  /// Explicit spectrum and orthonormal eigenvector columns.
  GaussianSpace(Vector eigenvalues, Matrix eigenvectors);

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  [[nodiscard]] const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  [[nodiscard]] double eigenvalue(std::size_t k) const { return eigenvalues_(static_cast<Eigen::Index>(k)); }
  [[nodiscard]] const Vector& sqrt_eigenvalues() const noexcept { return sqrt_eigenvalues_; }
  [[nodiscard]] double trace() const noexcept { return eigenvalues_.sum(); }
  [[nodiscard]] double max_eigenvalue() const noexcept { return eigenvalues_.maxCoeff(); }

  /// Cameron-Martin basis vector v_k in ambient coordinates.
  [[nodiscard]] Vector cameron_martin_vector(std::size_t k) const;
  /// <a, b>_H for a, b in ambient coordinates.
  [[nodiscard]] double h_inner(const Vector& a, const Vector& b) const;

  [[nodiscard]] Vector to_eigen(const Vector& ambient) const;
  [[nodiscard]] Vector from_eigen(const Vector& eigen_coords) const;

  /// Gaussian density of N(0, Q) at a point given in eigen coordinates.
  [[nodiscard]] double density(const Vector& x) const;
  /// <Q^{-1} x, x> for x in eigen coordinates.
  [[nodiscard]] double mahalanobis_squared(const Vector& x) const;

  /// Subspace measure on the coordinates other than `dropped` (0-based).
  [[nodiscard]] GaussianSpace drop_axis(std::size_t dropped) const;

  [[nodiscard]] std::string describe() const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector sqrt_eigenvalues_;
  double log_normalizer_ = 0.0;
};

}  // namespace gausstrace
