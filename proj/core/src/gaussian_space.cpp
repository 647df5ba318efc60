#include "gausstrace/gaussian_space.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

namespace {
constexpr double kOrthogonalityTolerance = 1e-12;
}

GaussianSpace::GaussianSpace(Vector eigenvalues, Matrix eigenvectors)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  const auto n = eigenvalues_.size();
  if (n == 0) throw std::invalid_argument("GaussianSpace: dimension must be positive");
  if (eigenvectors_.rows() != n || eigenvectors_.cols() != n)
    throw std::invalid_argument("GaussianSpace: eigenvector matrix must be n x n");
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(eigenvalues_(k) > 0.0) || !std::isfinite(eigenvalues_(k))) {
      std::ostringstream msg;
      msg << "GaussianSpace: eigenvalue[" << k << "] = " << eigenvalues_(k) << " is not positive";
      throw std::invalid_argument(msg.str());
    }
  }
  const Matrix gram = eigenvectors_.transpose() * eigenvectors_;
  const double defect = (gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > kOrthogonalityTolerance)
    throw std::invalid_argument("GaussianSpace: eigenvectors are not orthonormal");

  sqrt_eigenvalues_ = eigenvalues_.cwiseSqrt();
  log_normalizer_ = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
                    0.5 * eigenvalues_.array().log().sum();
}

GaussianSpace GaussianSpace::diagonal(const Vector& eigenvalues) {
  const auto n = eigenvalues.size();
  return GaussianSpace(eigenvalues, Matrix::Identity(n, n));
}

GaussianSpace GaussianSpace::isotropic(std::size_t dim, double variance) {
  return diagonal(Vector::Constant(static_cast<Eigen::Index>(dim), variance));
}

GaussianSpace GaussianSpace::from_covariance(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("GaussianSpace: covariance must be square");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + covariance.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("GaussianSpace: covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  if (solver.info() != Eigen::Success) throw std::runtime_error("GaussianSpace: eigendecomposition failed");
  return GaussianSpace(solver.eigenvalues(), solver.eigenvectors());
}

Vector GaussianSpace::cameron_martin_vector(std::size_t k) const {
  const auto idx = static_cast<Eigen::Index>(k);
  return sqrt_eigenvalues_(idx) * eigenvectors_.col(idx);
}

double GaussianSpace::h_inner(const Vector& a, const Vector& b) const {
  const Vector ae = to_eigen(a);
  const Vector be = to_eigen(b);
  return (ae.array() * be.array() / eigenvalues_.array()).sum();
}

Vector GaussianSpace::to_eigen(const Vector& ambient) const { return eigenvectors_.transpose() * ambient; }

Vector GaussianSpace::from_eigen(const Vector& eigen_coords) const { return eigenvectors_ * eigen_coords; }

double GaussianSpace::mahalanobis_squared(const Vector& x) const {
  return (x.array().square() / eigenvalues_.array()).sum();
}

double GaussianSpace::density(const Vector& x) const {
  return std::exp(log_normalizer_ - 0.5 * mahalanobis_squared(x));
}

GaussianSpace GaussianSpace::drop_axis(std::size_t dropped) const {
  const auto n = eigenvalues_.size();
  if (static_cast<Eigen::Index>(dropped) >= n) throw std::out_of_range("GaussianSpace::drop_axis: index out of range");
  if (n < 2) throw std::invalid_argument("GaussianSpace::drop_axis: cannot split a one-dimensional space");
  Vector rest(n - 1);
  for (Eigen::Index k = 0, j = 0; k < n; ++k) {
    if (k != static_cast<Eigen::Index>(dropped)) rest(j++) = eigenvalues_(k);
  }
  return diagonal(rest);
}

std::string GaussianSpace::describe() const {
  std::ostringstream out;
  out << "N(0, diag(";
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) out << (k ? ", " : "") << eigenvalues_(k);
  out << "))";
  return out.str();
}

}  // namespace gausstrace
