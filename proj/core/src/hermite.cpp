#include "gausstrace/hermite.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gausstrace {

std::vector<double> normalized_hermite_values(std::size_t degree, double u) {
  std::vector<double> h(degree + 1);
  h[0] = 1.0;
  if (degree >= 1) h[1] = u;
  for (std::size_t k = 1; k < degree; ++k) {
    h[k + 1] = (u * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) / std::sqrt(static_cast<double>(k + 1));
  }
  return h;
}

double normalized_hermite(std::size_t degree, double u) { return normalized_hermite_values(degree, u).back(); }

int total_degree(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, int max_degree) {
  std::vector<MultiIndex> out;
  MultiIndex alpha(dim, 0);
  for (int degree = 0; degree <= max_degree; ++degree) {
    // Enumerate compositions of `degree` into `dim` parts, lexicographically descending in alpha_0.
    std::vector<MultiIndex> level;
    auto recurse = [&](auto&& self, std::size_t pos, int remaining) -> void {
      if (pos + 1 == dim) {
        alpha[pos] = remaining;
        level.push_back(alpha);
        return;
      }
      for (int a = remaining; a >= 0; --a) {
        alpha[pos] = a;
        self(self, pos + 1, remaining - a);
      }
    };
    if (dim == 0) continue;
    recurse(recurse, 0, degree);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

HermiteExpansion::HermiteExpansion(std::size_t dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim == 0) throw std::invalid_argument("HermiteExpansion: dimension must be positive");
  if (max_degree < 0) throw std::invalid_argument("HermiteExpansion: max_degree must be >= 0");
}

HermiteExpansion HermiteExpansion::mode(std::size_t dim, std::size_t axis, int degree, double coefficient) {
  if (axis >= dim) throw std::out_of_range("HermiteExpansion::mode: axis out of range");
  HermiteExpansion e(dim, degree);
  MultiIndex alpha(dim, 0);
  alpha[axis] = degree;
  e.set(alpha, coefficient);
  return e;
}

void HermiteExpansion::set(const MultiIndex& alpha, double coefficient) {
  if (alpha.size() != dim_) throw std::invalid_argument("HermiteExpansion: multi-index length mismatch");
  for (int a : alpha)
    if (a < 0) throw std::invalid_argument("HermiteExpansion: negative multi-index entry");
  if (total_degree(alpha) > max_degree_) throw std::invalid_argument("HermiteExpansion: |alpha| exceeds max_degree");
  coeffs_[alpha] = coefficient;
}

void HermiteExpansion::add(const MultiIndex& alpha, double coefficient) { set(alpha, this->coefficient(alpha) + coefficient); }

double HermiteExpansion::coefficient(const MultiIndex& alpha) const {
  const auto it = coeffs_.find(alpha);
  return it == coeffs_.end() ? 0.0 : it->second;
}

namespace {

struct AxisTables {
  std::vector<std::vector<double>> value;  // value[k][j] = h_j(u_k)
  std::vector<std::vector<double>> deriv;  // h_j'(u_k) = sqrt(j) h_{j-1}(u_k)
  std::vector<std::vector<double>> second; // h_j'' = sqrt(j (j-1)) h_{j-2}
};

AxisTables tabulate(const GaussianSpace& space, const Vector& x, int degree) {
  AxisTables t;
  const auto n = space.dim();
  t.value.resize(n);
  t.deriv.resize(n);
  t.second.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = x(static_cast<Eigen::Index>(k)) / space.sqrt_eigenvalues()(static_cast<Eigen::Index>(k));
    t.value[k] = normalized_hermite_values(static_cast<std::size_t>(degree), u);
    t.deriv[k].assign(static_cast<std::size_t>(degree) + 1, 0.0);
    t.second[k].assign(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int j = 1; j <= degree; ++j) t.deriv[k][j] = std::sqrt(static_cast<double>(j)) * t.value[k][j - 1];
    for (int j = 2; j <= degree; ++j)
      t.second[k][j] = std::sqrt(static_cast<double>(j) * (j - 1)) * t.value[k][j - 2];
  }
  return t;
}

}  // namespace

double HermiteExpansion::evaluate(const GaussianSpace& space, const Vector& x) const {
  if (space.dim() != dim_) throw std::invalid_argument("HermiteExpansion: space dimension mismatch");
  const AxisTables t = tabulate(space, x, max_degree_);
  double total = 0.0;
  for (const auto& [alpha, c] : coeffs_) {
    double term = c;
    for (std::size_t k = 0; k < dim_; ++k) term *= t.value[k][alpha[k]];
    total += term;
  }
  return total;
}

Vector HermiteExpansion::gradient(const GaussianSpace& space, const Vector& x) const {
  const AxisTables t = tabulate(space, x, max_degree_);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& [alpha, c] : coeffs_) {
    for (std::size_t j = 0; j < dim_; ++j) {
      double term = c / space.sqrt_eigenvalues()(static_cast<Eigen::Index>(j));
      for (std::size_t k = 0; k < dim_; ++k) term *= (k == j ? t.deriv[k][alpha[k]] : t.value[k][alpha[k]]);
      g(static_cast<Eigen::Index>(j)) += term;
    }
  }
  return g;
}

Matrix HermiteExpansion::hessian(const GaussianSpace& space, const Vector& x) const {
  const AxisTables t = tabulate(space, x, max_degree_);
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix h = Matrix::Zero(n, n);
  const Vector& s = space.sqrt_eigenvalues();
  for (const auto& [alpha, c] : coeffs_) {
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i; j < dim_; ++j) {
        double term = c / (s(static_cast<Eigen::Index>(i)) * s(static_cast<Eigen::Index>(j)));
        for (std::size_t k = 0; k < dim_; ++k) {
          if (i == j && k == i)
            term *= t.second[k][alpha[k]];
          else if (k == i || k == j)
            term *= t.deriv[k][alpha[k]];
          else
            term *= t.value[k][alpha[k]];
        }
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += term;
      }
    }
  }
  return h.selfadjointView<Eigen::Upper>();
}

double HermiteExpansion::l2_norm_squared() const {
  double total = 0.0;
  for (const auto& [alpha, c] : coeffs_) total += c * c;
  return total;
}

double HermiteExpansion::chaos_norm_squared(int degree) const {
  double total = 0.0;
  for (const auto& [alpha, c] : coeffs_)
    if (total_degree(alpha) == degree) total += c * c;
  return total;
}

HermiteExpansion HermiteExpansion::ou_semigroup(double t) const {
  if (t < 0.0) throw std::invalid_argument("HermiteExpansion::ou_semigroup: t must be >= 0");
  HermiteExpansion out(dim_, max_degree_);
  for (const auto& [alpha, c] : coeffs_) out.coeffs_[alpha] = c * std::exp(-static_cast<double>(total_degree(alpha)) * t);
  return out;
}

HermiteExpansion HermiteExpansion::ou_generator() const {
  HermiteExpansion out(dim_, max_degree_);
  for (const auto& [alpha, c] : coeffs_) out.coeffs_[alpha] = -static_cast<double>(total_degree(alpha)) * c;
  return out;
}

HermiteExpansion HermiteExpansion::ou_resolvent_generator(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("HermiteExpansion::ou_resolvent_generator: lambda must be > 0");
  HermiteExpansion out(dim_, max_degree_);
  for (const auto& [alpha, c] : coeffs_) {
    const double k = static_cast<double>(total_degree(alpha));
    out.coeffs_[alpha] = -k / (lambda + k) * c;
  }
  return out;
}

HermiteExpansion HermiteExpansion::scaled(double c) const {
  HermiteExpansion out(dim_, max_degree_);
  for (const auto& [alpha, v] : coeffs_) out.coeffs_[alpha] = c * v;
  return out;
}

HermiteExpansion HermiteExpansion::operator+(const HermiteExpansion& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("HermiteExpansion: dimension mismatch");
  HermiteExpansion out(dim_, std::max(max_degree_, other.max_degree_));
  out.coeffs_ = coeffs_;
  for (const auto& [alpha, c] : other.coeffs_) out.coeffs_[alpha] += c;
  return out;
}

ScalarField HermiteExpansion::as_field(const GaussianSpace& space, std::string label) const {
  const HermiteExpansion self = *this;
  return ScalarField{[self, space](const Vector& x) { return self.evaluate(space, x); },
                     [self, space](const Vector& x) -> Vector { return self.gradient(space, x); },
                     [self, space](const Vector& x) -> Matrix { return self.hessian(space, x); },
                     Smoothness::smooth,
                     DerivativeSource::analytic,
                     std::move(label)};
}

}  // namespace gausstrace
