#include "gausstrace/gauss_core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

namespace {

void require_dim(const GaussianSpace& space, const Vector& x, const char* where) {
  if (static_cast<std::size_t>(x.size()) != space.dim()) {
    std::ostringstream msg;
    msg << where << ": point has dimension " << x.size() << ", space has " << space.dim();
    throw std::invalid_argument(msg.str());
  }
}

void require_tensor_dim(const GaussianSpace& space) {
  if (space.dim() > kTensorMaxDim) {
    std::ostringstream msg;
    msg << "dimension " << space.dim() << " exceeds the tensor quadrature limit " << kTensorMaxDim
        << "; use the Monte Carlo mode";
    throw QuadratureBudgetExceeded(msg.str());
  }
}

}  // namespace

Vector h_gradient_of(const GaussianSpace& space, const Vector& euclidean_gradient) {
  return space.sqrt_eigenvalues().cwiseProduct(euclidean_gradient);
}

double h_gradient_norm(const GaussianSpace& space, const Vector& euclidean_gradient) {
  return std::sqrt((space.eigenvalues().array() * euclidean_gradient.array().square()).sum());
}

Vector h_gradient(const GaussianSpace& space, const ScalarField& f, const Vector& x) {
  require_dim(space, x, "h_gradient");
  return h_gradient_of(space, f.gradient(x));
}

Matrix h_hessian(const GaussianSpace& space, const ScalarField& f, const Vector& x) {
  require_dim(space, x, "h_hessian");
  if (!f.has_hessian()) throw std::invalid_argument("h_hessian: field has no Hessian");
  const Vector& s = space.sqrt_eigenvalues();
  return s.asDiagonal() * f.hessian(x) * s.asDiagonal();
}

double vhat_eval(const GaussianSpace& space, std::size_t k, const Vector& x) {
  if (k >= space.dim()) {
    std::ostringstream msg;
    msg << "vhat_eval: index " << k << " out of range for dimension " << space.dim();
    throw std::out_of_range(msg.str());
  }
  require_dim(space, x, "vhat_eval");
  const auto idx = static_cast<Eigen::Index>(k);
  return x(idx) / space.sqrt_eigenvalues()(idx);
}

double ou_apply(const GaussianSpace& space, const ScalarField& f, const Vector& x) {
  require_dim(space, x, "ou_apply");
  if (!f.has_hessian()) throw std::invalid_argument("ou_apply: field has no Hessian");
  const Matrix hess = f.hessian(x);
  return space.eigenvalues().dot(hess.diagonal()) - x.dot(f.gradient(x));
}

double mehler_apply(const GaussianSpace& space, const ScalarField& f, double t, const Vector& x,
                    std::size_t quad_order) {
  if (t < 0.0) throw std::invalid_argument("mehler_apply: t must be >= 0");
  if (quad_order == 0) throw std::invalid_argument("mehler_apply: quad_order must be >= 1");
  require_dim(space, x, "mehler_apply");
  if (t == 0.0) return f.value(x);
  require_tensor_dim(space);
  const double decay = std::exp(-t);
  const double spread = std::sqrt(-std::expm1(-2.0 * t));
  const Vector shift = decay * x;
  double total = 0.0;
  Vector y(x.size());
  for_each_tensor_node(space, quad_order, [&](const Vector& node, double w) {
    y = shift + spread * node;
    total += w * f.value(y);
  });
  return total;
}

Estimate mehler_apply_mc(const GaussianSpace& space, const ScalarField& f, double t, const Vector& x,
                         const SamplerState& state, std::size_t samples) {
  if (t < 0.0) throw std::invalid_argument("mehler_apply_mc: t must be >= 0");
  require_dim(space, x, "mehler_apply_mc");
  if (t == 0.0) return Estimate{f.value(x), 0.0};
  const double decay = std::exp(-t);
  const double spread = std::sqrt(-std::expm1(-2.0 * t));
  const SampleSet set(space, state, samples);
  const Vector shift = decay * x;
  return integrate(set, 1, [&](const Vector& y, std::span<double> out) { out[0] = f.value(shift + spread * y); })[0];
}

Estimate mehler_apply_default(const GaussianSpace& space, const ScalarField& f, double t, const Vector& x,
                              std::size_t quad_order, const SamplerState& state, std::size_t mc_samples) {
  try {
    return Estimate{mehler_apply(space, f, t, x, quad_order), 0.0};
  } catch (const QuadratureBudgetExceeded&) {
    return mehler_apply_mc(space, f, t, x, state, mc_samples);
  }
}

ScalarField mehler_field(const GaussianSpace& space, const ScalarField& f, double t, std::size_t quad_order) {
  ScalarField out;
  out.value = [=](const Vector& x) { return mehler_apply(space, f, t, x, quad_order); };
  out.gradient = [=](const Vector& x) -> Vector {
    if (t == 0.0) return f.gradient(x);
    require_tensor_dim(space);
    const double decay = std::exp(-t);
    const double spread = std::sqrt(-std::expm1(-2.0 * t));
    Vector total = Vector::Zero(x.size());
    for_each_tensor_node(space, quad_order,
                         [&](const Vector& node, double w) { total += w * f.gradient(decay * x + spread * node); });
    return decay * total;
  };
  if (f.has_hessian()) {
    out.hessian = [=](const Vector& x) -> Matrix {
      if (t == 0.0) return f.hessian(x);
      require_tensor_dim(space);
      const double decay = std::exp(-t);
      const double spread = std::sqrt(-std::expm1(-2.0 * t));
      Matrix total = Matrix::Zero(x.size(), x.size());
      for_each_tensor_node(space, quad_order,
                           [&](const Vector& node, double w) { total += w * f.hessian(decay * x + spread * node); });
      return decay * decay * total;
    };
  }
  out.smoothness = f.smoothness;
  out.derivatives = f.derivatives;
  out.label = "T(" + std::to_string(t) + ")" + f.label;
  return out;
}

double gaussian_divergence(const GaussianSpace& space, const VectorFieldH& Phi, const Vector& x) {
  if (Phi.components.size() != space.dim()) {
    std::ostringstream msg;
    msg << "gaussian_divergence: field has " << Phi.components.size() << " components, space has dimension "
        << space.dim();
    throw std::invalid_argument(msg.str());
  }
  require_dim(space, x, "gaussian_divergence");
  double total = 0.0;
  for (std::size_t k = 0; k < space.dim(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    const ScalarField& phi = Phi.components[k];
    const double dk = space.sqrt_eigenvalues()(idx) * phi.gradient(x)(idx);
    total += dk - phi.value(x) * x(idx) / space.sqrt_eigenvalues()(idx);
  }
  return total;
}

double unit_normal_divergence(const GaussianSpace& space, const ScalarField& G, const Vector& x) {
  if (!G.has_hessian()) throw std::invalid_argument("unit_normal_divergence: G needs a Hessian");
  const Vector grad = G.gradient(x);
  const Matrix hess = G.hessian(x);
  const Vector dh = h_gradient_of(space, grad);
  const double norm = dh.norm();
  if (!(norm > 0.0)) throw std::domain_error("unit_normal_divergence: D_H G vanishes");
  const double lg = space.eigenvalues().dot(hess.diagonal()) - x.dot(grad);
  const Vector& s = space.sqrt_eigenvalues();
  const Vector d2 = s.asDiagonal() * (hess * (s.asDiagonal() * dh));
  return lg / norm - d2.dot(dh) / (norm * norm * norm);
}

HermiteExpansion hermite_transform(const GaussianSpace& space, const ScalarField& f, int max_degree,
                                   std::size_t quad_order) {
  if (max_degree < 0) throw std::invalid_argument("hermite_transform: max_degree must be >= 0");
  if (quad_order <= static_cast<std::size_t>(max_degree))
    throw std::invalid_argument("hermite_transform: quad_order must exceed max_degree");
  require_tensor_dim(space);
  const auto indices = multi_indices_up_to(space.dim(), max_degree);
  std::vector<double> acc(indices.size(), 0.0);
  const std::size_t n = space.dim();
  for_each_tensor_node(space, quad_order, [&](const Vector& x, double w) {
    const double fx = w * f.value(x);
    std::vector<std::vector<double>> tables(n);
    for (std::size_t k = 0; k < n; ++k)
      tables[k] = normalized_hermite_values(static_cast<std::size_t>(max_degree),
                                            x(static_cast<Eigen::Index>(k)) /
                                                space.sqrt_eigenvalues()(static_cast<Eigen::Index>(k)));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      double basis = 1.0;
      for (std::size_t k = 0; k < n; ++k) basis *= tables[k][indices[i][k]];
      acc[i] += fx * basis;
    }
  });
  HermiteExpansion out(space.dim(), max_degree);
  for (std::size_t i = 0; i < indices.size(); ++i) out.set(indices[i], acc[i]);
  return out;
}

}  // namespace gausstrace
