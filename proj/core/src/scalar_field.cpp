#include "gausstrace/scalar_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  const double h = fd_step(x);
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + h;
    const double up = f(probe);
    probe(k) = x(k) - h;
    const double down = f(probe);
    probe(k) = x(k);
    g(k) = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& x) {
  const double h = fd_step(x);
  const Vector g0 = g(x);
  Matrix jac(g0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + h;
    const Vector up = g(probe);
    probe(k) = x(k) - h;
    const Vector down = g(probe);
    probe(k) = x(k);
    jac.col(k) = (up - down) / (2.0 * h);
  }
  return jac;
}

DerivativeCheck check_derivatives(const ScalarField& f, const GaussianSpace& space, const SamplerState& state,
                                  std::size_t probes) {
  DerivativeCheck report;
  report.probes = probes;
  const auto n = static_cast<Eigen::Index>(space.dim());
  for (std::size_t i = 0; i < probes; ++i) {
    CounterRng rng(state, i);
    Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = space.sqrt_eigenvalues()(k) * rng.normal();
    const Vector grad = f.gradient(x);
    const Vector fd = fd_gradient(f.value, x);
    const double gscale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    report.max_gradient_error = std::max(report.max_gradient_error, (grad - fd).cwiseAbs().maxCoeff() / gscale);
    if (f.has_hessian()) {
      const Matrix hess = f.hessian(x);
      const Matrix fdh = fd_jacobian(f.gradient, x);
      const double hscale = std::max(1.0, fdh.cwiseAbs().maxCoeff());
      report.max_hessian_error = std::max(report.max_hessian_error, (hess - fdh).cwiseAbs().maxCoeff() / hscale);
    }
  }
  return report;
}

namespace fields {

ScalarField constant(std::size_t dim, double c) {
  const auto n = static_cast<Eigen::Index>(dim);
  std::ostringstream label;
  label << c;
  return ScalarField{[c](const Vector&) { return c; },
                     [n](const Vector&) -> Vector { return Vector::Zero(n); },
                     [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); },
                     Smoothness::smooth,
                     DerivativeSource::analytic,
                     label.str()};
}

ScalarField linear(const Vector& a) {
  const auto n = a.size();
  return ScalarField{[a](const Vector& x) { return a.dot(x); },
                     [a](const Vector&) -> Vector { return a; },
                     [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); },
                     Smoothness::smooth,
                     DerivativeSource::analytic,
                     "linear"};
}

ScalarField coordinate(std::size_t dim, std::size_t j) {
  if (j >= dim) throw std::out_of_range("fields::coordinate: index out of range");
  Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
  a(static_cast<Eigen::Index>(j)) = 1.0;
  ScalarField f = linear(a);
  f.label = "x" + std::to_string(j + 1);
  return f;
}

ScalarField diagonal_quadratic(const Vector& a, double c) {
  return ScalarField{[a, c](const Vector& x) { return (a.array() * x.array().square()).sum() + c; },
                     [a](const Vector& x) -> Vector { return 2.0 * a.cwiseProduct(x); },
                     [a](const Vector&) -> Matrix { return Matrix((2.0 * a).asDiagonal()); },
                     Smoothness::smooth,
                     DerivativeSource::analytic,
                     "quadratic"};
}

ScalarField coordinate_square(std::size_t dim, std::size_t j) {
  if (j >= dim) throw std::out_of_range("fields::coordinate_square: index out of range");
  Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
  a(static_cast<Eigen::Index>(j)) = 1.0;
  ScalarField f = diagonal_quadratic(a, 0.0);
  f.label = "x" + std::to_string(j + 1) + "^2";
  return f;
}

ScalarField gaussian_bump(const Vector& center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("fields::gaussian_bump: width must be positive");
  const auto n = center.size();
  auto value = [center, width](const Vector& x) { return std::exp(-(x - center).squaredNorm() / width); };
  return ScalarField{value,
                     [=](const Vector& x) -> Vector { return (-2.0 / width) * value(x) * (x - center); },
                     [=](const Vector& x) -> Matrix {
                       const Vector d = x - center;
                       const double v = value(x);
                       return (4.0 / (width * width)) * v * d * d.transpose() -
                              (2.0 / width) * v * Matrix::Identity(n, n);
                     },
                     Smoothness::smooth,
                     DerivativeSource::analytic,
                     "bump"};
}

namespace {

struct Smoothstep {
  double value, first, second;
};

// Quintic smoothstep on tau in [0, 1]; C^2 at both ends.
Smoothstep smoothstep(double tau) {
  if (tau <= 0.0) return {0.0, 0.0, 0.0};
  if (tau >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = tau * tau, t3 = t2 * tau;
  return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - tau) * (1.0 - tau),
          60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)};
}

}  // namespace

ScalarField boundary_cutoff(const ScalarField& u, const ScalarField& G, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("fields::boundary_cutoff: eps must be positive");
  // eta(xi) = S((-xi - eps) / eps)
  auto eta = [eps](double xi) {
    const Smoothstep s = smoothstep((-xi - eps) / eps);
    return Smoothstep{s.value, -s.first / eps, s.second / (eps * eps)};
  };
  ScalarField f;
  f.value = [u, G, eta](const Vector& x) { return u.value(x) * eta(G.value(x)).value; };
  f.gradient = [u, G, eta](const Vector& x) -> Vector {
    const Smoothstep e = eta(G.value(x));
    return e.value * u.gradient(x) + u.value(x) * e.first * G.gradient(x);
  };
  if (u.has_hessian() && G.has_hessian()) {
    f.hessian = [u, G, eta](const Vector& x) -> Matrix {
      const Smoothstep e = eta(G.value(x));
      const Vector gu = u.gradient(x);
      const Vector gG = G.gradient(x);
      const double uv = u.value(x);
      return e.value * u.hessian(x) + e.first * (gu * gG.transpose() + gG * gu.transpose()) +
             uv * (e.second * gG * gG.transpose() + e.first * G.hessian(x));
    };
  }
  f.smoothness = u.smoothness;
  f.label = u.label + "*cutoff(" + std::to_string(eps) + ")";
  return f;
}

ScalarField abs_power(const ScalarField& u, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("fields::abs_power: q must be >= 1");
  ScalarField f;
  f.value = [u, q](const Vector& x) { return std::pow(std::abs(u.value(x)), q); };
  f.gradient = [u, q](const Vector& x) -> Vector {
    const double v = u.value(x);
    if (v == 0.0) return Vector::Zero(x.size());
    return q * std::pow(std::abs(v), q - 2.0) * v * u.gradient(x);
  };
  f.smoothness = q >= 2.0 ? u.smoothness : Smoothness::lipschitz;
  f.label = "|" + u.label + "|^" + std::to_string(q);
  return f;
}

ScalarField sum(const ScalarField& a, const ScalarField& b) {
  ScalarField f;
  f.value = [a, b](const Vector& x) { return a.value(x) + b.value(x); };
  f.gradient = [a, b](const Vector& x) -> Vector { return a.gradient(x) + b.gradient(x); };
  if (a.has_hessian() && b.has_hessian())
    f.hessian = [a, b](const Vector& x) -> Matrix { return a.hessian(x) + b.hessian(x); };
  f.smoothness = (a.smoothness == Smoothness::smooth && b.smoothness == Smoothness::smooth) ? Smoothness::smooth
                                                                                             : Smoothness::lipschitz;
  f.derivatives = (a.derivatives == DerivativeSource::analytic && b.derivatives == DerivativeSource::analytic)
                      ? DerivativeSource::analytic
                      : DerivativeSource::finite_difference;
  f.label = a.label + "+" + b.label;
  return f;
}

ScalarField product(const ScalarField& a, const ScalarField& b) {
  ScalarField f;
  f.value = [a, b](const Vector& x) { return a.value(x) * b.value(x); };
  f.gradient = [a, b](const Vector& x) -> Vector { return b.value(x) * a.gradient(x) + a.value(x) * b.gradient(x); };
  if (a.has_hessian() && b.has_hessian()) {
    f.hessian = [a, b](const Vector& x) -> Matrix {
      const Vector ga = a.gradient(x), gb = b.gradient(x);
      return b.value(x) * a.hessian(x) + a.value(x) * b.hessian(x) + ga * gb.transpose() + gb * ga.transpose();
    };
  }
  f.smoothness = (a.smoothness == Smoothness::smooth && b.smoothness == Smoothness::smooth) ? Smoothness::smooth
                                                                                             : Smoothness::lipschitz;
  f.derivatives = (a.derivatives == DerivativeSource::analytic && b.derivatives == DerivativeSource::analytic)
                      ? DerivativeSource::analytic
                      : DerivativeSource::finite_difference;
  f.label = "(" + a.label + ")*(" + b.label + ")";
  return f;
}

ScalarField scaled(const ScalarField& a, double c) {
  ScalarField f = a;
  f.value = [a, c](const Vector& x) { return c * a.value(x); };
  f.gradient = [a, c](const Vector& x) -> Vector { return c * a.gradient(x); };
  if (a.has_hessian()) f.hessian = [a, c](const Vector& x) -> Matrix { return c * a.hessian(x); };
  std::ostringstream label;
  label << c << "*" << a.label;
  f.label = label.str();
  return f;
}

ScalarField from_value(std::function<double(const Vector&)> value, std::string label) {
  ScalarField f;
  f.value = value;
  f.gradient = [value](const Vector& x) -> Vector { return fd_gradient(value, x); };
  f.hessian = [value](const Vector& x) -> Matrix {
    return fd_jacobian([value](const Vector& y) -> Vector { return fd_gradient(value, y); }, x);
  };
  f.derivatives = DerivativeSource::finite_difference;
  f.label = std::move(label);
  return f;
}

}  // namespace fields

namespace vector_fields {

VectorFieldH single(std::size_t dim, std::size_t k, const ScalarField& phi) {
  if (k >= dim) throw std::out_of_range("vector_fields::single: index out of range");
  VectorFieldH field;
  field.components.assign(dim, fields::constant(dim, 0.0));
  field.components[k] = phi;
  field.label = phi.label + "*v" + std::to_string(k + 1);
  return field;
}

VectorFieldH unit_normal(const GaussianSpace& space, const ScalarField& G) {
  if (!G.has_hessian()) throw std::invalid_argument("vector_fields::unit_normal: G needs a Hessian");
  const Vector lambda = space.eigenvalues();
  const Vector sqrt_lambda = space.sqrt_eigenvalues();
  VectorFieldH field;
  field.label = "D_HG/|D_HG|";
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    ScalarField c;
    c.value = [G, sqrt_lambda, k](const Vector& x) {
      const Vector dg = sqrt_lambda.cwiseProduct(G.gradient(x));
      return dg(k) / dg.norm();
    };
    c.gradient = [G, lambda, sqrt_lambda, k](const Vector& x) -> Vector {
      const Vector grad = G.gradient(x);
      const Matrix hess = G.hessian(x);
      const double norm = std::sqrt((lambda.array() * grad.array().square()).sum());
      // d_j |D_HG| = sum_i lambda_i d_i G d_ij G / |D_HG|
      const Vector dnorm = hess * lambda.cwiseProduct(grad) / norm;
      return sqrt_lambda(k) * (Vector(hess.row(k).transpose()) / norm - grad(k) * dnorm / (norm * norm));
    };
    c.label = "n" + std::to_string(k + 1);
    field.components.push_back(std::move(c));
  }
  return field;
}

}  // namespace vector_fields

}  // namespace gausstrace
