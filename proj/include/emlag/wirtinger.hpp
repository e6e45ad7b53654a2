#pragma once

// Gradient/Hessian drivers over real coordinate vectors, plus the mapping
// from real partials to Wirtinger partials. Coordinate layout: the first
// 2*n_complex entries are (Re, Im) pairs of the complex coordinates
// q_k = x_{2k} + j*x_{2k+1}; the remaining n_real entries stay real.

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "emlag/dual.hpp"

namespace emlag {

struct Layout {
  int n_complex = 0;
  int n_real = 0;
  int size() const { return 2 * n_complex + n_real; }
};

// Wirtinger partials dL/dq, dL/dq* per complex coordinate, plus the plain
// partials over the trailing real coordinates and the full real Hessian.
struct WirtingerDerivatives {
  double value = 0.0;
  Eigen::VectorXcd d_dq;
  Eigen::VectorXcd d_dqstar;
  Eigen::VectorXd d_dreal;
  Eigen::MatrixXd real_hessian;
};

using RealFunction = std::function<DynDual(std::span<const DynDual>)>;

inline DynDual eval_seeded(const RealFunction& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  std::vector<DynDual> seeds;
  seeds.reserve(static_cast<size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    seeds.push_back(DynDual::variable(x[k], k, n));
  return f(std::span<const DynDual>(seeds.data(), seeds.size()));
}

inline Eigen::VectorXd real_gradient(const RealFunction& f, const Eigen::VectorXd& x) {
  DynDual r = eval_seeded(f, x);
  if (r.is_const()) return Eigen::VectorXd::Zero(x.size());
  return r.g;
}

inline Eigen::MatrixXd real_hessian(const RealFunction& f, const Eigen::VectorXd& x) {
  DynDual r = eval_seeded(f, x);
  if (r.is_const()) return Eigen::MatrixXd::Zero(x.size(), x.size());
  return r.h;
}

// Assemble Wirtinger partials from a real gradient:
//   2 dL/dq   = dL/dx - j dL/dy,   2 dL/dq* = dL/dx + j dL/dy.
inline WirtingerDerivatives wirtinger_from_real(double value,
                                                const Eigen::VectorXd& grad,
                                                const Eigen::MatrixXd& hess,
                                                const Layout& layout) {
  if (grad.size() != layout.size())
    throw std::invalid_argument("wirtinger_from_real: gradient length " +
                                std::to_string(grad.size()) +
                                " does not match layout size " +
                                std::to_string(layout.size()));
  if (hess.size() != 0 &&
      (hess.rows() != layout.size() || hess.cols() != layout.size()))
    throw std::invalid_argument("wirtinger_from_real: hessian shape does not match layout");

  WirtingerDerivatives w;
  w.value = value;
  w.d_dq.resize(layout.n_complex);
  w.d_dqstar.resize(layout.n_complex);
  for (int k = 0; k < layout.n_complex; ++k) {
    const double dx = grad[2 * k];
    const double dy = grad[2 * k + 1];
    w.d_dq[k] = std::complex<double>(0.5 * dx, -0.5 * dy);
    w.d_dqstar[k] = std::complex<double>(0.5 * dx, 0.5 * dy);
  }
  w.d_dreal = grad.tail(layout.n_real);
  w.real_hessian = hess;
  return w;
}

inline WirtingerDerivatives wirtinger_from_real(const Eigen::VectorXd& grad,
                                                const Layout& layout) {
  return wirtinger_from_real(0.0, grad, Eigen::MatrixXd(), layout);
}

inline WirtingerDerivatives wirtinger_evaluate(const RealFunction& f,
                                               const Eigen::VectorXd& x,
                                               const Layout& layout) {
  if (x.size() != layout.size())
    throw std::invalid_argument("wirtinger_evaluate: point length does not match layout");
  DynDual r = eval_seeded(f, x);
  Eigen::VectorXd g = r.is_const() ? Eigen::VectorXd::Zero(x.size()) : Eigen::VectorXd(r.g);
  Eigen::MatrixXd h = r.is_const() ? Eigen::MatrixXd::Zero(x.size(), x.size())
                                   : Eigen::MatrixXd(r.h);
  return wirtinger_from_real(r.val, g, h, layout);
}

}  // namespace emlag
