#pragma once

// Second-order forward-mode dual scalar: carries a value, a gradient seed
// vector and a full Hessian seed matrix through arithmetic. N is the number
// of independent variables (Eigen::Dynamic for a runtime-sized seed space;
// constants then carry empty seeds, which every operation treats as zero).

#include <Eigen/Core>
#include <cmath>

namespace emlag {

template <int N = Eigen::Dynamic>
struct Dual2 {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  double val = 0.0;
  Vec g;
  Mat h;

  Dual2() { init_zero(); }
  Dual2(double v) : val(v) { init_zero(); }  // NOLINT: implicit by design
  Dual2(double v, const Vec& grad, const Mat& hess) : val(v), g(grad), h(hess) {}

  // Independent variable number `index` out of `n`.
  static Dual2 variable(double v, Eigen::Index index, Eigen::Index n) {
    Dual2 d;
    d.val = v;
    d.g.setZero(n);
    d.h.setZero(n, n);
    d.g[index] = 1.0;
    return d;
  }

  bool is_const() const { return g.size() == 0; }

 private:
  void init_zero() {
    if constexpr (N != Eigen::Dynamic) {
      g.setZero();
      h.setZero();
    }
  }
};

namespace detail {

// dst += a*src, where src may be an empty (constant) seed.
template <class D, class S>
inline void axpy(D& dst, double a, const S& src) {
  if (src.size() != 0) {
    if (dst.size() == 0)
      dst = a * src;
    else
      dst += a * src;
  }
}

// dst += s*(u*v' + v*u'); keeps exact elementwise symmetry.
template <class M, class V>
inline void sym_outer(M& dst, double s, const V& u, const V& v) {
  if (u.size() == 0 || v.size() == 0) return;
  if (dst.size() == 0) {
    dst = s * (u * v.transpose() + v * u.transpose());
  } else {
    dst += s * (u * v.transpose() + v * u.transpose());
  }
}

}  // namespace detail

template <int N>
inline Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.val + b.val);
  r.g = a.g;
  r.h = a.h;
  detail::axpy(r.g, 1.0, b.g);
  detail::axpy(r.h, 1.0, b.h);
  return r;
}

template <int N>
inline Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.val - b.val);
  r.g = a.g;
  r.h = a.h;
  detail::axpy(r.g, -1.0, b.g);
  detail::axpy(r.h, -1.0, b.h);
  return r;
}

template <int N>
inline Dual2<N> operator-(const Dual2<N>& a) {
  Dual2<N> r(-a.val);
  if (a.g.size() != 0) {
    r.g = -a.g;
    r.h = -a.h;
  }
  return r;
}

template <int N>
inline Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r(a.val * b.val);
  detail::axpy(r.g, b.val, a.g);
  detail::axpy(r.g, a.val, b.g);
  detail::axpy(r.h, b.val, a.h);
  detail::axpy(r.h, a.val, b.h);
  detail::sym_outer(r.h, 1.0, a.g, b.g);
  return r;
}

template <int N>
inline Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
  const double inv = 1.0 / b.val;
  Dual2<N> r(a.val * inv);
  // From a = r*b: g_a = g_r b + r g_b, h_a = h_r b + g_r g_b' + g_b g_r' + r h_b.
  detail::axpy(r.g, inv, a.g);
  detail::axpy(r.g, -r.val * inv, b.g);
  detail::axpy(r.h, inv, a.h);
  detail::axpy(r.h, -r.val * inv, b.h);
  detail::sym_outer(r.h, -inv, r.g, b.g);
  return r;
}

template <int N> inline Dual2<N> operator+(const Dual2<N>& a, double b) { return a + Dual2<N>(b); }
template <int N> inline Dual2<N> operator+(double a, const Dual2<N>& b) { return Dual2<N>(a) + b; }
template <int N> inline Dual2<N> operator-(const Dual2<N>& a, double b) { return a - Dual2<N>(b); }
template <int N> inline Dual2<N> operator-(double a, const Dual2<N>& b) { return Dual2<N>(a) - b; }

template <int N>
inline Dual2<N> operator*(const Dual2<N>& a, double b) {
  Dual2<N> r(a.val * b);
  detail::axpy(r.g, b, a.g);
  detail::axpy(r.h, b, a.h);
  return r;
}
template <int N> inline Dual2<N> operator*(double a, const Dual2<N>& b) { return b * a; }
template <int N> inline Dual2<N> operator/(const Dual2<N>& a, double b) { return a * (1.0 / b); }
template <int N> inline Dual2<N> operator/(double a, const Dual2<N>& b) { return Dual2<N>(a) / b; }

template <int N>
inline Dual2<N>& operator+=(Dual2<N>& a, const Dual2<N>& b) { a = a + b; return a; }
template <int N>
inline Dual2<N>& operator-=(Dual2<N>& a, const Dual2<N>& b) { a = a - b; return a; }
template <int N>
inline Dual2<N>& operator*=(Dual2<N>& a, const Dual2<N>& b) { a = a * b; return a; }

// Chain rule for a scalar function with derivatives f', f'' at a.val.
template <int N>
inline Dual2<N> chain(const Dual2<N>& a, double f, double fp, double fpp) {
  Dual2<N> r(f);
  detail::axpy(r.g, fp, a.g);
  detail::axpy(r.h, fp, a.h);
  detail::sym_outer(r.h, 0.5 * fpp, a.g, a.g);
  return r;
}

template <int N>
inline Dual2<N> sin(const Dual2<N>& a) {
  const double s = std::sin(a.val), c = std::cos(a.val);
  return chain(a, s, c, -s);
}

template <int N>
inline Dual2<N> cos(const Dual2<N>& a) {
  const double s = std::sin(a.val), c = std::cos(a.val);
  return chain(a, c, -s, -c);
}

template <int N>
inline Dual2<N> exp(const Dual2<N>& a) {
  const double e = std::exp(a.val);
  return chain(a, e, e, e);
}

template <int N>
inline Dual2<N> sqrt(const Dual2<N>& a) {
  const double s = std::sqrt(a.val);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.val));
}

template <int N>
inline Dual2<N> pow(const Dual2<N>& a, int n) {
  Dual2<N> r(1.0);
  for (int k = 0; k < n; ++k) r *= a;
  return r;
}

using DynDual = Dual2<Eigen::Dynamic>;

}  // namespace emlag
