#pragma once

// Minimal complex arithmetic over a generic real scalar, so the magnetic
// Lagrangians can be written once and evaluated with plain doubles or with
// Dual2 seeds. std::complex is not usable here (its value_type must be a
// floating-point type).

#include <complex>
#include <type_traits>

namespace emlag {

template <class T>
struct Cx {
  T re{};
  T im{};

  Cx() = default;
  Cx(T r, T i) : re(std::move(r)), im(std::move(i)) {}
  explicit Cx(T r) : re(std::move(r)), im(T(0.0)) {}
  explicit Cx(const std::complex<double>& z)
      : re(T(z.real())), im(T(z.imag())) {}
};

template <class T>
inline Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) {
  return {a.re + b.re, a.im + b.im};
}

template <class T>
inline Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) {
  return {a.re - b.re, a.im - b.im};
}

template <class T>
inline Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
inline Cx<T> operator*(const T& s, const Cx<T>& z) {
  return {s * z.re, s * z.im};
}

template <class T>
  requires(!std::is_same_v<T, double>)
inline Cx<T> operator*(double s, const Cx<T>& z) {
  return {s * z.re, s * z.im};
}

template <class T>
inline Cx<T> conj(const Cx<T>& z) {
  return {z.re, -z.im};
}

template <class T>
inline T squared_norm(const Cx<T>& z) {
  return z.re * z.re + z.im * z.im;
}

// Re(a * conj(b))
template <class T>
inline T dot_re(const Cx<T>& a, const Cx<T>& b) {
  return a.re * b.re + a.im * b.im;
}

// e^{j*angle}
template <class T>
inline Cx<T> rotor(const T& angle) {
  using std::cos;
  using std::sin;
  return {cos(angle), sin(angle)};
}

}  // namespace emlag
