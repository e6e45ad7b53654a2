#pragma once

// Inductance saturation curves: value and slope as functions of the
// magnetizing-current modulus rho. All supported families are smooth even
// functions of rho, so internally they are evaluated in s = rho^2; the
// Lagrangian code uses value_at_rho2() and never forms a sqrt.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace emlag {

enum class CurveKind { constant, rational, polynomial };

class SaturationCurve {
 public:
  SaturationCurve() : SaturationCurve(constant(0.0)) {}

  static SaturationCurve constant(double c0,
                                  double rho_max = std::numeric_limits<double>::infinity()) {
    return SaturationCurve(CurveKind::constant, {c0}, rho_max);
  }

  // lam0 / (1 + (rho/rho_s)^2)
  static SaturationCurve rational(double lam0, double rho_s, double rho_max) {
    return SaturationCurve(CurveKind::rational, {lam0, rho_s}, rho_max);
  }

  // c0 + c1*rho^2 + c2*rho^4 + ...
  static SaturationCurve polynomial(std::vector<double> coeffs, double rho_max) {
    return SaturationCurve(CurveKind::polynomial, std::move(coeffs), rho_max);
  }

  CurveKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double rho_max() const { return rho_max_; }
  bool is_constant() const { return kind_ == CurveKind::constant; }

  void check_rho2(double rho2) const {
    if (!(rho2 <= rho_max_ * rho_max_))
      throw std::domain_error("saturation curve evaluated at rho = " +
                              std::to_string(std::sqrt(rho2)) +
                              " outside the valid range [0, " +
                              std::to_string(rho_max_) + "]");
  }

  // Generic-scalar value at s = rho^2 (no range check; callers check once
  // on the double-valued rho^2 of the operating point).
  template <class S>
  S value_at_rho2(const S& s) const {
    switch (kind_) {
      case CurveKind::constant:
        return S(coeffs_[0]);
      case CurveKind::rational: {
        const double inv_rs2 = 1.0 / (coeffs_[1] * coeffs_[1]);
        return coeffs_[0] / (1.0 + s * inv_rs2);
      }
      case CurveKind::polynomial: {
        S acc(coeffs_.back());
        for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it)
          acc = acc * s + *it;
        return acc;
      }
    }
    return S(0.0);
  }

  // d(value)/d(rho^2) at s = rho^2.
  double slope_at_rho2(double s) const {
    switch (kind_) {
      case CurveKind::constant:
        return 0.0;
      case CurveKind::rational: {
        const double inv_rs2 = 1.0 / (coeffs_[1] * coeffs_[1]);
        const double d = 1.0 + s * inv_rs2;
        return -coeffs_[0] * inv_rs2 / (d * d);
      }
      case CurveKind::polynomial: {
        double acc = 0.0;
        for (size_t k = coeffs_.size(); k-- > 1;)
          acc = acc * s + static_cast<double>(k) * coeffs_[k];
        return acc;
      }
    }
    return 0.0;
  }

  // (value, d(value)/d(rho)) at rho, with range check.
  std::pair<double, double> eval(double rho) const {
    if (!(rho >= 0.0))
      throw std::domain_error("saturation curve requires rho >= 0, got " +
                              std::to_string(rho));
    const double s = rho * rho;
    check_rho2(s);
    return {value_at_rho2(s), 2.0 * rho * slope_at_rho2(s)};
  }

  // Smallest value over a sampled grid of the valid range; used by the
  // parameter validators. Unbounded constant curves sample trivially.
  double grid_min(int samples = 257, double fallback_range = 0.0) const {
    double range = rho_max_;
    if (!std::isfinite(range)) range = fallback_range;
    if (kind_ == CurveKind::constant) return coeffs_[0];
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const double rho = range * static_cast<double>(k) / (samples - 1);
      lo = std::min(lo, value_at_rho2(rho * rho));
    }
    return lo;
  }

  SaturationCurve scaled(double factor) const {
    std::vector<double> c = coeffs_;
    if (kind_ == CurveKind::rational) {
      c[0] *= factor;  // rho_s is a shape parameter, not an inductance
    } else {
      for (double& ck : c) ck *= factor;
    }
    return SaturationCurve(kind_, std::move(c), rho_max_);
  }

  bool operator==(const SaturationCurve& o) const {
    return kind_ == o.kind_ && coeffs_ == o.coeffs_ &&
           ((rho_max_ == o.rho_max_) ||
            (std::isinf(rho_max_) && std::isinf(o.rho_max_)));
  }

 private:
  SaturationCurve(CurveKind kind, std::vector<double> coeffs, double rho_max)
      : kind_(kind), coeffs_(std::move(coeffs)), rho_max_(rho_max) {
    if (coeffs_.empty()) throw std::invalid_argument("saturation curve needs coefficients");
    if (kind_ == CurveKind::constant && coeffs_.size() != 1)
      throw std::invalid_argument("constant curve takes exactly one coefficient");
    if (kind_ == CurveKind::rational) {
      if (coeffs_.size() != 2)
        throw std::invalid_argument("rational curve takes coefficients [lam0, rho_s]");
      if (!(coeffs_[1] > 0.0))
        throw std::invalid_argument("rational curve needs rho_s > 0");
    }
    if (!(rho_max_ > 0.0))
      throw std::invalid_argument("saturation curve needs rho_max > 0");
    if (kind_ != CurveKind::constant && !std::isfinite(rho_max_))
      throw std::invalid_argument("non-constant saturation curves need a finite rho_max");
  }

  CurveKind kind_;
  std::vector<double> coeffs_;
  double rho_max_;
};

}  // namespace emlag
