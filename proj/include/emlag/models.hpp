#pragma once

// Catalog of magnetic Lagrangians for three-phase machines, with their
// physical parameters and the matching closed-form flux / torque / energy
// expressions. The Lagrangians are scalar-generic so the same code path
// evaluates with plain doubles and with Dual2 seeds; every richer kind
// degenerates bit-for-bit onto the simpler one when its extra parameters
// vanish, because all kinds share one evaluation path per machine family.

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "emlag/dual.hpp"
#include "emlag/saturation.hpp"
#include "emlag/scalar_complex.hpp"
#include "emlag/wirtinger.hpp"

namespace emlag {

enum class ModelKind {
  pm_standard,
  pm_saliency,
  pm_sat_saliency,
  im_standard,
  im_sat,
  im_sat_harmonic,
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
inline bool is_pm(ModelKind k) {
  return k == ModelKind::pm_standard || k == ModelKind::pm_saliency ||
         k == ModelKind::pm_sat_saliency;
}

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Permanent-magnet machine parameters. lambda = (L_d+L_q)/2 and
// mu = (L_q-L_d)/2 are carried as saturation curves over the magnetizing
// modulus rho = |i_s + ibar e^{j n_p theta}|; unsaturated kinds use constant
// curves. phibar = lambda*ibar (pointwise along the curve when saturated).
struct PmParams {
  int n_p = 1;
  double J = 0.0;
  double R_s = 0.0;
  SaturationCurve lambda;
  SaturationCurve mu = SaturationCurve::constant(0.0);
  double ibar = 0.0;

  double lambda0() const { return lambda.coefficients()[0]; }
  // Rotor-magnet flux; meaningful as a single number only for constant lambda.
  double phibar() const {
    if (!lambda.is_constant())
      throw std::logic_error("phibar is pointwise for a saturated lambda curve");
    return lambda0() * ibar;
  }
  double rho_max() const { return std::min(lambda.rho_max(), mu.rho_max()); }
  void validate() const;
  bool operator==(const PmParams&) const = default;
};

struct Harmonic {
  int nu = 0;
  int sigma = +1;  // +1 or -1
  double L = 0.0;
  bool operator==(const Harmonic&) const = default;
};

// Induction machine parameters; L_m is a curve over rho = |i_s + i_r e^{j n_p theta}|.
struct ImParams {
  int n_p = 1;
  double J = 0.0;
  double R_s = 0.0;
  double R_r = 0.0;
  SaturationCurve L_m;
  double L_fs = 0.0;
  double L_fr = 0.0;
  std::vector<Harmonic> harmonics;

  double rho_max() const { return L_m.rho_max(); }
  void validate() const;
  bool operator==(const ImParams&) const = default;
};

class Model {
 public:
  Model(ModelKind kind, PmParams params);
  Model(ModelKind kind, ImParams params);

  ModelKind kind() const { return kind_; }
  bool is_pm() const { return emlag::is_pm(kind_); }
  const PmParams& pm() const;
  const ImParams& im() const;

  int n_p() const { return is_pm() ? pm_.n_p : im_.n_p; }
  double inertia() const { return is_pm() ? pm_.J : im_.J; }
  double R_s() const { return is_pm() ? pm_.R_s : im_.R_s; }
  int n_currents() const { return is_pm() ? 1 : 2; }
  // Real current coordinates (2 per complex current).
  int n_current_coords() const { return 2 * n_currents(); }
  // Sensorless state dimension: (tau_L, theta, omega, currents).
  int state_dim() const { return 3 + n_current_coords(); }
  double rho_max() const { return is_pm() ? pm_.rho_max() : im_.rho_max(); }

  // Built-in desk-scale parameter sets.
  static Model default_model(ModelKind kind);

  bool operator==(const Model& o) const {
    return kind_ == o.kind_ && pm_ == o.pm_ && im_ == o.im_;
  }

 private:
  ModelKind kind_;
  PmParams pm_;
  ImParams im_;
};

// ---------------------------------------------------------------------------
// Scalar-generic Lagrangians. theta and the currents share one seed space.
// ---------------------------------------------------------------------------

template <class S>
S pm_lagrangian(const PmParams& p, const S& theta, const Cx<S>& is) {
  const Cx<S> e = rotor(static_cast<double>(p.n_p) * theta);
  const Cx<S> w = is + p.ibar * e;  // magnetizing current
  const S s = squared_norm(w);      // rho^2
  const S lam = p.lambda.template value_at_rho2<S>(s);
  const S mu = p.mu.template value_at_rho2<S>(s);
  const Cx<S> u = is * conj(e);
  return 0.5 * lam * s - 0.5 * mu * (u.re * u.re - u.im * u.im);
}

template <class S>
S im_lagrangian(const ImParams& p, const S& theta, const Cx<S>& ir, const Cx<S>& is) {
  const Cx<S> e = rotor(static_cast<double>(p.n_p) * theta);
  const Cx<S> v = is + ir * e;
  const S s = squared_norm(v);  // rho^2
  const S lm = p.L_m.template value_at_rho2<S>(s);
  S acc = 0.5 * lm * s + 0.5 * p.L_fr * squared_norm(ir) + 0.5 * p.L_fs * squared_norm(is);
  for (const Harmonic& h : p.harmonics) {
    const Cx<S> eh = rotor(static_cast<double>(h.sigma * h.nu * p.n_p) * theta);
    // L_nu * Re(i_s i_r* e^{-j sigma nu n_p theta})
    const Cx<S> z = (is * conj(ir)) * conj(eh);
    acc = acc + h.L * z.re;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Concrete evaluations (all range-check rho against the curve domain).
// ---------------------------------------------------------------------------

using Complex = std::complex<double>;

double eval_lagrangian(const Model& model, double theta, std::span<const Complex> currents);

// Closed-form flux: {phi_s} for PM, {phi_r, phi_s} for IM.
std::vector<Complex> analytic_flux(const Model& model, double theta,
                                   std::span<const Complex> currents);

double analytic_torque(const Model& model, double theta, std::span<const Complex> currents);

inline std::pair<double, double> saturation_eval(const SaturationCurve& curve, double rho) {
  return curve.eval(rho);
}

// Bundle of Lagrangian derivatives at an operating point, in real current
// coordinates ordered ((i_r), i_s) with theta last. flux is the gradient over
// the current coordinates (equal to 2 dL/di* componentwise in complex form),
// mass the current-current Hessian block, dflux_dtheta the mixed column.
struct LagrangianDerivatives {
  double value = 0.0;
  double dL_dtheta = 0.0;
  double d2L_dtheta2 = 0.0;
  Eigen::VectorXd flux;
  Eigen::MatrixXd mass;
  Eigen::VectorXd dflux_dtheta;
};

LagrangianDerivatives lagrangian_derivatives(const Model& model, double theta,
                                             std::span<const Complex> currents);

// Layout of the real coordinate vector ((i_r), i_s, theta) for the generic
// Wirtinger drivers.
inline Layout model_layout(const Model& model) {
  return Layout{model.n_currents(), 1};
}

// Full Wirtinger package of the magnetic Lagrangian at an operating point,
// computed through the generic dynamic-seed driver.
WirtingerDerivatives lagrangian_wirtinger(const Model& model, double theta,
                                          std::span<const Complex> currents);

// The model's Lagrangian as a RealFunction over ((i_r), i_s, theta).
RealFunction lagrangian_function(const Model& model);

}  // namespace emlag
