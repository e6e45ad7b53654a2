#include "emlag/models.hpp"

#include <algorithm>
#include <cmath>

namespace emlag {

namespace {

constexpr int kGridSamples = 257;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

double curve_rho_cap(const SaturationCurve& a) {
  return a.rho_max();
}

// rho^2 of the PM magnetizing current, plain doubles.
double pm_rho2(const PmParams& p, double theta, Complex is) {
  const double c = std::cos(p.n_p * theta), s = std::sin(p.n_p * theta);
  const double wre = is.real() + p.ibar * c;
  const double wim = is.imag() + p.ibar * s;
  return wre * wre + wim * wim;
}

double im_rho2(const ImParams& p, double theta, Complex ir, Complex is) {
  const double c = std::cos(p.n_p * theta), s = std::sin(p.n_p * theta);
  const double vre = is.real() + ir.real() * c - ir.imag() * s;
  const double vim = is.imag() + ir.real() * s + ir.imag() * c;
  return vre * vre + vim * vim;
}

void check_currents(const Model& model, std::span<const Complex> currents) {
  if (static_cast<int>(currents.size()) != model.n_currents())
    throw std::invalid_argument(std::string("model kind ") + to_string(model.kind()) +
                                " takes " + std::to_string(model.n_currents()) +
                                " complex current(s), got " +
                                std::to_string(currents.size()));
  for (const Complex& c : currents)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("non-finite current");
}

double checked_rho2(const Model& model, double theta, std::span<const Complex> currents) {
  check_currents(model, currents);
  if (model.is_pm()) {
    const double s = pm_rho2(model.pm(), theta, currents[0]);
    model.pm().lambda.check_rho2(s);
    model.pm().mu.check_rho2(s);
    return s;
  }
  const double s = im_rho2(model.im(), theta, currents[0], currents[1]);
  model.im().L_m.check_rho2(s);
  return s;
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::pm_standard: return "pm_standard";
    case ModelKind::pm_saliency: return "pm_saliency";
    case ModelKind::pm_sat_saliency: return "pm_sat_saliency";
    case ModelKind::im_standard: return "im_standard";
    case ModelKind::im_sat: return "im_sat";
    case ModelKind::im_sat_harmonic: return "im_sat_harmonic";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::pm_standard, ModelKind::pm_saliency,
                      ModelKind::pm_sat_saliency, ModelKind::im_standard,
                      ModelKind::im_sat, ModelKind::im_sat_harmonic})
    if (name == to_string(k)) return k;
  throw ValidationError("unknown model kind \"" + name + "\"");
}

void PmParams::validate() const {
  require(n_p >= 1, "n_p must be a positive integer");
  require(J > 0.0, "J must be positive");
  require(R_s > 0.0, "R_s must be positive");
  require(ibar >= 0.0, "ibar must be nonnegative");
  const double cap = rho_max();
  require(cap > 0.0, "rho range must be nonempty");
  if (std::isfinite(cap)) {
    for (int k = 0; k < kGridSamples; ++k) {
      const double rho = cap * static_cast<double>(k) / (kGridSamples - 1);
      const double lam = lambda.value_at_rho2(rho * rho);
      const double m = mu.value_at_rho2(rho * rho);
      require(lam > 0.0, "lambda(rho) must stay positive on the valid range (fails at rho=" +
                             std::to_string(rho) + ")");
      require(std::abs(m) < lam,
              "|mu(rho)| must stay below lambda(rho) on the valid range (fails at rho=" +
                  std::to_string(rho) + ")");
    }
  } else {
    require(lambda0() > 0.0, "lambda must be positive");
    require(std::abs(mu.coefficients()[0]) < lambda0(), "|mu| must be below lambda");
  }
}

void ImParams::validate() const {
  require(n_p >= 1, "n_p must be a positive integer");
  require(J > 0.0, "J must be positive");
  require(R_s > 0.0, "R_s must be positive");
  require(R_r > 0.0, "R_r must be positive");
  require(L_fs > 0.0, "L_fs must be positive");
  require(L_fr > 0.0, "L_fr must be positive");
  const double cap = curve_rho_cap(L_m);
  require(cap > 0.0, "rho range must be nonempty");
  require(L_m.grid_min(kGridSamples) > 0.0,
          "L_m(rho) must stay positive on the valid range");
  const double lm0 = L_m.value_at_rho2(0.0);
  for (const Harmonic& h : harmonics) {
    require(h.nu >= 1, "harmonic order nu must be a positive integer");
    require(h.sigma == 1 || h.sigma == -1, "harmonic sign sigma_nu must be +1 or -1");
    require(std::abs(h.L) < 0.2 * lm0,
            "|L_nu| must be small against L_m (|L_nu| < 0.2 L_m)");
  }
}

Model::Model(ModelKind kind, PmParams params) : kind_(kind), pm_(std::move(params)) {
  require(emlag::is_pm(kind), std::string(to_string(kind)) + " does not take PM parameters");
  pm_.validate();
  if (kind == ModelKind::pm_standard) {
    require(pm_.lambda.is_constant(), "pm_standard takes a constant lambda");
    require(pm_.mu.is_constant() && pm_.mu.coefficients()[0] == 0.0,
            "pm_standard has no saliency term (mu must be 0)");
  } else if (kind == ModelKind::pm_saliency) {
    require(pm_.lambda.is_constant() && pm_.mu.is_constant(),
            "pm_saliency takes constant lambda and mu");
  }
}

Model::Model(ModelKind kind, ImParams params) : kind_(kind), im_(std::move(params)) {
  require(!emlag::is_pm(kind), std::string(to_string(kind)) + " does not take IM parameters");
  im_.validate();
  if (kind == ModelKind::im_standard) {
    require(im_.L_m.is_constant(), "im_standard takes a constant L_m");
    require(im_.harmonics.empty(), "im_standard has no space harmonics");
  } else if (kind == ModelKind::im_sat) {
    require(im_.harmonics.empty(), "im_sat has no space harmonics");
  }
}

const PmParams& Model::pm() const {
  if (!is_pm()) throw std::logic_error("not a PM model");
  return pm_;
}

const ImParams& Model::im() const {
  if (is_pm()) throw std::logic_error("not an IM model");
  return im_;
}

Model Model::default_model(ModelKind kind) {
  switch (kind) {
    case ModelKind::pm_standard: {
      PmParams p{.n_p = 3, .J = 0.01, .R_s = 1.0,
                 .lambda = SaturationCurve::constant(0.01), .ibar = 10.0};
      return Model(kind, p);
    }
    case ModelKind::pm_saliency: {
      PmParams p{.n_p = 3, .J = 0.01, .R_s = 1.0,
                 .lambda = SaturationCurve::constant(0.01),
                 .mu = SaturationCurve::constant(0.002), .ibar = 10.0};
      return Model(kind, p);
    }
    case ModelKind::pm_sat_saliency: {
      // rho_max below rho_s/sqrt(3) keeps the co-energy convex over the
      // whole declared range (the flux would peak beyond it)
      PmParams p{.n_p = 3, .J = 0.01, .R_s = 1.0,
                 .lambda = SaturationCurve::rational(0.01, 60.0, 34.0),
                 .mu = SaturationCurve::rational(0.002, 60.0, 34.0), .ibar = 10.0};
      return Model(kind, p);
    }
    case ModelKind::im_standard: {
      ImParams p{.n_p = 2, .J = 0.05, .R_s = 0.5, .R_r = 0.4,
                 .L_m = SaturationCurve::constant(0.1), .L_fs = 0.005, .L_fr = 0.005};
      return Model(kind, p);
    }
    case ModelKind::im_sat: {
      ImParams p{.n_p = 2, .J = 0.05, .R_s = 0.5, .R_r = 0.4,
                 .L_m = SaturationCurve::rational(0.1, 25.0, 14.0),
                 .L_fs = 0.005, .L_fr = 0.005};
      return Model(kind, p);
    }
    case ModelKind::im_sat_harmonic: {
      ImParams p{.n_p = 2, .J = 0.05, .R_s = 0.5, .R_r = 0.4,
                 .L_m = SaturationCurve::rational(0.1, 25.0, 14.0),
                 .L_fs = 0.005, .L_fr = 0.005,
                 .harmonics = {Harmonic{5, +1, 0.002}}};
      return Model(kind, p);
    }
  }
  throw std::logic_error("unreachable");
}

double eval_lagrangian(const Model& model, double theta, std::span<const Complex> currents) {
  checked_rho2(model, theta, currents);
  if (model.is_pm())
    return pm_lagrangian<double>(model.pm(), theta, Cx<double>(currents[0]));
  return im_lagrangian<double>(model.im(), theta, Cx<double>(currents[0]),
                               Cx<double>(currents[1]));
}

std::vector<Complex> analytic_flux(const Model& model, double theta,
                                   std::span<const Complex> currents) {
  const double s = checked_rho2(model, theta, currents);
  if (model.is_pm()) {
    const PmParams& p = model.pm();
    const Complex e = std::complex<double>(std::cos(p.n_p * theta), std::sin(p.n_p * theta));
    const Complex is = currents[0];
    const Complex w = is + p.ibar * e;
    const double lam = p.lambda.value_at_rho2(s);
    const double lam_s = p.lambda.slope_at_rho2(s);
    const double mu = p.mu.value_at_rho2(s);
    const double mu_s = p.mu.slope_at_rho2(s);
    const double Lam = lam + s * lam_s;  // lambda + (rho/2) lambda'
    const Complex u = is * std::conj(e);
    const double re_u2 = u.real() * u.real() - u.imag() * u.imag();
    const Complex phi_s = Lam * w - mu * std::conj(is) * (e * e) - (mu_s * re_u2) * w;
    return {phi_s};
  }
  const ImParams& p = model.im();
  const Complex e = std::complex<double>(std::cos(p.n_p * theta), std::sin(p.n_p * theta));
  const Complex ir = currents[0], is = currents[1];
  const Complex v = is + ir * e;
  const double lm = p.L_m.value_at_rho2(s);
  const double lm_s = p.L_m.slope_at_rho2(s);
  const double Lam = lm + s * lm_s;  // L_m + (rho/2) L_m'
  Complex phi_r = Lam * (v * std::conj(e)) + p.L_fr * ir;
  Complex phi_s = Lam * v + p.L_fs * is;
  for (const Harmonic& h : p.harmonics) {
    const double ang = h.sigma * h.nu * p.n_p * theta;
    const Complex eh = std::complex<double>(std::cos(ang), std::sin(ang));
    phi_r += h.L * is * std::conj(eh);
    phi_s += h.L * ir * eh;
  }
  return {phi_r, phi_s};
}

double analytic_torque(const Model& model, double theta, std::span<const Complex> currents) {
  const double s = checked_rho2(model, theta, currents);
  if (model.is_pm()) {
    const PmParams& p = model.pm();
    const Complex e = std::complex<double>(std::cos(p.n_p * theta), std::sin(p.n_p * theta));
    const Complex is = currents[0];
    const double lam_s = p.lambda.slope_at_rho2(s);
    const double mu = p.mu.value_at_rho2(s);
    const double mu_s = p.mu.slope_at_rho2(s);
    const double Lam = p.lambda.value_at_rho2(s) + s * lam_s;
    const Complex u = is * std::conj(e);
    const double re_u2 = u.real() * u.real() - u.imag() * u.imag();
    return p.n_p * (Lam * p.ibar * u.imag() - mu_s * p.ibar * u.imag() * re_u2 -
                    2.0 * mu * u.real() * u.imag());
  }
  const ImParams& p = model.im();
  const Complex e = std::complex<double>(std::cos(p.n_p * theta), std::sin(p.n_p * theta));
  const Complex ir = currents[0], is = currents[1];
  const double lm_s = p.L_m.slope_at_rho2(s);
  const double Lam = p.L_m.value_at_rho2(s) + s * lm_s;
  // Im(i_s i_r* e^{-j n_p theta})
  const Complex z = is * std::conj(ir) * std::conj(e);
  double tau = Lam * z.imag();
  for (const Harmonic& h : p.harmonics) {
    const double ang = h.sigma * h.nu * p.n_p * theta;
    const Complex eh = std::complex<double>(std::cos(ang), std::sin(ang));
    tau += h.L * h.sigma * h.nu * (is * std::conj(ir) * std::conj(eh)).imag();
  }
  return p.n_p * tau;
}

LagrangianDerivatives lagrangian_derivatives(const Model& model, double theta,
                                             std::span<const Complex> currents) {
  checked_rho2(model, theta, currents);
  LagrangianDerivatives out;
  if (model.is_pm()) {
    using D = Dual2<3>;
    const Cx<D> is{D::variable(currents[0].real(), 0, 3),
                   D::variable(currents[0].imag(), 1, 3)};
    const D r = pm_lagrangian<D>(model.pm(), D::variable(theta, 2, 3), is);
    out.value = r.val;
    out.dL_dtheta = r.g[2];
    out.d2L_dtheta2 = r.h(2, 2);
    out.flux = r.g.head<2>();
    out.mass = r.h.topLeftCorner<2, 2>();
    out.dflux_dtheta = r.h.topRightCorner<2, 1>();
  } else {
    using D = Dual2<5>;
    const Cx<D> ir{D::variable(currents[0].real(), 0, 5),
                   D::variable(currents[0].imag(), 1, 5)};
    const Cx<D> is{D::variable(currents[1].real(), 2, 5),
                   D::variable(currents[1].imag(), 3, 5)};
    const D r = im_lagrangian<D>(model.im(), D::variable(theta, 4, 5), ir, is);
    out.value = r.val;
    out.dL_dtheta = r.g[4];
    out.d2L_dtheta2 = r.h(4, 4);
    out.flux = r.g.head<4>();
    out.mass = r.h.topLeftCorner<4, 4>();
    out.dflux_dtheta = r.h.topRightCorner<4, 1>();
  }
  return out;
}

RealFunction lagrangian_function(const Model& model) {
  return [model](std::span<const DynDual> q) -> DynDual {
    if (model.is_pm()) {
      const Complex is(q[0].val, q[1].val);
      checked_rho2(model, q[2].val, std::span<const Complex>(&is, 1));
      return pm_lagrangian<DynDual>(model.pm(), q[2], Cx<DynDual>{q[0], q[1]});
    }
    const Complex cur[2] = {Complex(q[0].val, q[1].val), Complex(q[2].val, q[3].val)};
    checked_rho2(model, q[4].val, std::span<const Complex>(cur, 2));
    return im_lagrangian<DynDual>(model.im(), q[4], Cx<DynDual>{q[0], q[1]},
                                  Cx<DynDual>{q[2], q[3]});
  };
}

WirtingerDerivatives lagrangian_wirtinger(const Model& model, double theta,
                                          std::span<const Complex> currents) {
  check_currents(model, currents);
  Eigen::VectorXd x(model.n_current_coords() + 1);
  for (int k = 0; k < model.n_currents(); ++k) {
    x[2 * k] = currents[k].real();
    x[2 * k + 1] = currents[k].imag();
  }
  x[model.n_current_coords()] = theta;
  return wirtinger_evaluate(lagrangian_function(model), x, model_layout(model));
}

}  // namespace emlag
