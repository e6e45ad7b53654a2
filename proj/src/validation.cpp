#include "emlag/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emlag/dynamics.hpp"
#include "emlag/energy.hpp"
#include "emlag/format.hpp"
#include "emlag/rng.hpp"

namespace emlag {

namespace {

constexpr double kPi = 3.14159265358979323846;

double current_cap(const Model& model) {
  const double cap = model.rho_max();
  if (!std::isfinite(cap)) return 10.0;
  const double head = cap - (model.is_pm() ? model.pm().ibar : 0.0);
  return std::min(10.0, 0.4 * std::max(head, 0.0) / model.n_currents());
}

SuiteResult make_result(const std::string& name, double worst, double tol) {
  SuiteResult r;
  r.name = name;
  r.worst = worst;
  r.tolerance = tol;
  r.passed = worst <= tol;
  std::ostringstream os;
  os << "worst " << fmt17(worst) << " vs tolerance " << fmt17(tol);
  r.detail = os.str();
  return r;
}

}  // namespace

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double floor = 1e-3 * scale;
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double denom = std::max({std::abs(a[k]), std::abs(b[k]), floor});
    if (denom > 0.0) worst = std::max(worst, std::abs(a[k] - b[k]) / denom);
  }
  return worst;
}

double random_theta(const Model& model, Rng& rng) {
  return rng.uniform(-2.0 * kPi, 2.0 * kPi) / model.n_p();
}

Complex random_current(const Model& model, Rng& rng) {
  const double cap = current_cap(model);
  const double mag = rng.log_uniform(1e-2 * cap, cap);
  return std::polar(mag, rng.uniform(0.0, 2.0 * kPi));
}

namespace {

SuiteResult ad_vs_analytic_suite(const Model& model, const ValidateOptions& opts) {
  Rng rng(opts.seed);
  std::vector<double> ad, cf;
  for (int i = 0; i < opts.points; ++i) {
    const double theta = random_theta(model, rng);
    std::vector<Complex> cur(model.n_currents());
    for (Complex& c : cur) c = random_current(model, rng);

    const LagrangianDerivatives lag = lagrangian_derivatives(model, theta, cur);
    std::vector<Complex> phi_cf = analytic_flux(model, theta, cur);
    for (Complex& p : phi_cf) p *= (1.0 + opts.oracle_perturbation);
    for (int k = 0; k < model.n_currents(); ++k) {
      ad.push_back(lag.flux[2 * k]);
      cf.push_back(phi_cf[k].real());
      ad.push_back(lag.flux[2 * k + 1]);
      cf.push_back(phi_cf[k].imag());
    }
    ad.push_back(lag.dL_dtheta);
    cf.push_back(analytic_torque(model, theta, cur) * (1.0 + opts.oracle_perturbation));
  }
  return make_result("ad_vs_analytic", max_relative_error(ad, cf), 1e-9);
}

SuiteResult legendre_suite(const Model& model, const ValidateOptions& opts) {
  Rng rng(opts.seed + 1);
  std::vector<double> leg, cf;
  for (int i = 0; i < opts.points; ++i) {
    const double theta = random_theta(model, rng);
    std::vector<Complex> cur(model.n_currents());
    for (Complex& c : cur) c = random_current(model, rng);
    leg.push_back(magnetic_energy(model, theta, cur));
    cf.push_back(closed_form_magnetic_energy(model, theta, cur));
  }
  return make_result("legendre_vs_closed_form", max_relative_error(leg, cf), 1e-9);
}

SuiteResult periodicity_suite(const Model& model, const ValidateOptions& opts) {
  Rng rng(opts.seed + 2);
  const double period = 2.0 * kPi / model.n_p();
  std::vector<double> base, shifted;
  for (int i = 0; i < std::min(opts.points, 100); ++i) {
    const double theta = random_theta(model, rng);
    std::vector<Complex> cur(model.n_currents());
    for (Complex& c : cur) c = random_current(model, rng);
    base.push_back(eval_lagrangian(model, theta, cur));
    shifted.push_back(eval_lagrangian(model, theta + period, cur));
    base.push_back(magnetic_energy(model, theta, cur));
    shifted.push_back(magnetic_energy(model, theta + period, cur));
  }
  return make_result("periodicity", max_relative_error(base, shifted), 1e-12);
}

SuiteResult power_balance_suite(const Model& model) {
  const double amplitude = model.is_pm() ? 10.0 : 20.0;
  const DriveInput drive = DriveInput::sinusoid_drive(amplitude, 10.0, 0.0, 0.05);
  const Trajectory traj = simulate(model, MachineState{}, drive, 0.2, 1e-5);
  if (!traj.complete()) {
    SuiteResult r;
    r.name = "power_balance";
    r.passed = false;
    r.detail = "simulation did not complete: " + traj.message;
    return r;
  }
  const PowerBalanceAudit audit = power_balance_audit(model, traj, drive);
  SuiteResult r = make_result("power_balance", audit.relative_drift, 1e-6);
  if (audit.max_residual > 1e-3 * audit.peak_input_power) {
    r.passed = false;
    r.detail += "; pointwise residual " + fmt17(audit.max_residual) +
                " exceeds 1e-3 * peak input power " + fmt17(audit.peak_input_power);
  }
  return r;
}

}  // namespace

std::vector<SuiteResult> run_validation_suites(const Model& model,
                                               const ValidateOptions& opts) {
  std::vector<SuiteResult> out;
  out.push_back(ad_vs_analytic_suite(model, opts));
  out.push_back(legendre_suite(model, opts));
  out.push_back(periodicity_suite(model, opts));
  out.push_back(power_balance_suite(model));
  return out;
}

}  // namespace emlag
