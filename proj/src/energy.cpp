#include "emlag/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace emlag {

double magnetic_energy(const Model& model, double theta, std::span<const Complex> currents) {
  const LagrangianDerivatives lag = lagrangian_derivatives(model, theta, currents);
  double acc = 0.0;
  for (int k = 0; k < model.n_currents(); ++k) {
    acc += lag.flux[2 * k] * currents[k].real();
    acc += lag.flux[2 * k + 1] * currents[k].imag();
  }
  return acc - lag.value;
}

// The closed forms mirror the Lagrangian's arithmetic term by term so the
// quadratic kinds reproduce it exactly, not just to roundoff.
double closed_form_magnetic_energy(const Model& model, double theta,
                                   std::span<const Complex> currents) {
  if (model.is_pm()) {
    const PmParams& p = model.pm();
    const double is_re = currents[0].real(), is_im = currents[0].imag();
    const double e_re = std::cos(p.n_p * theta), e_im = std::sin(p.n_p * theta);
    const double w_re = is_re + p.ibar * e_re;
    const double w_im = is_im + p.ibar * e_im;
    const double s = w_re * w_re + w_im * w_im;
    p.lambda.check_rho2(s);
    p.mu.check_rho2(s);
    const double lam = p.lambda.value_at_rho2(s);
    const double lam_s = p.lambda.slope_at_rho2(s);
    const double mu = p.mu.value_at_rho2(s);
    const double mu_s = p.mu.slope_at_rho2(s);
    // u = i_s e^{-j n_p theta}
    const double u_re = is_re * e_re + is_im * e_im;
    const double u_im = is_im * e_re - is_re * e_im;
    const double norm_is = is_re * is_re + is_im * is_im;
    const double re_u2 = u_re * u_re - u_im * u_im;
    const double re_w_is = w_re * is_re + w_im * is_im;  // Re(w i_s*)
    return 0.5 * (lam + 2.0 * s * lam_s) * norm_is - 0.5 * lam * (p.ibar * p.ibar) +
           s * lam_s * p.ibar * u_re - 0.5 * (mu + 2.0 * mu_s * re_w_is) * re_u2;
  }
  const ImParams& p = model.im();
  const double ir_re = currents[0].real(), ir_im = currents[0].imag();
  const double is_re = currents[1].real(), is_im = currents[1].imag();
  const double e_re = std::cos(p.n_p * theta), e_im = std::sin(p.n_p * theta);
  const double v_re = is_re + (ir_re * e_re - ir_im * e_im);
  const double v_im = is_im + (ir_re * e_im + ir_im * e_re);
  const double s = v_re * v_re + v_im * v_im;
  p.L_m.check_rho2(s);
  const double lm = p.L_m.value_at_rho2(s);
  const double lm_s = p.L_m.slope_at_rho2(s);
  double acc = 0.5 * (lm + 2.0 * s * lm_s) * s +
               0.5 * p.L_fr * (ir_re * ir_re + ir_im * ir_im) +
               0.5 * p.L_fs * (is_re * is_re + is_im * is_im);
  for (const Harmonic& h : p.harmonics) {
    const double ang = h.sigma * h.nu * p.n_p * theta;
    const double eh_re = std::cos(ang), eh_im = std::sin(ang);
    // Re(i_s i_r* e^{-j ang}), with the same association as the Lagrangian
    const double z_re = is_re * ir_re + is_im * ir_im;
    const double z_im = is_im * ir_re - is_re * ir_im;
    acc = acc + h.L * (z_re * eh_re + z_im * eh_im);
  }
  return acc;
}

EnergyBreakdown energy_breakdown(const Model& model, const MachineState& state) {
  EnergyBreakdown b;
  b.h_mech = 0.5 * model.inertia() * state.omega * state.omega;
  b.h_mag = magnetic_energy(model, state.theta, state_currents(model, state));
  b.total = b.h_mech + b.h_mag;
  return b;
}

PowerBalanceAudit power_balance_audit(const Model& model, const Trajectory& traj,
                                      const DriveInput& input) {
  if (traj.kind != model.kind())
    throw std::invalid_argument("trajectory was produced by a different model kind");
  const size_t n = traj.size();
  if (n < 3) throw std::invalid_argument("power balance audit needs at least 3 samples");
  const double dt = traj.times[1] - traj.times[0];
  for (size_t k = 1; k < n; ++k)
    if (std::abs(traj.times[k] - traj.times[k - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw std::invalid_argument("power balance audit needs uniformly sampled trajectories");

  PowerBalanceAudit a;
  a.times = traj.times;
  a.power.resize(n);
  a.dh_dt.resize(n);
  a.residual.resize(n);

  const double R_s = model.R_s();
  const double R_r = model.is_pm() ? 0.0 : model.im().R_r;
  for (size_t k = 0; k < n; ++k) {
    const MachineState& s = traj.states[k];
    const Complex u = input.u_s(traj.times[k]);
    const double p_in = (u * std::conj(s.i_s)).real();
    a.peak_input_power = std::max(a.peak_input_power, std::abs(p_in));
    a.power[k] = p_in - R_s * std::norm(s.i_s) - R_r * std::norm(s.i_r) -
                 input.tau_L * s.omega;
  }
  const auto& H = traj.hamiltonian;
  a.dh_dt[0] = (-3.0 * H[0] + 4.0 * H[1] - H[2]) / (2.0 * dt);
  for (size_t k = 1; k + 1 < n; ++k) a.dh_dt[k] = (H[k + 1] - H[k - 1]) / (2.0 * dt);
  a.dh_dt[n - 1] = (3.0 * H[n - 1] - 4.0 * H[n - 2] + H[n - 3]) / (2.0 * dt);

  double int_power = 0.0, int_abs_power = 0.0;
  for (size_t k = 0; k < n; ++k) {
    a.residual[k] = a.dh_dt[k] - a.power[k];
    a.max_residual = std::max(a.max_residual, std::abs(a.residual[k]));
    const double wgt = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    int_power += wgt * a.power[k];
    int_abs_power += wgt * std::abs(a.power[k]);
  }
  int_power *= dt;
  int_abs_power *= dt;
  a.integrated_drift = std::abs(H[n - 1] - H[0] - int_power);
  const double scale = std::max({int_abs_power, std::abs(H[0]), 1e-300});
  a.relative_drift = a.integrated_drift / scale;
  return a;
}

}  // namespace emlag
