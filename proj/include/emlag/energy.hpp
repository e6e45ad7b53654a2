#pragma once

// Magnetic energy via the Legendre transform of the Lagrangian over the
// current coordinates, the per-kind closed forms, and the trajectory
// power-balance audit  dH/dt = Re(u_s i_s*) - R_s|i_s|^2 - R_r|i_r|^2 - tau_L w.

#include <span>
#include <vector>

#include "emlag/dynamics.hpp"
#include "emlag/models.hpp"

namespace emlag {

struct EnergyBreakdown {
  double h_mech = 0.0;  // J w^2 / 2
  double h_mag = 0.0;   // H_m
  double total = 0.0;   // h_mech + h_mag
};

// Legendre transform over the current coordinates, via the AD gradient:
// H_m = sum_k (dL/dx_k) x_k - L_m over the real current coordinates.
double magnetic_energy(const Model& model, double theta, std::span<const Complex> currents);

// Direct evaluation of the per-family closed-form energy, independent of AD.
double closed_form_magnetic_energy(const Model& model, double theta,
                                   std::span<const Complex> currents);

EnergyBreakdown energy_breakdown(const Model& model, const MachineState& state);

struct PowerBalanceAudit {
  std::vector<double> times;
  std::vector<double> dh_dt;      // central differences of the stored H column
  std::vector<double> power;      // source power at each sample
  std::vector<double> residual;   // dh_dt - power
  double max_residual = 0.0;
  double peak_input_power = 0.0;  // max |Re(u_s i_s*)|
  double integrated_drift = 0.0;  // |H(T) - H(0) - trapezoid(power)|
  double relative_drift = 0.0;    // integrated drift over max(int |power|, |H(0)|)
};

PowerBalanceAudit power_balance_audit(const Model& model, const Trajectory& traj,
                                      const DriveInput& input);

}  // namespace emlag
