#pragma once

// Explicit mass-matrix form of the machine equations over
// (theta, omega, currents), fixed-step RK4 integration, and the flux-state
// cross-check integrator for the two linear kinds.

#include <Eigen/Core>
#include <complex>
#include <stdexcept>
#include <vector>

#include "emlag/models.hpp"

namespace emlag {

struct MachineState {
  double theta = 0.0;  // rad, unwrapped
  double omega = 0.0;  // rad/s
  Complex i_s{0.0, 0.0};
  Complex i_r{0.0, 0.0};  // IM only
};

// Stator voltage profile plus a constant load torque.
struct DriveInput {
  enum class Kind { constant, sinusoid, table };
  Kind kind = Kind::constant;
  Complex value{0.0, 0.0};            // constant
  double amplitude = 0.0;             // sinusoid: amplitude e^{j(2 pi f t + phase)}
  double frequency = 0.0;
  double phase = 0.0;
  std::vector<double> times;          // table: linearly interpolated
  std::vector<Complex> values;
  double tau_L = 0.0;

  Complex u_s(double t) const;

  static DriveInput constant_drive(Complex u, double tau_L = 0.0);
  static DriveInput sinusoid_drive(double amplitude, double frequency, double phase,
                                   double tau_L = 0.0);
  static DriveInput table_drive(std::vector<double> times, std::vector<Complex> values,
                                double tau_L = 0.0);
};

struct SingularMassMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MassMatrix {
  Eigen::MatrixXd M;
  double condition = 0.0;
};

struct Trajectory {
  enum class Status { complete, singular_mass_matrix, domain_error, step_limit };

  ModelKind kind = ModelKind::pm_standard;
  std::vector<double> times;
  std::vector<MachineState> states;
  std::vector<Complex> phi_s;
  std::vector<Complex> phi_r;  // IM only
  std::vector<double> torque_em;
  std::vector<double> hamiltonian;
  Status status = Status::complete;
  std::string message;

  size_t size() const { return times.size(); }
  bool complete() const { return status == Status::complete; }
};

// Currents of a state as the model's (i_r, i_s) span.
std::vector<Complex> state_currents(const Model& model, const MachineState& state);

// Fluxes via the AD/Wirtinger path; {phi_s} for PM, {phi_r, phi_s} for IM.
std::vector<Complex> flux(const Model& model, const MachineState& state);

// Hessian of L_m over the real current coordinates, with its spectral
// condition number. Throws SingularMassMatrix when not positive definite or
// when the condition number exceeds 1e12.
MassMatrix mass_matrix(const Model& model, const MachineState& state);

// Time derivative of the state under the drive at time t.
MachineState rhs(const Model& model, const MachineState& state, const DriveInput& input,
                 double t);

Trajectory simulate(const Model& model, const MachineState& initial, const DriveInput& input,
                    double t_end, double dt);

// Integrates the flux-state (Hamiltonian) equations of the linear kinds and
// reports the result in current coordinates. Only pm_standard / im_standard.
Trajectory flux_state_simulate(const Model& model, const MachineState& initial,
                               const DriveInput& input, double t_end, double dt);

}  // namespace emlag
