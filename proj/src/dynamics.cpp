#include "emlag/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "emlag/energy.hpp"

namespace emlag {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaxCondition = 1e12;
constexpr long long kStepCap = 20'000'000;

int ydim(const Model& model) { return 2 + model.n_current_coords(); }

Eigen::VectorXd pack(const Model& model, const MachineState& s) {
  Eigen::VectorXd y(ydim(model));
  y[0] = s.theta;
  y[1] = s.omega;
  int k = 2;
  if (!model.is_pm()) {
    y[k++] = s.i_r.real();
    y[k++] = s.i_r.imag();
  }
  y[k++] = s.i_s.real();
  y[k++] = s.i_s.imag();
  return y;
}

MachineState unpack(const Model& model, const Eigen::VectorXd& y) {
  MachineState s;
  s.theta = y[0];
  s.omega = y[1];
  int k = 2;
  if (!model.is_pm()) {
    s.i_r = Complex(y[k], y[k + 1]);
    k += 2;
  }
  s.i_s = Complex(y[k], y[k + 1]);
  return s;
}

std::string describe_state(const MachineState& s) {
  std::ostringstream os;
  os << "theta=" << s.theta << " omega=" << s.omega << " i_s=(" << s.i_s.real() << ","
     << s.i_s.imag() << ") i_r=(" << s.i_r.real() << "," << s.i_r.imag() << ")";
  return os.str();
}

struct MassFactors {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  double condition = 0.0;

  explicit MassFactors(const Eigen::MatrixXd& M, const MachineState& state) : es(M) {
    const auto& ev = es.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(lo > 0.0) || condition > kMaxCondition) {
      std::ostringstream os;
      os << "singular mass matrix (condition " << condition << ", min eigenvalue " << lo
         << ") at " << describe_state(state);
      throw SingularMassMatrix(os.str());
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return es.eigenvectors() *
           (es.eigenvectors().transpose() * b).cwiseQuotient(es.eigenvalues());
  }
};

Eigen::VectorXd source_vector(const Model& model, const MachineState& s, Complex u_s) {
  Eigen::VectorXd S(model.n_current_coords());
  int k = 0;
  if (!model.is_pm()) {
    S[k++] = -model.im().R_r * s.i_r.real();
    S[k++] = -model.im().R_r * s.i_r.imag();
  }
  S[k++] = u_s.real() - model.R_s() * s.i_s.real();
  S[k++] = u_s.imag() - model.R_s() * s.i_s.imag();
  return S;
}

// dy/dt in packed coordinates; optionally hands back the Lagrangian
// derivatives of the evaluation point (used to fill trajectory columns).
Eigen::VectorXd rhs_packed(const Model& model, const Eigen::VectorXd& y, Complex u_s,
                           double tau_L, LagrangianDerivatives* lag_out = nullptr) {
  if (!y.allFinite()) throw std::invalid_argument("non-finite state");
  const MachineState s = unpack(model, y);
  const std::vector<Complex> cur = state_currents(model, s);
  LagrangianDerivatives lag = lagrangian_derivatives(model, s.theta, cur);
  MassFactors mass(lag.mass, s);
  const Eigen::VectorXd b = source_vector(model, s, u_s) - lag.dflux_dtheta * s.omega;
  const Eigen::VectorXd didt = mass.solve(b);
  Eigen::VectorXd dy(y.size());
  dy[0] = s.omega;
  dy[1] = (lag.dL_dtheta - tau_L) / model.inertia();
  dy.tail(model.n_current_coords()) = didt;
  if (lag_out) *lag_out = std::move(lag);
  return dy;
}

void record_sample(const Model& model, Trajectory& traj, double t, const MachineState& s,
                   const LagrangianDerivatives& lag) {
  traj.times.push_back(t);
  traj.states.push_back(s);
  int k = 0;
  if (!model.is_pm()) {
    traj.phi_r.push_back(Complex(lag.flux[0], lag.flux[1]));
    k = 2;
  }
  traj.phi_s.push_back(Complex(lag.flux[k], lag.flux[k + 1]));
  traj.torque_em.push_back(lag.dL_dtheta);
  const std::vector<Complex> cur = state_currents(model, s);
  traj.hamiltonian.push_back(0.5 * model.inertia() * s.omega * s.omega +
                             closed_form_magnetic_energy(model, s.theta, cur));
}

long long step_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("t_end must be at least dt");
  const long long n = std::llround(t_end / dt);
  if (n > kStepCap)
    throw std::invalid_argument("step count " + std::to_string(n) + " exceeds the cap of " +
                                std::to_string(kStepCap));
  return n;
}

}  // namespace

Complex DriveInput::u_s(double t) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::sinusoid:
      return std::polar(amplitude, 2.0 * kPi * frequency * t + phase);
    case Kind::table: {
      if (times.empty()) return Complex(0.0, 0.0);
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const size_t j = static_cast<size_t>(it - times.begin());
      const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
      return (1.0 - w) * values[j - 1] + w * values[j];
    }
  }
  return Complex(0.0, 0.0);
}

DriveInput DriveInput::constant_drive(Complex u, double tau_L) {
  DriveInput d;
  d.kind = Kind::constant;
  d.value = u;
  d.tau_L = tau_L;
  return d;
}

DriveInput DriveInput::sinusoid_drive(double amplitude, double frequency, double phase,
                                      double tau_L) {
  DriveInput d;
  d.kind = Kind::sinusoid;
  d.amplitude = amplitude;
  d.frequency = frequency;
  d.phase = phase;
  d.tau_L = tau_L;
  return d;
}

DriveInput DriveInput::table_drive(std::vector<double> times, std::vector<Complex> values,
                                   double tau_L) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("table drive needs matching times/values, at least 2 points");
  for (size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("table drive times must be strictly increasing");
  DriveInput d;
  d.kind = Kind::table;
  d.times = std::move(times);
  d.values = std::move(values);
  d.tau_L = tau_L;
  return d;
}

std::vector<Complex> state_currents(const Model& model, const MachineState& state) {
  if (model.is_pm()) return {state.i_s};
  return {state.i_r, state.i_s};
}

std::vector<Complex> flux(const Model& model, const MachineState& state) {
  const std::vector<Complex> cur = state_currents(model, state);
  const LagrangianDerivatives lag = lagrangian_derivatives(model, state.theta, cur);
  std::vector<Complex> out;
  for (Eigen::Index k = 0; k < lag.flux.size(); k += 2)
    out.push_back(Complex(lag.flux[k], lag.flux[k + 1]));
  return out;
}

MassMatrix mass_matrix(const Model& model, const MachineState& state) {
  const std::vector<Complex> cur = state_currents(model, state);
  const LagrangianDerivatives lag = lagrangian_derivatives(model, state.theta, cur);
  MassFactors f(lag.mass, state);
  return MassMatrix{lag.mass, f.condition};
}

MachineState rhs(const Model& model, const MachineState& state, const DriveInput& input,
                 double t) {
  const Eigen::VectorXd dy = rhs_packed(model, pack(model, state), input.u_s(t), input.tau_L);
  return unpack(model, dy);
}

Trajectory simulate(const Model& model, const MachineState& initial, const DriveInput& input,
                    double t_end, double dt) {
  const long long steps = step_count(t_end, dt);
  Trajectory traj;
  traj.kind = model.kind();

  Eigen::VectorXd y = pack(model, initial);
  LagrangianDerivatives lag;
  try {
    for (long long n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * dt;
      const Eigen::VectorXd k1 = rhs_packed(model, y, input.u_s(t), input.tau_L, &lag);
      record_sample(model, traj, t, unpack(model, y), lag);
      const Eigen::VectorXd k2 =
          rhs_packed(model, y + (0.5 * dt) * k1, input.u_s(t + 0.5 * dt), input.tau_L);
      const Eigen::VectorXd k3 =
          rhs_packed(model, y + (0.5 * dt) * k2, input.u_s(t + 0.5 * dt), input.tau_L);
      const Eigen::VectorXd k4 = rhs_packed(model, y + dt * k3, input.u_s(t + dt), input.tau_L);
      y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double t_final = static_cast<double>(steps) * dt;
    rhs_packed(model, y, input.u_s(t_final), input.tau_L, &lag);
    record_sample(model, traj, t_final, unpack(model, y), lag);
  } catch (const SingularMassMatrix& e) {
    traj.status = Trajectory::Status::singular_mass_matrix;
    traj.message = e.what();
  } catch (const std::domain_error& e) {
    traj.status = Trajectory::Status::domain_error;
    traj.message = e.what();
  }
  return traj;
}

namespace {

// Currents matching a flux vector of the linear kinds.
std::vector<Complex> currents_from_flux(const Model& model, double theta,
                                        const std::vector<Complex>& phi) {
  if (model.kind() == ModelKind::pm_standard) {
    const PmParams& p = model.pm();
    const Complex e = std::polar(1.0, p.n_p * theta);
    return {(phi[0] - p.phibar() * e) / p.lambda0()};
  }
  const ImParams& p = model.im();
  const double lm = p.L_m.coefficients()[0];
  const double lr = lm + p.L_fr, ls = lm + p.L_fs;
  const double det = lr * ls - lm * lm;
  const Complex e = std::polar(1.0, p.n_p * theta);
  const Complex i_r = (ls * phi[0] - lm * std::conj(e) * phi[1]) / det;
  const Complex i_s = (lr * phi[1] - lm * e * phi[0]) / det;
  return {i_r, i_s};
}

}  // namespace

Trajectory flux_state_simulate(const Model& model, const MachineState& initial,
                               const DriveInput& input, double t_end, double dt) {
  if (model.kind() != ModelKind::pm_standard && model.kind() != ModelKind::im_standard)
    throw std::invalid_argument(
        std::string("flux_state_simulate supports only the linear kinds, got ") +
        to_string(model.kind()));

  const long long steps = step_count(t_end, dt);
  const bool pm = model.is_pm();
  const int nflux = pm ? 1 : 2;
  Trajectory traj;
  traj.kind = model.kind();

  // z = (theta, omega, flux coordinates)
  auto unpack_flux = [&](const Eigen::VectorXd& z) {
    std::vector<Complex> phi(nflux);
    for (int k = 0; k < nflux; ++k) phi[k] = Complex(z[2 + 2 * k], z[3 + 2 * k]);
    return phi;
  };
  auto deriv = [&](const Eigen::VectorXd& z, double t) {
    const double theta = z[0], omega = z[1];
    const std::vector<Complex> phi = unpack_flux(z);
    const std::vector<Complex> cur = currents_from_flux(model, theta, phi);
    Eigen::VectorXd dz(z.size());
    dz[0] = omega;
    dz[1] = (analytic_torque(model, theta, cur) - input.tau_L) / model.inertia();
    int k = 2;
    if (!pm) {
      const Complex dphir = -model.im().R_r * cur[0];
      dz[k++] = dphir.real();
      dz[k++] = dphir.imag();
    }
    const Complex dphis = input.u_s(t) - model.R_s() * cur.back();
    dz[k++] = dphis.real();
    dz[k++] = dphis.imag();
    return dz;
  };
  auto record = [&](double t, const Eigen::VectorXd& z) {
    const double theta = z[0], omega = z[1];
    const std::vector<Complex> phi = unpack_flux(z);
    const std::vector<Complex> cur = currents_from_flux(model, theta, phi);
    MachineState s;
    s.theta = theta;
    s.omega = omega;
    s.i_s = cur.back();
    if (!pm) s.i_r = cur[0];
    traj.times.push_back(t);
    traj.states.push_back(s);
    if (!pm) traj.phi_r.push_back(phi[0]);
    traj.phi_s.push_back(phi.back());
    traj.torque_em.push_back(analytic_torque(model, theta, cur));
    traj.hamiltonian.push_back(0.5 * model.inertia() * omega * omega +
                               closed_form_magnetic_energy(model, theta, cur));
  };

  Eigen::VectorXd z(2 + 2 * nflux);
  z[0] = initial.theta;
  z[1] = initial.omega;
  {
    const std::vector<Complex> phi0 =
        analytic_flux(model, initial.theta, state_currents(model, initial));
    for (int k = 0; k < nflux; ++k) {
      z[2 + 2 * k] = phi0[k].real();
      z[3 + 2 * k] = phi0[k].imag();
    }
  }
  for (long long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    record(t, z);
    const Eigen::VectorXd k1 = deriv(z, t);
    const Eigen::VectorXd k2 = deriv(z + (0.5 * dt) * k1, t + 0.5 * dt);
    const Eigen::VectorXd k3 = deriv(z + (0.5 * dt) * k2, t + 0.5 * dt);
    const Eigen::VectorXd k4 = deriv(z + dt * k3, t + dt);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  record(static_cast<double>(steps) * dt, z);
  return traj;
}

}  // namespace emlag
