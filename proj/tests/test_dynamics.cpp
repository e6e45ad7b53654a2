#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "emlag/dynamics.hpp"
#include "emlag/rng.hpp"
#include "emlag/validation.hpp"

using namespace emlag;

namespace {

double state_distance(const MachineState& a, const MachineState& b) {
  return std::max({std::abs(a.theta - b.theta), std::abs(a.omega - b.omega),
                   std::abs(a.i_s - b.i_s), std::abs(a.i_r - b.i_r)});
}

}  // namespace

TEST_CASE("mass matrix of the PM kinds") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  MachineState s;
  s.theta = 0.83;
  s.i_s = Complex(2.0, -3.0);
  const MassMatrix m = mass_matrix(pm, s);
  CHECK(m.M(0, 0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(m.M(1, 1) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(m.M(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(m.condition == doctest::Approx(1.0).epsilon(1e-12));

  const Model sal = Model::default_model(ModelKind::pm_saliency);
  s.theta = 0.0;
  const MassMatrix ms = mass_matrix(sal, s);
  CHECK(ms.M(0, 0) == doctest::Approx(0.008).epsilon(1e-14));  // L_d
  CHECK(ms.M(1, 1) == doctest::Approx(0.012).epsilon(1e-14));  // L_q
  CHECK(ms.condition == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("mass matrix of im_standard at theta = 0 has the block pattern") {
  const Model im = Model::default_model(ModelKind::im_standard);
  MachineState s;
  s.i_r = Complex(1.0, 2.0);
  s.i_s = Complex(-0.5, 0.3);
  const MassMatrix m = mass_matrix(im, s);
  const double lm = 0.1, lr = 0.105, ls = 0.105;
  Eigen::MatrixXd expect(4, 4);
  expect << lr, 0, lm, 0, 0, lr, 0, lm, lm, 0, ls, 0, 0, lm, 0, ls;
  CHECK((m.M - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("mass matrix is exactly symmetric and positive definite on random states") {
  Rng rng(31);
  for (ModelKind kind : {ModelKind::pm_sat_saliency, ModelKind::im_sat_harmonic}) {
    const Model model = Model::default_model(kind);
    for (int i = 0; i < 40; ++i) {
      MachineState s;
      s.theta = random_theta(model, rng);
      s.i_s = random_current(model, rng);
      if (!model.is_pm()) s.i_r = random_current(model, rng);
      const MassMatrix m = mass_matrix(model, s);
      CHECK((m.M - m.M.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.M).eigenvalues().minCoeff() >
            0.0);
    }
  }
}

TEST_CASE("zero input and zero state is an equilibrium") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const MachineState zero;
  const MachineState d = rhs(pm, zero, DriveInput::constant_drive(Complex(0, 0)), 0.0);
  CHECK(d.theta == 0.0);
  CHECK(d.omega == 0.0);
  CHECK(std::abs(d.i_s) == 0.0);
}

TEST_CASE("rhs of im_standard solves the mass system against an explicit inverse") {
  const Model im = Model::default_model(ModelKind::im_standard);
  MachineState s;  // zero currents
  s.theta = 0.4;
  const MachineState d = rhs(im, s, DriveInput::constant_drive(Complex(1.0, 0.0)), 0.0);
  const MassMatrix m = mass_matrix(im, s);
  Eigen::VectorXd b(4);
  b << 0.0, 0.0, 1.0, 0.0;
  const Eigen::VectorXd di = m.M.inverse() * b;
  CHECK(d.i_r.real() == doctest::Approx(di[0]).epsilon(1e-12));
  CHECK(d.i_r.imag() == doctest::Approx(di[1]).epsilon(1e-12));
  CHECK(d.i_s.real() == doctest::Approx(di[2]).epsilon(1e-12));
  CHECK(d.i_s.imag() == doctest::Approx(di[3]).epsilon(1e-12));
  CHECK(d.omega == 0.0);
}

TEST_CASE("non-finite states are rejected") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  MachineState s;
  s.omega = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rhs(pm, s, DriveInput::constant_drive(Complex(0, 0)), 0.0),
                  std::invalid_argument);
}

TEST_CASE("simulate keeps a zero run identically zero") {
  const Model im = Model::default_model(ModelKind::im_standard);
  const Trajectory traj =
      simulate(im, MachineState{}, DriveInput::constant_drive(Complex(0, 0)), 0.01, 1e-4);
  REQUIRE(traj.complete());
  CHECK(traj.size() == 101);
  for (size_t k = 0; k < traj.size(); ++k) {
    CHECK(traj.states[k].theta == 0.0);
    CHECK(traj.states[k].omega == 0.0);
    CHECK(std::abs(traj.states[k].i_s) == 0.0);
    CHECK(std::abs(traj.states[k].i_r) == 0.0);
    CHECK(traj.torque_em[k] == 0.0);
  }
}

TEST_CASE("a zero-frequency steady state is preserved exactly") {
  // u_s = R_s * i_s with matching torque load: the rhs vanishes exactly, so
  // RK4 must hold the state bit-for-bit.
  const Model pm = Model::default_model(ModelKind::pm_standard);
  MachineState s;
  s.theta = 0.6;
  s.i_s = Complex(1.5, -0.7);
  const double tau =
      analytic_torque(pm, s.theta, std::vector<Complex>{s.i_s});
  DriveInput drive = DriveInput::constant_drive(pm.pm().R_s * s.i_s, tau);
  // torque must enter through the AD path used by rhs; check residual first
  const MachineState d0 = rhs(pm, s, drive, 0.0);
  CHECK(state_distance(d0, MachineState{0.0, 0.0, {0, 0}, {0, 0}}) <= 1e-12);

  const Trajectory traj = simulate(pm, s, drive, 0.2, 1e-4);
  REQUIRE(traj.complete());
  CHECK(state_distance(traj.states.back(), s) <= 1e-10);
}

TEST_CASE("integrator order measured by Richardson extrapolation") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const DriveInput drive = DriveInput::sinusoid_drive(10.0, 25.0, 0.0, 0.02);
  MachineState init;
  auto final_state = [&](double dt) {
    const Trajectory t = simulate(pm, init, drive, 0.1, dt);
    REQUIRE(t.complete());
    return t.states.back();
  };
  const MachineState a = final_state(5e-4);
  const MachineState b = final_state(2.5e-4);
  const MachineState c = final_state(1.25e-4);
  const double e1 = state_distance(a, b);
  const double e2 = state_distance(b, c);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.7);
  CHECK(order <= 4.3);
}

TEST_CASE("flux-state integration matches the current-state integration") {
  for (ModelKind kind : {ModelKind::pm_standard, ModelKind::im_standard}) {
    const Model model = Model::default_model(kind);
    const DriveInput drive = DriveInput::sinusoid_drive(model.is_pm() ? 10.0 : 20.0, 20.0,
                                                        0.3, 0.05);
    MachineState init;
    init.i_s = Complex(0.5, -0.2);
    if (!model.is_pm()) init.i_r = Complex(0.1, 0.1);
    const Trajectory cur = simulate(model, init, drive, 0.1, 1e-5);
    const Trajectory flx = flux_state_simulate(model, init, drive, 0.1, 1e-5);
    REQUIRE(cur.complete());
    REQUIRE(cur.size() == flx.size());
    double scale = 0.0;
    for (size_t k = 0; k < cur.size(); ++k)
      scale = std::max({scale, std::abs(cur.states[k].i_s), std::abs(cur.states[k].omega)});
    double worst = 0.0;
    for (size_t k = 0; k < cur.size(); ++k)
      worst = std::max(worst, state_distance(cur.states[k], flx.states[k]));
    CHECK(worst / scale <= 1e-6);
  }
}

TEST_CASE("flux-state integration rejects nonlinear kinds") {
  const Model sat = Model::default_model(ModelKind::im_sat);
  CHECK_THROWS_AS(
      flux_state_simulate(sat, MachineState{}, DriveInput::constant_drive({0, 0}), 0.01, 1e-4),
      std::invalid_argument);
}

TEST_CASE("a saturating drive truncates the run with a singularity report") {
  // Effective inductance lambda + rho^2 dlambda/d(rho^2) crosses zero at
  // rho ~ 15.8 while lambda itself stays positive on the declared range.
  PmParams p = Model::default_model(ModelKind::pm_standard).pm();
  p.lambda = SaturationCurve::polynomial({0.01, -2e-5}, 20.0);
  p.ibar = 5.0;
  const Model model(ModelKind::pm_sat_saliency, p);
  const DriveInput drive = DriveInput::constant_drive(Complex(40.0, 0.0));
  const Trajectory traj = simulate(model, MachineState{}, drive, 0.5, 1e-5);
  CHECK(traj.status == Trajectory::Status::singular_mass_matrix);
  CHECK(traj.size() > 2);
  CHECK(traj.size() < 50001);
  CHECK(traj.message.find("singular mass matrix") != std::string::npos);
}

TEST_CASE("simulation argument validation") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const DriveInput d = DriveInput::constant_drive(Complex(0, 0));
  CHECK_THROWS_AS(simulate(pm, MachineState{}, d, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(simulate(pm, MachineState{}, d, 1e-6, 1e-5), std::invalid_argument);
  CHECK_THROWS_AS(simulate(pm, MachineState{}, d, 1e4, 1e-5), std::invalid_argument);
}

TEST_CASE("drive profiles") {
  const DriveInput c = DriveInput::constant_drive(Complex(1.0, -2.0), 0.3);
  CHECK(c.u_s(17.0) == Complex(1.0, -2.0));

  const DriveInput s = DriveInput::sinusoid_drive(2.0, 0.5, 0.25);
  const Complex expect = std::polar(2.0, 2.0 * 3.14159265358979323846 * 0.5 * 0.3 + 0.25);
  CHECK(std::abs(s.u_s(0.3) - expect) <= 1e-15);

  const DriveInput t = DriveInput::table_drive({0.0, 1.0, 2.0},
                                               {Complex(0, 0), Complex(2, 2), Complex(4, 0)});
  CHECK(t.u_s(-1.0) == Complex(0, 0));
  CHECK(t.u_s(0.5) == Complex(1, 1));
  CHECK(t.u_s(1.5) == Complex(3, 1));
  CHECK(t.u_s(9.0) == Complex(4, 0));
  CHECK_THROWS_AS(DriveInput::table_drive({0.0, 0.0}, {Complex(0, 0), Complex(1, 0)}),
                  std::invalid_argument);
}

TEST_CASE("flux via the AD path matches the closed form along a trajectory") {
  const Model model = Model::default_model(ModelKind::im_sat_harmonic);
  const DriveInput drive = DriveInput::sinusoid_drive(15.0, 15.0, 0.0, 0.02);
  const Trajectory traj = simulate(model, MachineState{}, drive, 0.02, 1e-4);
  REQUIRE(traj.complete());
  for (size_t k = 0; k < traj.size(); k += 10) {
    const MachineState& s = traj.states[k];
    const auto ad = flux(model, s);
    const auto cf = analytic_flux(model, s.theta, state_currents(model, s));
    for (size_t j = 0; j < ad.size(); ++j)
      CHECK(std::abs(ad[j] - cf[j]) <= 1e-9 * std::max(1.0, std::abs(cf[j])));
  }
}

TEST_CASE("the rhs flux balance holds along a simulated trajectory") {
  // d(phi)/dt recovered by central differences of the flux column matches
  // the source term to second order in dt.
  const Model model = Model::default_model(ModelKind::pm_saliency);
  const double dt = 1e-4;
  const DriveInput drive = DriveInput::sinusoid_drive(8.0, 20.0, 0.0, 0.01);
  const Trajectory traj = simulate(model, MachineState{}, drive, 0.05, dt);
  REQUIRE(traj.complete());
  double worst = 0.0, scale = 0.0;
  for (size_t k = 1; k + 1 < traj.size(); ++k) {
    const Complex dphi = (traj.phi_s[k + 1] - traj.phi_s[k - 1]) / (2.0 * dt);
    const Complex src = drive.u_s(traj.times[k]) -
                        model.R_s() * traj.states[k].i_s;
    worst = std::max(worst, std::abs(dphi - src));
    scale = std::max(scale, std::abs(src));
  }
  // second-order stencil on a 20 Hz signal: (w dt)^2/6 ~ 2.6e-5 relative
  CHECK(worst <= 1e-4 * scale);
}
