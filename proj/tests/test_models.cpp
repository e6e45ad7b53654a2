#include <doctest.h>

#include <cmath>

#include "emlag/models.hpp"
#include "emlag/rng.hpp"
#include "emlag/validation.hpp"

using namespace emlag;

namespace {

const std::vector<ModelKind> kAllKinds = {
    ModelKind::pm_standard, ModelKind::pm_saliency, ModelKind::pm_sat_saliency,
    ModelKind::im_standard, ModelKind::im_sat,      ModelKind::im_sat_harmonic};

std::vector<Complex> random_currents(const Model& model, Rng& rng) {
  std::vector<Complex> cur(model.n_currents());
  for (Complex& c : cur) c = random_current(model, rng);
  return cur;
}

}  // namespace

TEST_CASE("lagrangian values at hand-checked points") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const std::vector<Complex> zero = {Complex(0.0, 0.0)};
  // lambda ibar^2 / 2 = 0.01 * 100 / 2
  CHECK(eval_lagrangian(pm, 0.0, zero) == doctest::Approx(0.5).epsilon(1e-14));

  const Model im = Model::default_model(ModelKind::im_standard);
  const std::vector<Complex> zeros2 = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
  CHECK(eval_lagrangian(im, 1.234, zeros2) == 0.0);

  const Model sal = Model::default_model(ModelKind::pm_saliency);
  const std::vector<Complex> one = {Complex(1.0, 0.0)};
  CHECK(eval_lagrangian(sal, 0.0, one) == doctest::Approx(0.604).epsilon(1e-14));
}

TEST_CASE("analytic flux at hand-checked points") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const std::vector<Complex> zero = {Complex(0.0, 0.0)};
  for (double theta : {0.0, 0.7, -2.1}) {
    const auto phi = analytic_flux(pm, theta, zero);
    const Complex expect = 0.1 * std::polar(1.0, 3.0 * theta);
    CHECK(std::abs(phi[0] - expect) <= 1e-15);
  }

  const Model im = Model::default_model(ModelKind::im_standard);
  const std::vector<Complex> cur = {Complex(0.0, 0.0), Complex(2.0, 0.0)};
  const double theta = 0.9;
  const auto phi = analytic_flux(im, theta, cur);
  CHECK(std::abs(phi[0] - 0.2 * std::polar(1.0, -2.0 * theta)) <= 1e-15);
  CHECK(phi[1].real() == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(phi[1].imag() == doctest::Approx(0.0).epsilon(1e-14));

  const Model sal = Model::default_model(ModelKind::pm_saliency);
  const std::vector<Complex> one = {Complex(1.0, 0.0)};
  const auto phis = analytic_flux(sal, 0.0, one);
  // lambda*1 + phibar - mu*1
  CHECK(phis[0].real() == doctest::Approx(0.108).epsilon(1e-14));
  CHECK(phis[0].imag() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("analytic torque at hand-checked points") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  for (double theta : {0.0, 0.3, 2.9}) {
    // quadrature current i_s = j I e^{j n_p theta} gives n_p phibar I
    const Complex iq = Complex(0.0, 5.0) * std::polar(1.0, 3.0 * theta);
    const std::vector<Complex> cq = {iq};
    CHECK(analytic_torque(pm, theta, cq) == doctest::Approx(1.5).epsilon(1e-13));
    // aligned current produces no torque
    const std::vector<Complex> cd = {4.0 * std::polar(1.0, 3.0 * theta)};
    CHECK(analytic_torque(pm, theta, cd) == doctest::Approx(0.0).epsilon(1e-12));
  }

  // any IM kind with i_r = 0 produces zero torque at any theta, i_s
  Rng rng(17);
  for (ModelKind kind :
       {ModelKind::im_standard, ModelKind::im_sat, ModelKind::im_sat_harmonic}) {
    const Model im = Model::default_model(kind);
    for (int i = 0; i < 20; ++i) {
      const std::vector<Complex> cur = {Complex(0.0, 0.0), random_current(im, rng)};
      CHECK(analytic_torque(im, random_theta(im, rng), cur) == 0.0);
    }
  }
}

TEST_CASE("AD flux and torque match the closed forms on every kind") {
  for (ModelKind kind : kAllKinds) {
    const Model model = Model::default_model(kind);
    Rng rng(401 + static_cast<int>(kind));
    std::vector<double> ad, cf;
    for (int i = 0; i < 250; ++i) {
      const double theta = random_theta(model, rng);
      const auto cur = random_currents(model, rng);
      const LagrangianDerivatives lag = lagrangian_derivatives(model, theta, cur);
      const auto phi = analytic_flux(model, theta, cur);
      for (int k = 0; k < model.n_currents(); ++k) {
        ad.push_back(lag.flux[2 * k]);
        cf.push_back(phi[k].real());
        ad.push_back(lag.flux[2 * k + 1]);
        cf.push_back(phi[k].imag());
      }
      ad.push_back(lag.dL_dtheta);
      cf.push_back(analytic_torque(model, theta, cur));
    }
    CHECK(max_relative_error(ad, cf) <= 1e-9);
  }
}

TEST_CASE("lagrangian is 2pi/n_p periodic in theta") {
  for (ModelKind kind : kAllKinds) {
    const Model model = Model::default_model(kind);
    Rng rng(501 + static_cast<int>(kind));
    const double period = 2.0 * 3.14159265358979323846 / model.n_p();
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) {
      const double theta = random_theta(model, rng);
      const auto cur = random_currents(model, rng);
      a.push_back(eval_lagrangian(model, theta, cur));
      b.push_back(eval_lagrangian(model, theta + period, cur));
    }
    CHECK(max_relative_error(a, b) <= 1e-12);
  }
}

TEST_CASE("degenerate parameters collapse richer kinds exactly") {
  const Model pm_std = Model::default_model(ModelKind::pm_standard);
  const Model pm_sal_mu0(ModelKind::pm_saliency, pm_std.pm());

  const Model pm_sal = Model::default_model(ModelKind::pm_saliency);
  const Model pm_sat_const(ModelKind::pm_sat_saliency, pm_sal.pm());

  const Model im_std = Model::default_model(ModelKind::im_standard);
  const Model im_sat_const(ModelKind::im_sat, im_std.im());

  const Model im_sat = Model::default_model(ModelKind::im_sat);
  ImParams harm_p = im_sat.im();
  harm_p.harmonics = {Harmonic{5, +1, 0.0}};
  const Model im_harm_zero(ModelKind::im_sat_harmonic, harm_p);

  auto expect_identical = [&](const Model& a, const Model& b, int seed) {
    Rng rng(seed);
    for (int i = 0; i < 50; ++i) {
      const double theta = random_theta(a, rng);
      std::vector<Complex> cur(a.n_currents());
      for (Complex& c : cur) c = random_current(a, rng);
      CHECK(eval_lagrangian(a, theta, cur) == eval_lagrangian(b, theta, cur));
      CHECK(analytic_torque(a, theta, cur) == analytic_torque(b, theta, cur));
      const auto fa = analytic_flux(a, theta, cur);
      const auto fb = analytic_flux(b, theta, cur);
      for (size_t k = 0; k < fa.size(); ++k) CHECK(fa[k] == fb[k]);
      const LagrangianDerivatives la = lagrangian_derivatives(a, theta, cur);
      const LagrangianDerivatives lb = lagrangian_derivatives(b, theta, cur);
      CHECK(la.dL_dtheta == lb.dL_dtheta);
      CHECK((la.mass - lb.mass).cwiseAbs().maxCoeff() == 0.0);
    }
  };
  expect_identical(pm_sal_mu0, pm_std, 601);
  expect_identical(pm_sat_const, pm_sal, 602);
  expect_identical(im_sat_const, im_std, 603);
  expect_identical(im_harm_zero, im_sat, 604);
}

TEST_CASE("parameter validation") {
  PmParams p = Model::default_model(ModelKind::pm_standard).pm();
  p.J = 0.0;
  CHECK_THROWS_AS(Model(ModelKind::pm_standard, p), ValidationError);

  PmParams q = Model::default_model(ModelKind::pm_saliency).pm();
  q.mu = SaturationCurve::constant(0.02);  // |mu| >= lambda
  CHECK_THROWS_AS(Model(ModelKind::pm_saliency, q), ValidationError);

  // pm_standard must not carry saliency; pm_saliency must not carry curves
  CHECK_THROWS_AS(Model(ModelKind::pm_standard,
                        Model::default_model(ModelKind::pm_saliency).pm()),
                  ValidationError);
  CHECK_THROWS_AS(Model(ModelKind::pm_saliency,
                        Model::default_model(ModelKind::pm_sat_saliency).pm()),
                  ValidationError);

  ImParams s = Model::default_model(ModelKind::im_sat_harmonic).im();
  s.harmonics[0].L = 0.05;  // not small against L_m
  CHECK_THROWS_AS(Model(ModelKind::im_sat_harmonic, s), ValidationError);
  ImParams t = Model::default_model(ModelKind::im_sat_harmonic).im();
  t.harmonics[0].sigma = 2;
  CHECK_THROWS_AS(Model(ModelKind::im_sat_harmonic, t), ValidationError);

  CHECK_THROWS_AS(Model(ModelKind::im_standard,
                        Model::default_model(ModelKind::im_sat).im()),
                  ValidationError);

  // lambda(rho) hitting zero inside the declared range is rejected
  PmParams v = Model::default_model(ModelKind::pm_sat_saliency).pm();
  v.lambda = SaturationCurve::polynomial({0.01, -1e-4}, 20.0);
  v.mu = SaturationCurve::constant(0.0);
  CHECK_THROWS_AS(Model(ModelKind::pm_sat_saliency, v), ValidationError);
}

TEST_CASE("current count and range are enforced") {
  const Model pm = Model::default_model(ModelKind::pm_standard);
  const std::vector<Complex> two = {Complex(1.0, 0.0), Complex(0.0, 0.0)};
  CHECK_THROWS_AS(eval_lagrangian(pm, 0.0, two), std::invalid_argument);

  const Model sat = Model::default_model(ModelKind::pm_sat_saliency);
  // rho_max = 200, ibar = 10: |i_s| = 250 pushes rho out of range
  const std::vector<Complex> big = {Complex(250.0, 0.0)};
  CHECK_THROWS_AS(eval_lagrangian(sat, 0.0, big), std::domain_error);
  CHECK_THROWS_AS(analytic_flux(sat, 0.0, big), std::domain_error);
  CHECK_THROWS_AS(lagrangian_derivatives(sat, 0.0, big), std::domain_error);
}

TEST_CASE("kind names round-trip") {
  for (ModelKind kind : kAllKinds)
    CHECK(model_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(model_kind_from_string("pm_nonsense"), ValidationError);
}
