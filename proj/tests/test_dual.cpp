#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "emlag/dual.hpp"
#include "emlag/models.hpp"
#include "emlag/rng.hpp"

using namespace emlag;

namespace {

DynDual var(double v, int k, int n) { return DynDual::variable(v, k, n); }

}  // namespace

TEST_CASE("gradient of x^2 + y^2") {
  auto x = var(1.0, 0, 2), y = var(2.0, 1, 2);
  auto f = x * x + y * y;
  CHECK(f.val == 5.0);
  CHECK(f.g[0] == 2.0);
  CHECK(f.g[1] == 4.0);
}

TEST_CASE("gradient of x cos(y)") {
  auto x = var(1.0, 0, 2), y = var(0.0, 1, 2);
  auto f = x * cos(y);
  CHECK(f.val == 1.0);
  CHECK(f.g[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.g[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hessian of x^2 + 3xy") {
  auto x = var(0.7, 0, 2), y = var(-1.3, 1, 2);
  auto f = x * x + 3.0 * x * y;
  CHECK(f.h(0, 0) == 2.0);
  CHECK(f.h(0, 1) == 3.0);
  CHECK(f.h(1, 0) == 3.0);
  CHECK(f.h(1, 1) == 0.0);
}

TEST_CASE("division and sqrt propagate first and second derivatives") {
  // f(x) = sqrt(x) / (1 + x) at x = 4: f = 2/5, f' = -3/100, f'' = 23/4000
  auto x = var(4.0, 0, 1);
  auto f = sqrt(x) / (1.0 + x);
  CHECK(f.val == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(f.g[0] == doctest::Approx(-0.03).epsilon(1e-14));
  CHECK(f.h(0, 0) == doctest::Approx(0.00575).epsilon(1e-13));
}

TEST_CASE("trig second derivatives") {
  auto x = var(0.3, 0, 1);
  auto f = sin(x) * cos(x);  // = sin(2x)/2, f'' = -2 sin(2x)
  CHECK(f.g[0] == doctest::Approx(std::cos(0.6)).epsilon(1e-14));
  CHECK(f.h(0, 0) == doctest::Approx(-2.0 * std::sin(0.6)).epsilon(1e-13));
}

TEST_CASE("hessian is exactly symmetric on a messy expression") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4;
    std::vector<DynDual> q;
    for (int k = 0; k < n; ++k) q.push_back(var(rng.uniform(-2.0, 2.0), k, n));
    auto f = sin(q[0] * q[1]) / (2.0 + cos(q[2])) + sqrt(4.0 + q[3] * q[0]) * q[2] -
             q[1] * q[1] * q[3];
    const Eigen::MatrixXd diff = f.h - f.h.transpose();
    CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("chain rule matches Jacobian composition on random polynomials") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3, m = 2;
    double c[2][10];
    for (auto& row : c)
      for (double& v : row) v = rng.uniform(-1.0, 1.0);
    auto g_eval = [&](const auto& x0, const auto& x1, const auto& x2, int j) {
      return c[j][0] + c[j][1] * x0 + c[j][2] * x1 + c[j][3] * x2 + c[j][4] * x0 * x1 +
             c[j][5] * x1 * x2 + c[j][6] * x0 * x0 + c[j][7] * x2 * x2 +
             c[j][8] * x0 * x1 * x2 + c[j][9] * x1 * x1;
    };
    double f0 = rng.uniform(-1.0, 1.0), f1 = rng.uniform(-1.0, 1.0),
           f2 = rng.uniform(-1.0, 1.0), f3 = rng.uniform(-1.0, 1.0);
    auto f_eval = [&](const auto& y0, const auto& y1) {
      return f0 + f1 * y0 + f2 * y1 + f3 * y0 * y1;
    };

    Eigen::Vector3d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

    // composed forward pass
    std::vector<DynDual> q;
    for (int k = 0; k < n; ++k) q.push_back(var(x[k], k, n));
    auto y0 = g_eval(q[0], q[1], q[2], 0);
    auto y1 = g_eval(q[0], q[1], q[2], 1);
    auto comp = f_eval(y0, y1);

    // Jacobian composition: grad(f.g) = J_g^T grad f(g(x))
    Eigen::MatrixXd Jg(m, n);
    Jg.row(0) = y0.g.transpose();
    Jg.row(1) = y1.g.transpose();
    std::vector<DynDual> yv = {var(y0.val, 0, m), var(y1.val, 1, m)};
    auto fy = f_eval(yv[0], yv[1]);
    const Eigen::VectorXd expected = Jg.transpose() * fy.g;
    for (int k = 0; k < n; ++k)
      CHECK(comp.g[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }
}

TEST_CASE("fixed-size and dynamic seeds produce identical derivatives") {
  const Model model = Model::default_model(ModelKind::pm_sat_saliency);
  const PmParams& p = model.pm();
  const double theta = 0.37;
  const Complex is(2.5, -1.25);

  using D3 = Dual2<3>;
  const Cx<D3> is3{D3::variable(is.real(), 0, 3), D3::variable(is.imag(), 1, 3)};
  const D3 fixed = pm_lagrangian<D3>(p, D3::variable(theta, 2, 3), is3);

  const Cx<DynDual> isd{var(is.real(), 0, 3), var(is.imag(), 1, 3)};
  const DynDual dyn = pm_lagrangian<DynDual>(p, var(theta, 2, 3), isd);

  CHECK(fixed.val == dyn.val);
  for (int k = 0; k < 3; ++k) CHECK(fixed.g[k] == dyn.g[k]);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(fixed.h(r, c) == dyn.h(r, c));
}
