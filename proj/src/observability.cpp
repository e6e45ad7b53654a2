#include "emlag/observability.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "emlag/format.hpp"
#include "emlag/rng.hpp"

namespace emlag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd pack_state(const Model& model, const MachineState& s, double tau_L) {
  Eigen::VectorXd X(model.state_dim());
  X[0] = tau_L;
  X[1] = s.theta;
  X[2] = s.omega;
  int k = 3;
  if (!model.is_pm()) {
    X[k++] = s.i_r.real();
    X[k++] = s.i_r.imag();
  }
  X[k++] = s.i_s.real();
  X[k++] = s.i_s.imag();
  return X;
}

double spectral_norm(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
}

Eigen::MatrixXd normalize_columns(Eigen::MatrixXd M) {
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    const double n = M.col(c).norm();
    if (n > 0.0) M.col(c) /= n;
  }
  return M;
}

// Stack with block row k scaled by (1 + ||A||)^-k, then unit column norms.
// Both are rank-preserving diagonal scalings of the exact stack.
Eigen::MatrixXd equilibrated_stack(const LinearizedSystem& sys) {
  const Eigen::Index n = sys.A.rows();
  const double s = 1.0 / (1.0 + spectral_norm(sys.A));
  Eigen::MatrixXd O(2 * n, n);
  Eigen::MatrixXd block = sys.C;
  O.topRows(2) = block;
  for (Eigen::Index k = 1; k < n; ++k) {
    block = (block * sys.A) * s;
    O.middleRows(2 * k, 2) = block;
  }
  return normalize_columns(std::move(O));
}

Eigen::MatrixXd map_jacobian(const LinearizedSystem& sys) {
  const Eigen::Index n = sys.A.rows();
  Eigen::MatrixXd M(n + 2, n);
  M.topRows(n) = sys.A;
  M.bottomRows(2) = sys.C;
  return M;
}

}  // namespace

MachineState SensorlessStatePoint::machine_state() const {
  MachineState s;
  s.theta = theta();
  s.omega = omega();
  s.i_s = i_s();
  s.i_r = i_r();
  return s;
}

Eigen::VectorXd sensorless_rhs(const Model& model, const Eigen::VectorXd& X,
                               const Eigen::Vector2d& U) {
  if (X.size() != model.state_dim())
    throw std::invalid_argument("state dimension mismatch");
  SensorlessStatePoint p{X, U};
  const MachineState ds =
      rhs(model, p.machine_state(), DriveInput::constant_drive(p.u_s(), p.tau_L()), 0.0);
  Eigen::VectorXd f(X.size());
  f[0] = 0.0;
  f[1] = ds.theta;
  f[2] = ds.omega;
  int k = 3;
  if (!model.is_pm()) {
    f[k++] = ds.i_r.real();
    f[k++] = ds.i_r.imag();
  }
  f[k++] = ds.i_s.real();
  f[k++] = ds.i_s.imag();
  return f;
}

SensorlessStatePoint zero_freq_steady_family(const Model& model, Complex is_bar, double xi) {
  if (!std::isfinite(is_bar.real()) || !std::isfinite(is_bar.imag()) || !std::isfinite(xi))
    throw std::invalid_argument("family point needs finite is_bar and xi");
  MachineState s;
  s.theta = xi;
  s.omega = 0.0;
  s.i_s = is_bar;
  s.i_r = Complex(0.0, 0.0);
  const LagrangianDerivatives lag =
      lagrangian_derivatives(model, xi, state_currents(model, s));
  SensorlessStatePoint p;
  p.X = pack_state(model, s, lag.dL_dtheta);
  p.U = Eigen::Vector2d(model.R_s() * is_bar.real(), model.R_s() * is_bar.imag());
  const double res = sensorless_rhs(model, p.X, p.U).lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-12))
    throw std::logic_error("steady-family assembly produced residual " + fmt17(res));
  return p;
}

SensorlessStatePoint steady_state_solve(const Model& model, Complex u_s,
                                        const SensorlessStatePoint& guess) {
  if (guess.X.size() != model.state_dim())
    throw std::invalid_argument("guess dimension mismatch");
  const Eigen::Vector2d U(u_s.real(), u_s.imag());
  Eigen::VectorXd X = guess.X;

  auto residual_norm = [&](const Eigen::VectorXd& Xtrial) -> double {
    try {
      return sensorless_rhs(model, Xtrial, U).norm();
    } catch (const std::domain_error&) {
      return kInf;
    } catch (const SingularMassMatrix&) {
      return kInf;
    }
  };

  constexpr int kMaxIter = 100;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const Eigen::VectorXd f = sensorless_rhs(model, X, U);
    if (f.lpNorm<Eigen::Infinity>() <= 1e-12) return SensorlessStatePoint{X, U};

    // Finite-difference Jacobian of f in X (same stencil as linearize).
    const Eigen::Index n = X.size();
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(X[k]));
      Eigen::VectorXd Xp = X, Xm = X;
      Xp[k] += h;
      Xm[k] -= h;
      J.col(k) = (sensorless_rhs(model, Xp, U) - sensorless_rhs(model, Xm, U)) /
                 (Xp[k] - Xm[k]);
    }
    const Eigen::VectorXd step = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(J)
                                     .solve(-f);
    const double f0 = f.norm();
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-10) {
      if (residual_norm(X + alpha * step) < f0) {
        X += alpha * step;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw NonConvergence("steady-state solve stalled (singular Jacobian or no descent) "
                           "after " + std::to_string(iter) + " iterations");
  }
  throw NonConvergence("steady-state solve did not reach residual 1e-12 in 100 iterations");
}

LinearizedSystem linearize(const Model& model, const SensorlessStatePoint& point,
                           double fd_scale) {
  const double res = sensorless_rhs(model, point.X, point.U).lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-9))
    throw std::invalid_argument("linearize requires a steady point, rhs residual is " +
                                fmt17(res));
  const Eigen::Index n = point.X.size();
  LinearizedSystem sys;
  sys.base = point;
  sys.A.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = fd_scale * (1.0 + std::abs(point.X[k]));
    Eigen::VectorXd Xp = point.X, Xm = point.X;
    Xp[k] += h;
    Xm[k] -= h;
    sys.A.col(k) = (sensorless_rhs(model, Xp, point.U) - sensorless_rhs(model, Xm, point.U)) /
                   (Xp[k] - Xm[k]);
  }
  sys.B.resize(n, 2);
  for (int k = 0; k < 2; ++k) {
    const double h = fd_scale * (1.0 + std::abs(point.U[k]));
    Eigen::Vector2d Up = point.U, Um = point.U;
    Up[k] += h;
    Um[k] -= h;
    sys.B.col(k) = (sensorless_rhs(model, point.X, Up) - sensorless_rhs(model, point.X, Um)) /
                   (Up[k] - Um[k]);
  }
  sys.C = Eigen::MatrixXd::Zero(2, n);
  sys.C(0, n - 2) = 1.0;
  sys.C(1, n - 1) = 1.0;
  return sys;
}

Eigen::MatrixXd observability_matrix(const LinearizedSystem& sys) {
  const Eigen::Index n = sys.A.rows();
  if (sys.A.cols() != n || sys.C.cols() != n)
    throw std::invalid_argument("inconsistent linearized-system dimensions");
  Eigen::MatrixXd O(2 * n, n);
  Eigen::MatrixXd block = sys.C;
  O.topRows(2) = block;
  for (Eigen::Index k = 1; k < n; ++k) {
    block = block * sys.A;
    O.middleRows(2 * k, 2) = block;
  }
  return O;
}

double RankReport::gap() const {
  const double dropped = sigma_max_dropped();
  if (rank == 0) return 0.0;
  if (dropped == 0.0) return kInf;
  return sigma_min_kept() / dropped;
}

std::string RankReport::verdict() const {
  if (full_rank()) return "observable";
  return "rank_deficient(" + std::to_string(deficiency()) + ")";
}

RankReport numerical_rank(const Eigen::MatrixXd& M) {
  if (!M.allFinite()) throw std::invalid_argument("numerical_rank needs finite entries");
  RankReport r;
  r.rows = M.rows();
  r.cols = M.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  r.singular_values = svd.singularValues();
  const double smax = r.singular_values.size() > 0 ? r.singular_values[0] : 0.0;
  r.tolerance = static_cast<double>(std::max(M.rows(), M.cols())) * smax * 1e-10;
  r.rank = 0;
  for (Eigen::Index k = 0; k < r.singular_values.size(); ++k)
    if (r.singular_values[k] > r.tolerance) ++r.rank;
  return r;
}

FamilyPointAnalysis analyze_family_point(const Model& model,
                                         const SensorlessStatePoint& point) {
  FamilyPointAnalysis a;
  a.point = point;
  a.sys = linearize(model, point);
  a.stack = numerical_rank(equilibrated_stack(a.sys));
  a.map = numerical_rank(normalize_columns(map_jacobian(a.sys)));

  // Family tangent dX/dxi = (d tau_L/dxi, 1, 0, ...) with
  // d tau_L/dxi = d2 L_m/dtheta2 along the family.
  const MachineState s = point.machine_state();
  const LagrangianDerivatives lag =
      lagrangian_derivatives(model, s.theta, state_currents(model, s));
  Eigen::VectorXd t = Eigen::VectorXd::Zero(point.dim());
  t[0] = lag.d2L_dtheta2;
  t[1] = 1.0;
  const Eigen::MatrixXd O = observability_matrix(a.sys);
  const double smax = spectral_norm(O);
  a.tangent_residual = (O * t).norm() / (smax * t.norm());
  return a;
}

namespace {

Model perturbed_model(const Model& model, Rng& rng) {
  const double sJ = rng.log_uniform(0.5, 2.0);
  const double sRs = rng.log_uniform(0.5, 2.0);
  const double sRr = rng.log_uniform(0.5, 2.0);
  const double sL = rng.log_uniform(0.5, 2.0);
  const double sI = rng.log_uniform(0.5, 2.0);
  if (model.is_pm()) {
    PmParams p = model.pm();
    p.J *= sJ;
    p.R_s *= sRs;
    p.lambda = p.lambda.scaled(sL);
    p.mu = p.mu.scaled(sL);
    p.ibar *= sI;
    return Model(model.kind(), p);
  }
  ImParams p = model.im();
  p.J *= sJ;
  p.R_s *= sRs;
  p.R_r *= sRr;
  p.L_m = p.L_m.scaled(sL);
  p.L_fs *= sL;
  p.L_fr *= sL;
  for (Harmonic& h : p.harmonics) h.L *= sL;
  return Model(model.kind(), p);
}

double is_draw_cap(const Model& model) {
  const double cap = model.rho_max();
  if (!std::isfinite(cap)) return 10.0;
  double head = cap;
  if (model.is_pm()) head -= model.pm().ibar;  // rho <= |i_s| + ibar
  return std::min(10.0, 0.25 * std::max(head, 0.0));
}

}  // namespace

void Prop1Summary::check() const {
  if (!all_rank_deficient)
    throw PropositionViolation(
        std::string("a zero-frequency family point of ") + to_string(kind) +
        " linearized to a fully observable pair; this contradicts the structural "
        "rank deficiency and indicates an implementation bug");
}

Prop1Summary verify_prop1(const Model& model, int samples, std::uint64_t seed,
                          bool param_draws) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  Prop1Summary sum;
  sum.kind = model.kind();
  sum.seed = seed;
  sum.min_gap = kInf;
  sum.min_map_gap = kInf;
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const Model m = param_draws ? perturbed_model(model, rng) : model;
    const double cap = is_draw_cap(m);
    const double mag = rng.log_uniform(0.05 * cap, cap);
    const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double xi = rng.uniform(0.0, 2.0 * 3.14159265358979323846 / m.n_p());
    const Complex is_bar = std::polar(mag, phase);

    const FamilyPointAnalysis a =
        analyze_family_point(m, zero_freq_steady_family(m, is_bar, xi));
    Prop1Sample row;
    row.xi = xi;
    row.is_mag = mag;
    row.dim = a.point.dim();
    row.rank = a.stack.rank;
    row.map_rank = a.map.rank;
    row.sigma_min_kept = a.stack.sigma_min_kept();
    row.sigma_max_dropped = a.stack.sigma_max_dropped();
    row.gap = a.stack.gap();
    row.map_gap = a.map.gap();
    row.tangent_residual = a.tangent_residual;
    sum.samples.push_back(row);

    sum.all_rank_deficient = sum.all_rank_deficient && (row.rank < row.dim);
    sum.map_rank_matches = sum.map_rank_matches && (row.map_rank == row.dim - 1);
    sum.min_gap = std::min(sum.min_gap, row.gap);
    sum.min_map_gap = std::min(sum.min_map_gap, row.map_gap);
    sum.max_tangent_residual = std::max(sum.max_tangent_residual, row.tangent_residual);
  }
  return sum;
}

std::string prop1_report_text(const Prop1Summary& s) {
  std::ostringstream os;
  os << "zero-stator-frequency observability sweep\n";
  os << "model kind: " << to_string(s.kind) << "\n";
  os << "seed: " << s.seed << "   samples: " << s.samples.size() << "\n";
  int min_rank = s.samples.empty() ? 0 : s.samples.front().rank;
  int max_rank = min_rank;
  for (const Prop1Sample& r : s.samples) {
    min_rank = std::min(min_rank, r.rank);
    max_rank = std::max(max_rank, r.rank);
  }
  const int dim = s.samples.empty() ? 0 : s.samples.front().dim;
  os << "state dimension: " << dim << "\n";
  os << "observability-matrix rank: " << min_rank;
  if (max_rank != min_rank) os << ".." << max_rank;
  os << " of " << dim << " at every family point\n";
  os << "steady-state-map rank: " << (s.map_rank_matches ? dim - 1 : -1) << " of " << dim
     << (s.map_rank_matches ? " at every family point\n" : " NOT matched\n");
  os << "smallest singular-value gap across the rank boundary: " << fmt17(s.min_gap) << "\n";
  os << "smallest map-rank gap: " << fmt17(s.min_map_gap) << "\n";
  os << "largest family-tangent kernel residual: " << fmt17(s.max_tangent_residual) << "\n";
  os << "verdict: "
     << (s.all_rank_deficient ? "unobservable at every sampled zero-frequency steady state"
                              : "PROPOSITION VIOLATION: an observable sample was found")
     << "\n";
  return os.str();
}

std::string prop1_samples_csv(const Prop1Summary& s) {
  std::ostringstream os;
  os << "kind,xi,is_mag,dim,rank,sigma_min_kept,sigma_max_dropped\n";
  for (const Prop1Sample& r : s.samples) {
    os << to_string(s.kind) << ',' << fmt17(r.xi) << ',' << fmt17(r.is_mag) << ',' << r.dim
       << ',' << r.rank << ',' << fmt17(r.sigma_min_kept) << ','
       << fmt17(r.sigma_max_dropped) << '\n';
  }
  return os.str();
}

}  // namespace emlag
