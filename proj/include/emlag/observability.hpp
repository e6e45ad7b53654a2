#pragma once

// Sensorless observability analysis at zero stator frequency: the steady
// family of Proposition-type operating points, finite-difference
// linearization, the Kalman observability stack and the steady-state-map
// Jacobian, SVD numerical rank, and the randomized sweep.

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "emlag/dynamics.hpp"
#include "emlag/models.hpp"

namespace emlag {

// Sensorless state X = (tau_L, theta, omega, [Re i_r, Im i_r,] Re i_s, Im i_s)
// with input U = (Re u_s, Im u_s) and output Y = (Re i_s, Im i_s).
struct SensorlessStatePoint {
  Eigen::VectorXd X;
  Eigen::Vector2d U;

  int dim() const { return static_cast<int>(X.size()); }
  double tau_L() const { return X[0]; }
  double theta() const { return X[1]; }
  double omega() const { return X[2]; }
  Complex i_s() const { return Complex(X[dim() - 2], X[dim() - 1]); }
  Complex i_r() const {
    return dim() == 7 ? Complex(X[3], X[4]) : Complex(0.0, 0.0);
  }
  Complex u_s() const { return Complex(U[0], U[1]); }
  Eigen::Vector2d Y() const { return X.tail<2>(); }
  MachineState machine_state() const;
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PropositionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// f(X, U) of the sensorless state space (dtau_L/dt = 0 in the first row).
Eigen::VectorXd sensorless_rhs(const Model& model, const Eigen::VectorXd& X,
                               const Eigen::Vector2d& U);

// The zero-stator-frequency steady family member for (is_bar, xi):
// theta = xi, omega = 0, i_s = is_bar, u_s = R_s is_bar, i_r = 0 for IM,
// tau_L = dL_m/dtheta at the point. Verifies the rhs residual internally.
SensorlessStatePoint zero_freq_steady_family(const Model& model, Complex is_bar, double xi);

// Damped Gauss-Newton root finder for f(X, U) = 0 with a minimum-norm step
// (the Jacobian is structurally rank-deficient at every root).
SensorlessStatePoint steady_state_solve(const Model& model, Complex u_s,
                                        const SensorlessStatePoint& guess);

struct LinearizedSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  SensorlessStatePoint base;
};

// Central finite differences with per-coordinate step 1e-6 (1 + |x_k|);
// requires a steady point (rhs residual <= 1e-9).
LinearizedSystem linearize(const Model& model, const SensorlessStatePoint& point,
                           double fd_scale = 1e-6);

// Exact stacked products [C; CA; ...; CA^{dim-1}].
Eigen::MatrixXd observability_matrix(const LinearizedSystem& sys);

struct RankReport {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  int rank = 0;
  Eigen::VectorXd singular_values;  // descending
  double tolerance = 0.0;

  bool full_rank() const { return rank == static_cast<int>(cols); }
  int deficiency() const { return static_cast<int>(cols) - rank; }
  double sigma_min_kept() const { return rank > 0 ? singular_values[rank - 1] : 0.0; }
  double sigma_max_dropped() const {
    return rank < singular_values.size() ? singular_values[rank] : 0.0;
  }
  // Ratio across the rank boundary; infinity when nothing was dropped or the
  // dropped value is an exact zero.
  double gap() const;
  std::string verdict() const;
};

// SVD rank with tolerance max(rows, cols) * sigma_max * 1e-10.
RankReport numerical_rank(const Eigen::MatrixXd& M);

struct FamilyPointAnalysis {
  SensorlessStatePoint point;
  LinearizedSystem sys;
  // Rank of the Kalman stack, computed on a rank-preserving equilibrated
  // copy (block-row scaling by (1+||A||)^-k, unit column norms): the raw
  // stack spans ~16 orders of magnitude in SI units and cannot reveal the
  // structural deficiency in double precision.
  RankReport stack;
  // Rank of the steady-state-map Jacobian [A; C] (column-normalized).
  RankReport map;
  // || O t || / (sigma_max(O) ||t||) for the family tangent t = dX/dxi,
  // against the raw stack.
  double tangent_residual = 0.0;
};

FamilyPointAnalysis analyze_family_point(const Model& model,
                                         const SensorlessStatePoint& point);

struct Prop1Sample {
  double xi = 0.0;
  double is_mag = 0.0;
  int dim = 0;
  int rank = 0;            // Kalman stack
  int map_rank = 0;        // [A; C]
  double sigma_min_kept = 0.0;
  double sigma_max_dropped = 0.0;
  double gap = 0.0;
  double map_gap = 0.0;
  double tangent_residual = 0.0;
};

struct Prop1Summary {
  ModelKind kind = ModelKind::pm_standard;
  std::uint64_t seed = 0;
  std::vector<Prop1Sample> samples;
  bool all_rank_deficient = true;   // every sample has stack rank < dim
  bool map_rank_matches = true;     // every sample has map rank == dim - 1
  double min_gap = 0.0;             // smallest stack gap over the sweep
  double min_map_gap = 0.0;
  double max_tangent_residual = 0.0;

  // Throws PropositionViolation if any sample came out fully observable.
  void check() const;
};

// Randomized sweep over family points (is_bar, xi) and, when param_draws is
// set, log-uniform scale draws on J, resistances and the inductance scale.
Prop1Summary verify_prop1(const Model& model, int samples, std::uint64_t seed,
                          bool param_draws = true);

std::string prop1_report_text(const Prop1Summary& summary);
std::string prop1_samples_csv(const Prop1Summary& summary);

}  // namespace emlag
