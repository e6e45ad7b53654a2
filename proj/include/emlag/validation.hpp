#pragma once

// Self-check suites run by the CLI against a loaded machine: AD-vs-analytic
// oracles, Legendre-vs-closed-form energy, theta periodicity, and the
// power-balance audit.

#include <cstdint>
#include <string>
#include <vector>

#include "emlag/models.hpp"

namespace emlag {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // worst error measured
  double tolerance = 0.0;  // the bound it was held against
  std::string detail;
};

struct ValidateOptions {
  int points = 1000;
  std::uint64_t seed = 20260809;
  // Fault injection for the negative-control path: scales the analytic flux
  // by (1 + perturbation) inside the oracle suite.
  double oracle_perturbation = 0.0;
};

std::vector<SuiteResult> run_validation_suites(const Model& model,
                                               const ValidateOptions& opts);

// Largest |a-b| / max(|a|, |b|, floor) over a batch, floor = 1e-3 max|a|.
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b);

// Random operating point generator shared by the suites: theta anywhere,
// current magnitudes log-uniform and capped so rho stays inside the curve
// domain.
double random_theta(const Model& model, class Rng& rng);
Complex random_current(const Model& model, Rng& rng);

}  // namespace emlag
