#pragma once

// Machine-definition and run-configuration files (JSON), and the CSV
// writers for trajectories and audit residuals.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "emlag/dynamics.hpp"
#include "emlag/energy.hpp"
#include "emlag/models.hpp"

namespace emlag {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Model load_machine_file(const std::filesystem::path& path);
Model machine_from_json_text(const std::string& text, const std::string& origin);
std::string machine_to_json_text(const Model& model);
void save_machine_file(const Model& model, const std::filesystem::path& path);

struct RunConfig {
  std::filesystem::path machine_path;
  Model model = Model::default_model(ModelKind::pm_standard);
  DriveInput drive;
  MachineState initial;
  double t_end = 0.0;
  double dt = 0.0;
  std::string trajectory_path = "trajectory.csv";
  std::string residual_path = "residuals.csv";
  double drift_bound = 1e-6;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Columns: t, theta, omega, i_s_re, i_s_im, [i_r_re, i_r_im,]
// phi_s_re, phi_s_im, [phi_r_re, phi_r_im,] torque_em, hamiltonian.
// 17 significant digits, C locale.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

void write_residual_csv(std::ostream& os, const PowerBalanceAudit& audit);

}  // namespace emlag
