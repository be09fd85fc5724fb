#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "gridshape/dynamics.hpp"
#include "gridshape/ops.hpp"
#include "gridshape/tuning.hpp"

namespace gridshape::cli {

enum class Command { analyze, tune, locus, frontier, simulate, compare, serve };

struct RunConfig {
  Command command = Command::analyze;
  std::filesystem::path case_path;
  ControllerSpec controller{ControllerKind::FS, 0.0, 0.0};
  std::optional<double> m_v;  // VI defaults to the no-Nadir minimum
  std::optional<double> cos_psi_d;
  std::optional<double> alpha_d;
  double delta_p = 0.0;
  std::string delta_omega_d = "200mHz";
  std::optional<double> coi_override;
  std::string u0;
  SimGrid grid{40.0, 0.01, 1.0};
  ops::SimMode sim_mode = ops::SimMode::direct;
  bool heterogeneous = false;
  int n_points = 256;
  std::optional<std::filesystem::path> output_dir;
  std::set<std::string> formats{"json"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_dir = "cases";
  std::optional<std::string> cors_origin;
};

// Executes one command. Reports go to out (or output_dir); errors are
// written to err as JSON. Returns 0, 1 for invalid input, 2 for numeric failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv and runs.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gridshape::cli
