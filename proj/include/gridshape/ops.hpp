#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "gridshape/dynamics.hpp"
#include "gridshape/netmodel.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"

// Report-producing operations shared by the command line and the HTTP service.
namespace gridshape::ops {

// Representative parameters and spectrum of a case.
struct Prepared {
  NetworkCase c;
  RepresentativeParams params;
  ScaledSpectrum spectrum;
};
Prepared prepare(const NetworkCase& c);

nlohmann::json spectrum(const Prepared& p);

nlohmann::json analyze(const Prepared& p, const ControllerSpec& spec, const std::optional<StabilityRegion>& region);

nlohmann::json tune(const Prepared& p, const TuningTargets& targets, std::optional<double> coi_override);

nlohmann::json locus(const Prepared& p, const ControllerSpec& spec, const std::optional<std::vector<double>>& grid);

nlohmann::json frontier(const Prepared& p, int n_points, const std::optional<TuningTargets>& targets);

enum class SimMode { modal, direct, both };
SimMode sim_mode_from_string(std::string_view text);

struct SimulateRequest {
  ControllerSpec controller;
  Eigen::VectorXd u0;
  SimGrid grid{40.0, 0.01, 1.0};
  SimMode mode = SimMode::direct;
  bool heterogeneous = false;  // simulate the case's own bus parameters
};

struct Simulated {
  std::optional<StepResponse> modal;
  std::optional<StepResponse> direct;
};
Simulated simulate_responses(const Prepared& p, const SimulateRequest& req);

// max_points limits each series through min/max bucketing.
nlohmann::json simulate(const Prepared& p, const SimulateRequest& req, const Simulated& sims,
                        std::optional<std::size_t> max_points);

struct CompareRequest {
  double d_b = 0.0;
  std::optional<double> m_v;  // defaults to the no-Nadir minimum
  Eigen::VectorXd u0;
  SimGrid grid{40.0, 0.01, 1.0};
  bool heterogeneous = false;
};

struct Compared {
  ControllerSpec fs;
  ControllerSpec vi;
  StepResponse fs_response;
  StepResponse vi_response;
  nlohmann::json report;
};
Compared compare(const Prepared& p, const CompareRequest& req);

Eigen::VectorXd parse_vector(const std::string& text);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace gridshape::ops
