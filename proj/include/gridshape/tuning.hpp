#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridshape/netmodel.hpp"
#include "gridshape/stability.hpp"

namespace gridshape {

struct TuningTargets {
  double cos_psi_d = 0.0;      // minimum damping ratio
  double alpha_d = 0.0;        // minimum decay rate (1/s)
  double delta_p = 0.0;        // largest net power imbalance (pu)
  double delta_omega_d = 0.0;  // allowed COI deviation (pu)

  void validate() const;
};

// Frequency deviation to pu: "200mHz" and "0.2Hz" are divided by f0; a bare
// number is taken as pu.
double parse_frequency_deviation(std::string_view text, double f0);

enum class Regime { LinearBoth, RelaxedCoi, SaturatedDamping, Infeasible };
std::string_view to_string(Regime regime);

struct TuningResult {
  double d_b_osc = 0.0;
  double d_b_osc_damping_term = 0.0;  // 2 sqrt(lambda_n m) cos(psi_d) - d - d_t
  double d_b_osc_decay_term = 0.0;    // 2 m alpha_d - d - d_t
  double d_b_coi = 0.0;               // value used (override if given)
  double d_b_coi_formula = 0.0;       // value from the imbalance bound
  bool coi_overridden = false;
  double d_b = 0.0;
  Regime regime = Regime::LinearBoth;
  double achieved_cos_psi = 0.0;
  double achieved_alpha = 0.0;
  double m_v_min = 0.0;
  double switch_point = 0.0;   // 2 sqrt(lambda_2 m) - d - d_t
  double relaxed_bound = 0.0;  // (m alpha_d^2 + lambda_2)/alpha_d - d - d_t
};

double tune_db_osc(const RepresentativeParams& p, const ModeBounds& bounds, const TuningTargets& targets);
double tune_db_coi(const RepresentativeParams& p, const TuningTargets& targets);

// Combines the oscillation and COI requirements. Throws InfeasibleDecayTarget
// or CoiDroopExceedsRelaxedBound, naming the violated bound.
TuningResult tune_db(const RepresentativeParams& p, const ModeBounds& bounds, const TuningTargets& targets,
                     std::optional<double> coi_override = std::nullopt);

// Same as tune_db but reports infeasibility as Regime::Infeasible.
TuningResult classify(const RepresentativeParams& p, const ModeBounds& bounds, const TuningTargets& targets,
                      std::optional<double> coi_override = std::nullopt);

// Smallest virtual inertia with a Nadir-free COI response.
double vi_mv_min(const RepresentativeParams& p, double d_b);

enum class FrontierSegment { Linear, Knee, Vertical };
std::string_view to_string(FrontierSegment segment);

struct FrontierPoint {
  double cos_psi = 0.0;
  double alpha = 0.0;
  double d_b = 0.0;
  FrontierSegment segment = FrontierSegment::Linear;
};

// Achievable (damping, decay) pairs as d_b sweeps [0, inf), in increasing d_b.
std::vector<FrontierPoint> achievable_frontier(const RepresentativeParams& p, const ModeBounds& bounds,
                                               int n_points = 256);

// Frontier point dominating the target with the smallest d_b, if any.
std::optional<FrontierPoint> frontier_project(const TuningTargets& targets, const std::vector<FrontierPoint>& frontier);

// Exact minimal-d_b dominating point of the continuous frontier.
std::optional<FrontierPoint> frontier_project_exact(const RepresentativeParams& p, const ModeBounds& bounds,
                                                    const TuningTargets& targets);

}  // namespace gridshape
