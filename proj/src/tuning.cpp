#include "gridshape/tuning.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "gridshape/error.hpp"

namespace gridshape {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

double max_decay(const RepresentativeParams& p, const ModeBounds& b) { return std::sqrt(b.lambda_2 / p.m); }

// Comparisons against closed-form bounds tolerate round-off at the boundary.
constexpr double kBoundRelTol = 1e-12;
bool exceeds(double value, double bound) { return value > bound + kBoundRelTol * std::max(1.0, std::abs(bound)); }

}  // namespace

void TuningTargets::validate() const {
  if (!(cos_psi_d > 0.0 && cos_psi_d <= 1.0)) invalid("cos_psi_d must lie in (0, 1]");
  if (!(alpha_d > 0.0) || !std::isfinite(alpha_d)) invalid("alpha_d must be positive");
  if (!(delta_p >= 0.0) || !std::isfinite(delta_p)) invalid("delta_p must be non-negative");
  if (!(delta_omega_d > 0.0) || !std::isfinite(delta_omega_d)) invalid("delta_omega_d must be positive");
}

double parse_frequency_deviation(std::string_view text, double f0) {
  std::string s;
  for (const char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  double scale = 1.0;
  auto ends_with = [&](std::string_view suffix) {
    if (s.size() < suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) != suffix[i]) return false;
    return true;
  };
  if (ends_with("mhz")) {
    scale = 1e-3 / f0;
    s.resize(s.size() - 3);
  } else if (ends_with("hz")) {
    scale = 1.0 / f0;
    s.resize(s.size() - 2);
  } else if (ends_with("pu")) {
    s.resize(s.size() - 2);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    invalid("cannot parse frequency deviation '" + std::string(text) + "'");
  if (!(value > 0.0) || !std::isfinite(value)) invalid("frequency deviation must be positive");
  return value * scale;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::LinearBoth: return "LinearBoth";
    case Regime::RelaxedCoi: return "RelaxedCoi";
    case Regime::SaturatedDamping: return "SaturatedDamping";
    case Regime::Infeasible: return "Infeasible";
  }
  return "Infeasible";
}

std::string_view to_string(FrontierSegment segment) {
  switch (segment) {
    case FrontierSegment::Linear: return "linear";
    case FrontierSegment::Knee: return "knee";
    case FrontierSegment::Vertical: return "vertical";
  }
  return "linear";
}

double tune_db_osc(const RepresentativeParams& p, const ModeBounds& b, const TuningTargets& t) {
  t.validate();
  if (exceeds(t.alpha_d, max_decay(p, b)))
    throw Error(ErrorCode::InfeasibleDecayTarget, "decay target is not reachable by frequency shaping",
                "alpha_d = " + std::to_string(t.alpha_d) + " > sqrt(lambda_2/m) = " + std::to_string(max_decay(p, b)));
  const double damping_term = 2.0 * std::sqrt(b.lambda_n * p.m) * t.cos_psi_d - (p.d + p.d_t);
  const double decay_term = 2.0 * p.m * t.alpha_d - (p.d + p.d_t);
  return std::max({0.0, damping_term, decay_term});
}

double tune_db_coi(const RepresentativeParams& p, const TuningTargets& t) {
  t.validate();
  return std::max(0.0, t.delta_p / (p.r_sum * t.delta_omega_d) - (p.d + p.d_t));
}

double vi_mv_min(const RepresentativeParams& p, double d_b) {
  const double root = std::sqrt(p.d_t) + std::sqrt(p.d + p.d_t + d_b);
  return p.tau * root * root - p.m;
}

namespace {

TuningResult evaluate(const RepresentativeParams& p, const ModeBounds& b, const TuningTargets& t,
                      std::optional<double> coi_override, bool throw_on_infeasible) {
  p.validate();
  t.validate();
  if (!(b.lambda_2 > 0.0) || !(b.lambda_n >= b.lambda_2)) invalid("need 0 < lambda_2 <= lambda_n");
  if (coi_override && (!(*coi_override >= 0.0) || !std::isfinite(*coi_override)))
    invalid("COI droop override must be non-negative");

  TuningResult r;
  r.d_b_osc_damping_term = 2.0 * std::sqrt(b.lambda_n * p.m) * t.cos_psi_d - (p.d + p.d_t);
  r.d_b_osc_decay_term = 2.0 * p.m * t.alpha_d - (p.d + p.d_t);
  r.d_b_osc = std::max({0.0, r.d_b_osc_damping_term, r.d_b_osc_decay_term});
  r.d_b_coi_formula = tune_db_coi(p, t);
  r.coi_overridden = coi_override.has_value();
  r.d_b_coi = coi_override.value_or(r.d_b_coi_formula);
  r.d_b = std::max(r.d_b_osc, r.d_b_coi);
  r.switch_point = 2.0 * std::sqrt(b.lambda_2 * p.m) - (p.d + p.d_t);
  r.relaxed_bound = (p.m * t.alpha_d * t.alpha_d + b.lambda_2) / t.alpha_d - (p.d + p.d_t);
  r.achieved_cos_psi = fs_min_damping(p, r.d_b, b.lambda_n);
  r.achieved_alpha = fs_min_decay(p, r.d_b, b.lambda_2);
  r.m_v_min = vi_mv_min(p, r.d_b);

  auto fail = [&](ErrorCode code, const std::string& msg, const std::string& detail) {
    if (throw_on_infeasible) throw Error(code, msg, detail);
    r.regime = Regime::Infeasible;
    return r;
  };
  if (exceeds(t.alpha_d, max_decay(p, b)))
    return fail(ErrorCode::InfeasibleDecayTarget, "decay target is not reachable by frequency shaping",
                "alpha_d = " + std::to_string(t.alpha_d) + " > sqrt(lambda_2/m) = " + std::to_string(max_decay(p, b)));
  if (exceeds(r.d_b_coi, r.relaxed_bound))
    return fail(ErrorCode::CoiDroopExceedsRelaxedBound, "COI droop requirement breaks the decay target",
                "d_b_coi = " + std::to_string(r.d_b_coi) + " > relaxed bound " + std::to_string(r.relaxed_bound));
  if (exceeds(r.d_b_osc, r.relaxed_bound))
    return fail(ErrorCode::InfeasibleDecayTarget, "damping target forces d_b past the decay target",
                "d_b_osc = " + std::to_string(r.d_b_osc) + " > relaxed bound " + std::to_string(r.relaxed_bound));

  if (r.d_b_osc > r.switch_point)
    r.regime = Regime::SaturatedDamping;
  else if (r.d_b_coi > r.switch_point)
    r.regime = Regime::RelaxedCoi;
  else
    r.regime = Regime::LinearBoth;
  return r;
}

}  // namespace

TuningResult tune_db(const RepresentativeParams& p, const ModeBounds& b, const TuningTargets& t,
                     std::optional<double> coi_override) {
  return evaluate(p, b, t, coi_override, true);
}

TuningResult classify(const RepresentativeParams& p, const ModeBounds& b, const TuningTargets& t,
                      std::optional<double> coi_override) {
  return evaluate(p, b, t, coi_override, false);
}

std::vector<FrontierPoint> achievable_frontier(const RepresentativeParams& p, const ModeBounds& b, int n_points) {
  p.validate();
  if (!(b.lambda_2 > 0.0) || !(b.lambda_n >= b.lambda_2)) invalid("need 0 < lambda_2 <= lambda_n");
  if (n_points < 2) invalid("frontier needs at least two points per branch");
  const double root_n = 2.0 * std::sqrt(b.lambda_n * p.m);
  const double base = p.d + p.d_t;
  const double c_lo = base / root_n;
  const double c_knee = std::sqrt(b.lambda_2 / b.lambda_n);
  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<FrontierPoint> out;

  // Linear in cos(psi) up to the knee, decay = sqrt(lambda_n/m) cos(psi).
  if (c_lo < c_knee) {
    for (int i = 0; i < n_points; ++i) {
      const double c = c_lo + (c_knee - c_lo) * std::sin(half_pi * i / (n_points - 1));
      // The knee is placed on the switch point itself so its decay is the peak.
      const double d_b = i == 0 ? 0.0 : i == n_points - 1 ? 2.0 * std::sqrt(b.lambda_2 * p.m) - base : root_n * c - base;
      out.push_back({i == 0 ? c : fs_min_damping(p, d_b, b.lambda_n), fs_min_decay(p, d_b, b.lambda_2), d_b,
                     FrontierSegment::Linear});
    }
  }
  // Past the knee the decay falls while the damping keeps rising to 1.
  const double start = std::max(c_knee, c_lo);
  if (start < 1.0) {
    for (int i = out.empty() ? 0 : 1; i <= n_points; ++i) {
      const double c = i == n_points ? 1.0 : start + (1.0 - start) * (1.0 - std::cos(half_pi * i / n_points));
      const double d_b = (i == 0 && c_lo >= c_knee) ? 0.0 : root_n * c - base;
      out.push_back({fs_min_damping(p, d_b, b.lambda_n), fs_min_decay(p, d_b, b.lambda_2), d_b,
                     FrontierSegment::Knee});
    }
  }
  // Damping saturated at 1; decay falls towards zero as d_b grows.
  const double d_sat = std::max(0.0, root_n - base);
  const double alpha_top = fs_min_decay(p, d_sat, b.lambda_2);
  if (out.empty()) out.push_back({1.0, alpha_top, d_sat, FrontierSegment::Vertical});
  for (int j = 1; j <= n_points; ++j) {
    const double alpha = alpha_top * std::pow(10.0, -3.0 * j / n_points);
    const double d_b = (p.m * alpha * alpha + b.lambda_2) / alpha - base;
    out.push_back({1.0, fs_min_decay(p, d_b, b.lambda_2), d_b, FrontierSegment::Vertical});
  }
  return out;
}

std::optional<FrontierPoint> frontier_project(const TuningTargets& t, const std::vector<FrontierPoint>& frontier) {
  std::optional<FrontierPoint> best;
  for (const FrontierPoint& f : frontier) {
    if (f.cos_psi >= t.cos_psi_d && f.alpha >= t.alpha_d && (!best || f.d_b < best->d_b)) best = f;
  }
  return best;
}

std::optional<FrontierPoint> frontier_project_exact(const RepresentativeParams& p, const ModeBounds& b,
                                                    const TuningTargets& t) {
  if (!(t.cos_psi_d > 0.0 && t.cos_psi_d <= 1.0) || !(t.alpha_d > 0.0)) invalid("targets must be positive");
  if (exceeds(t.alpha_d, max_decay(p, b))) return std::nullopt;
  const double base = p.d + p.d_t;
  const double d_b = std::max({0.0, 2.0 * std::sqrt(b.lambda_n * p.m) * t.cos_psi_d - base,
                               2.0 * p.m * t.alpha_d - base});
  const double relaxed = (p.m * t.alpha_d * t.alpha_d + b.lambda_2) / t.alpha_d - base;
  if (exceeds(d_b, relaxed)) return std::nullopt;
  const double c = fs_min_damping(p, d_b, b.lambda_n);
  const double a = fs_min_decay(p, d_b, b.lambda_2);
  const double root_n = 2.0 * std::sqrt(b.lambda_n * p.m);
  const FrontierSegment seg = c >= 1.0 && d_b > root_n - base ? FrontierSegment::Vertical
                              : d_b <= 2.0 * std::sqrt(b.lambda_2 * p.m) - base ? FrontierSegment::Linear
                                                                                 : FrontierSegment::Knee;
  return FrontierPoint{c, a, d_b, seg};
}

}  // namespace gridshape
