#include "gridshape/ops.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "gridshape/error.hpp"
#include "gridshape/locus.hpp"
#include "gridshape/report.hpp"

namespace gridshape::ops {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

nlohmann::json grid_json(const SimGrid& g) {
  return {{"t_end", number(g.t_end)}, {"dt", number(g.dt)}, {"onset", number(g.onset)}};
}

void check_u0(const Prepared& p, const Eigen::VectorXd& u0) {
  if (u0.size() != static_cast<Eigen::Index>(p.c.size()))
    invalid("u0 has " + std::to_string(u0.size()) + " entries but the case has " + std::to_string(p.c.size()) +
            " buses");
}

ClosedLoop closed_loop(const Prepared& p, const ControllerSpec& spec, bool heterogeneous) {
  const NetworkCase sys = heterogeneous ? p.c : proportional_case(p.c, p.params);
  return full_system_ss(sys, scaled_controllers(spec, p.params));
}

}  // namespace

Prepared prepare(const NetworkCase& c) {
  Prepared p{c, representative_params(c), {}};
  p.spectrum = scaled_spectrum(build_laplacian(c), p.params.r);
  return p;
}

nlohmann::json spectrum(const Prepared& p) {
  nlohmann::json j = report_header(p.c);
  j["spectrum"] = spectrum_json(p.spectrum, p.params);
  return j;
}

nlohmann::json analyze(const Prepared& p, const ControllerSpec& spec, const std::optional<StabilityRegion>& region) {
  nlohmann::json j = report_header(p.c);
  j["controller"] = controller_json(spec);
  j["spectrum"] = spectrum_json(p.spectrum, p.params);
  j["analysis"] = analysis_json(analyze_modes(spec, p.params, p.spectrum), region);
  const ModeBounds b = mode_bounds(p.spectrum);
  if (spec.kind == ControllerKind::FS) {
    const ConvergenceRates rates = fs_convergence_rate(p.params, spec.d_b, b.lambda_2);
    j["closed_form"] = {{"min_damping", number(fs_min_damping(p.params, spec.d_b, b.lambda_n))},
                        {"min_decay", number(rates.system_rate)},
                        {"coi_rate", number(rates.coi_rate)}};
  } else if (spec.kind == ControllerKind::VI) {
    const ViShape shape = vi_shape(p.params, spec.d_b, spec.m_v);
    const double floor_mv = vi_mv_min(p.params, spec.d_b);
    j["closed_form"] = {{"omega_n", number(shape.omega_n)},
                        {"xi", number(shape.xi)},
                        {"m_v_min", number(floor_mv)},
                        {"nadir_free", spec.m_v >= floor_mv - 1e-9 * std::max(1.0, std::abs(floor_mv))}};
  }
  return j;
}

nlohmann::json tune(const Prepared& p, const TuningTargets& targets, std::optional<double> coi_override) {
  const ModeBounds b = mode_bounds(p.spectrum);
  const TuningResult r = tune_db(p.params, b, targets, coi_override);
  nlohmann::json j = report_header(p.c);
  j["tuning"] = tuning_json(r, targets);
  j["lambda_2"] = number(b.lambda_2);
  j["lambda_n"] = number(b.lambda_n);
  return j;
}

nlohmann::json locus(const Prepared& p, const ControllerSpec& spec, const std::optional<std::vector<double>>& grid) {
  const LocusGeometry g = locus_geometry(spec, p.params);
  const std::vector<double> gains = grid ? *grid : default_locus_grid(g, p.spectrum);
  nlohmann::json j = report_header(p.c);
  j["controller"] = controller_json(spec);
  j["geometry"] = geometry_json(g);
  j["mode_gains"] = number_array(p.spectrum.lambda.tail(p.spectrum.lambda.size() - 1));
  j["branches"] = branches_json(trace_locus(g.loop, gains));
  return j;
}

nlohmann::json frontier(const Prepared& p, int n_points, const std::optional<TuningTargets>& targets) {
  const ModeBounds b = mode_bounds(p.spectrum);
  const std::vector<FrontierPoint> f = achievable_frontier(p.params, b, n_points);
  nlohmann::json j = report_header(p.c);
  j["frontier"] = frontier_json(f);
  j["max_alpha"] = number(std::sqrt(b.lambda_2 / p.params.m));
  j["knee_cos_psi"] = number(std::sqrt(b.lambda_2 / b.lambda_n));
  if (targets) {
    j["targets"] = targets_json(*targets);
    const auto proj = frontier_project_exact(p.params, b, *targets);
    if (proj) {
      j["projection"] = frontier_json({*proj})[0];
      j["feasible"] = true;
    } else {
      j["projection"] = nullptr;
      j["feasible"] = false;
    }
  }
  return j;
}

SimMode sim_mode_from_string(std::string_view text) {
  if (text == "modal") return SimMode::modal;
  if (text == "direct") return SimMode::direct;
  if (text == "both") return SimMode::both;
  invalid("unknown simulation mode '" + std::string(text) + "' (expected modal, direct or both)");
}

Simulated simulate_responses(const Prepared& p, const SimulateRequest& req) {
  check_u0(p, req.u0);
  req.controller.validate();
  if (req.heterogeneous && req.mode != SimMode::direct)
    invalid("heterogeneous simulation is only available in direct mode");
  Simulated out;
  if (req.mode != SimMode::direct)
    out.modal = modal_step_response(req.controller, p.params, p.spectrum, req.u0, req.grid);
  if (req.mode != SimMode::modal)
    out.direct = step_response(closed_loop(p, req.controller, req.heterogeneous), req.u0, req.grid);
  return out;
}

nlohmann::json simulate(const Prepared& p, const SimulateRequest& req, const Simulated& sims,
                        std::optional<std::size_t> max_points) {
  nlohmann::json j = report_header(p.c);
  j["controller"] = controller_json(req.controller);
  j["grid"] = grid_json(req.grid);
  j["heterogeneous"] = req.heterogeneous;
  const ClosedLoop sys = closed_loop(p, req.controller, req.heterogeneous);
  j["steady_state"] = number_array(steady_state(sys, req.u0));
  if (sims.modal) j["modal"] = response_json(*sims.modal, max_points);
  if (sims.direct) j["direct"] = response_json(*sims.direct, max_points);
  if (sims.modal && sims.direct)
    j["max_discrepancy"] = number((sims.modal->omega - sims.direct->omega).cwiseAbs().maxCoeff());
  return j;
}

Compared compare(const Prepared& p, const CompareRequest& req) {
  check_u0(p, req.u0);
  const ModeBounds b = mode_bounds(p.spectrum);
  Compared out;
  out.fs = {ControllerKind::FS, req.d_b, 0.0};
  out.vi = {ControllerKind::VI, req.d_b, req.m_v.value_or(vi_mv_min(p.params, req.d_b))};
  out.fs.validate();
  out.vi.validate();
  const RateComparison verdict = fs_beats_vi(p.params, req.d_b, out.vi.m_v);
  const ViShape shape = vi_rate_bound(p.params, req.d_b, out.vi.m_v);

  const ClosedLoop fs_sys = closed_loop(p, out.fs, req.heterogeneous);
  const ClosedLoop vi_sys = closed_loop(p, out.vi, req.heterogeneous);
  out.fs_response = step_response(fs_sys, req.u0, req.grid);
  out.vi_response = step_response(vi_sys, req.u0, req.grid);
  const EnvelopeFit fs_fit = fit_envelope(out.fs_response, steady_state(fs_sys, req.u0));
  const EnvelopeFit vi_fit = fit_envelope(out.vi_response, steady_state(vi_sys, req.u0));

  nlohmann::json j = report_header(p.c);
  j["grid"] = grid_json(req.grid);
  j["heterogeneous"] = req.heterogeneous;
  j["fs"] = {{"controller", controller_json(out.fs)},
             {"envelope", envelope_json(fs_fit)},
             {"min_decay", number(fs_min_decay(p.params, req.d_b, b.lambda_2))},
             {"coi_rate", number((p.params.d + req.d_b + p.params.d_t) / p.params.m)}};
  j["vi"] = {{"controller", controller_json(out.vi)},
             {"envelope", envelope_json(vi_fit)},
             {"omega_n", number(shape.omega_n)},
             {"xi", number(shape.xi)},
             {"m_v_min", number(vi_mv_min(p.params, req.d_b))}};
  j["rate_comparison"] = {{"lhs", number(verdict.lhs)}, {"margin", number(verdict.margin)},
                          {"fs_faster", verdict.fs_faster}};
  j["simulated_fs_faster"] = fs_fit.rate > vi_fit.rate;
  out.report = std::move(j);
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) invalid("empty entry in vector '" + text + "'");
    item = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v))
      invalid("cannot parse number '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) invalid("vector is empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) invalid("expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) invalid("expected a non-empty array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace gridshape::ops
