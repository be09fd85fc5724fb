#include "gridshape/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "gridshape/error.hpp"

namespace gridshape {

std::string_view version() { return GRIDSHAPE_VERSION; }

nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::json number_array(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

nlohmann::json complex_json(Complex z) { return {number(z.real()), number(z.imag())}; }

nlohmann::json controller_json(const ControllerSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}, {"d_b", number(spec.d_b)}};
  if (spec.kind == ControllerKind::VI) j["m_v"] = number(spec.m_v);
  return j;
}

ControllerSpec controller_from_json(const nlohmann::json& j) {
  try {
    ControllerSpec spec;
    spec.kind = controller_kind_from_string(j.at("kind").get<std::string>());
    spec.d_b = j.value("d_b", 0.0);
    spec.m_v = j.value("m_v", 0.0);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed controller: ") + e.what());
  }
}

nlohmann::json targets_json(const TuningTargets& t) {
  return {{"cos_psi_d", number(t.cos_psi_d)},
          {"alpha_d", number(t.alpha_d)},
          {"delta_p", number(t.delta_p)},
          {"delta_omega_d", number(t.delta_omega_d)}};
}

nlohmann::json report_header(const NetworkCase& c) {
  return {{"version", version()}, {"case_hash", case_hash(c)}, {"case_name", c.name}};
}

nlohmann::json spectrum_json(const ScaledSpectrum& s, const RepresentativeParams& p) {
  nlohmann::json j;
  j["n"] = s.size();
  j["r"] = number_array(s.r);
  j["lambda"] = number_array(s.lambda);
  if (s.size() >= 2) {
    j["lambda_2"] = number(s.fiedler());
    j["lambda_n"] = number(s.largest());
  }
  j["params"] = {{"m", number(p.m)}, {"d", number(p.d)}, {"d_t", number(p.d_t)},
                 {"tau", number(p.tau)}, {"r_sum", number(p.r_sum)}};
  return j;
}

nlohmann::json analysis_json(const ModeAnalysis& a, const std::optional<StabilityRegion>& region) {
  nlohmann::json j;
  std::optional<RegionCheck> check;
  if (region) check = check_alpha_psi(a, *region);
  auto modes = nlohmann::json::array();
  for (std::size_t i = 0; i < a.per_mode.size(); ++i) {
    const ModeInfo& m = a.per_mode[i];
    auto poles = nlohmann::json::array();
    for (const Complex& s : m.poles) poles.push_back(complex_json(s));
    nlohmann::json mj{{"k", m.k},
                      {"lambda", number(m.lambda)},
                      {"poles", poles},
                      {"damping", number(m.damping)},
                      {"decay", number(m.decay)}};
    if (check) mj["pass"] = static_cast<bool>(check->per_mode[i]);
    modes.push_back(std::move(mj));
  }
  j["per_mode"] = std::move(modes);
  j["min_damping"] = number(a.min_damping);
  j["min_decay"] = number(a.min_decay);
  j["argmin_damping_mode"] = a.argmin_damping_mode;
  j["argmin_decay_mode"] = a.argmin_decay_mode;
  if (region) {
    j["region"] = {{"alpha", number(region->alpha)}, {"psi", number(region->psi)},
                   {"cos_psi", number(std::cos(region->psi))}};
    j["pass"] = check->pass;
  }
  return j;
}

nlohmann::json tuning_json(const TuningResult& r, const TuningTargets& t) {
  return {{"inputs", targets_json(t)},
          {"d_b_osc", number(r.d_b_osc)},
          {"d_b_osc_terms", {number(r.d_b_osc_damping_term), number(r.d_b_osc_decay_term)}},
          {"d_b_coi", number(r.d_b_coi)},
          {"d_b_coi_formula", number(r.d_b_coi_formula)},
          {"coi_overridden", r.coi_overridden},
          {"d_b", number(r.d_b)},
          {"regime", to_string(r.regime)},
          {"achieved", {{"cos_psi_bar", number(r.achieved_cos_psi)}, {"alpha_bar", number(r.achieved_alpha)}}},
          {"m_v_min", number(r.m_v_min)},
          {"switch_point", number(r.switch_point)},
          {"relaxed_bound", number(r.relaxed_bound)}};
}

nlohmann::json geometry_json(const LocusGeometry& g) {
  auto poles = nlohmann::json::array();
  for (const Complex& s : g.open_poles) poles.push_back(complex_json(s));
  auto zeros = nlohmann::json::array();
  for (const Complex& s : g.open_zeros) zeros.push_back(complex_json(s));
  auto angles = nlohmann::json::array();
  for (const double a : g.asymptote_angles) angles.push_back(number(a));
  auto bp = nlohmann::json::array();
  for (std::size_t i = 0; i < g.break_points.size(); ++i)
    bp.push_back({{"s", number(g.break_points[i])}, {"gain", number(g.break_gains[i])}});
  return {{"open_poles", poles}, {"open_zeros", zeros}, {"asymptote_center", number(g.asymptote_center)},
          {"asymptote_angles", angles}, {"break_points", bp}};
}

nlohmann::json branches_json(const std::vector<LocusBranch>& branches) {
  auto out = nlohmann::json::array();
  for (const LocusBranch& b : branches) {
    auto gain = nlohmann::json::array(), re = nlohmann::json::array(), im = nlohmann::json::array();
    for (std::size_t i = 0; i < b.points.size(); ++i) {
      gain.push_back(number(b.gains[i]));
      re.push_back(number(b.points[i].real()));
      im.push_back(number(b.points[i].imag()));
    }
    out.push_back({{"branch_id", b.branch_id}, {"gain", gain}, {"re", re}, {"im", im}});
  }
  return out;
}

nlohmann::json frontier_json(const std::vector<FrontierPoint>& frontier) {
  auto out = nlohmann::json::array();
  for (const FrontierPoint& f : frontier)
    out.push_back({{"cos_psi", number(f.cos_psi)}, {"alpha", number(f.alpha)}, {"d_b", number(f.d_b)},
                   {"segment", to_string(f.segment)}});
  return out;
}

nlohmann::json envelope_json(const EnvelopeFit& fit) {
  return {{"rate", number(fit.rate)}, {"amplitude", number(fit.amplitude)}, {"residual", number(fit.residual)},
          {"points", fit.points}, {"window_start", number(fit.window_start)}};
}

std::vector<Eigen::Index> minmax_indices(const StepResponse& r, std::size_t max_points) {
  const Eigen::Index T = r.samples();
  std::vector<Eigen::Index> all(static_cast<std::size_t>(T));
  for (Eigen::Index k = 0; k < T; ++k) all[static_cast<std::size_t>(k)] = k;
  if (static_cast<std::size_t>(T) <= max_points) return all;

  std::vector<Eigen::VectorXd> rows;
  for (Eigen::Index i = 0; i < r.omega.rows(); ++i) rows.push_back(r.omega.row(i).transpose());
  rows.push_back(r.coi);
  for (Eigen::Index i = 0; i < r.p_inv.rows(); ++i) rows.push_back(r.p_inv.row(i).transpose());
  const std::size_t per_bucket = 2 * rows.size();
  const std::size_t buckets = std::max<std::size_t>(1, (max_points - 2) / per_bucket);

  std::set<Eigen::Index> keep{0, T - 1};
  for (std::size_t b = 0; b < buckets; ++b) {
    const auto lo = static_cast<Eigen::Index>(b * static_cast<std::size_t>(T) / buckets);
    const auto hi = static_cast<Eigen::Index>((b + 1) * static_cast<std::size_t>(T) / buckets);
    if (hi <= lo) continue;
    for (const Eigen::VectorXd& row : rows) {
      Eigen::Index amin = 0, amax = 0;
      row.segment(lo, hi - lo).minCoeff(&amin);
      row.segment(lo, hi - lo).maxCoeff(&amax);
      keep.insert(lo + amin);
      keep.insert(lo + amax);
    }
  }
  return {keep.begin(), keep.end()};
}

nlohmann::json response_json(const StepResponse& r, std::optional<std::size_t> max_points) {
  std::vector<Eigen::Index> idx;
  if (max_points) {
    idx = minmax_indices(r, *max_points);
  } else {
    for (Eigen::Index k = 0; k < r.samples(); ++k) idx.push_back(k);
  }
  auto pick = [&](const Eigen::VectorXd& v) {
    auto out = nlohmann::json::array();
    for (const Eigen::Index k : idx) out.push_back(number(v(k)));
    return out;
  };
  auto omega = nlohmann::json::array(), p_inv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.omega.rows(); ++i) omega.push_back(pick(r.omega.row(i).transpose()));
  for (Eigen::Index i = 0; i < r.p_inv.rows(); ++i) p_inv.push_back(pick(r.p_inv.row(i).transpose()));
  return {{"t", pick(r.t)},
          {"omega", omega},
          {"coi", pick(r.coi)},
          {"p_inv", p_inv},
          {"u0", number_array(r.u0)},
          {"warnings", r.warnings},
          {"downsampled", idx.size() < static_cast<std::size_t>(r.samples())}};
}

void write_response_csv(const StepResponse& r, std::ostream& out) {
  const Eigen::Index n = r.omega.rows();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",omega_" << i;
  out << ",coi";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",pinv_" << i;
  out << '\n';
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    out << buf;
  };
  for (Eigen::Index k = 0; k < r.samples(); ++k) {
    put(r.t(k));
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',';
      put(r.omega(i, k));
    }
    out << ',';
    put(r.coi(k));
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',';
      put(r.p_inv(i, k));
    }
    out << '\n';
  }
}

}  // namespace gridshape
