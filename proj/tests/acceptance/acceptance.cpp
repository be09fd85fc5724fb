#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gridshape/dynamics.hpp"
#include "gridshape/locus.hpp"
#include "gridshape/netmodel.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"
#include "support/random_cases.hpp"

using namespace gridshape;
namespace t = gridshape::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string id;
  double budget_ms;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const ModeBounds kReferenceBounds{110.162743838, 4967.96};

RepresentativeParams rounded() { return make_params(15.37, 4.37, 15.0, 2.19, Eigen::VectorXd::Ones(3)); }

// Loaded once, outside the timed criteria.
const NetworkCase& reference_case() {
  static const NetworkCase c = load_case(GRIDSHAPE_DATA_DIR "/wscc9_modified.json");
  return c;
}

Eigen::VectorXd reference_step() {
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(3);
  u0(0) = 0.1;
  return u0;
}

Verdict p1() {
  const TuningTargets targets{0.1, 0.2, 0.2, 0.2 / 60.0};
  const TuningResult r = tune_db(rounded(), kReferenceBounds, targets, 0.0);
  Verdict v;
  v.pass = std::abs(r.d_b_osc_damping_term - 35.89) <= 0.01 && std::abs(r.d_b_osc_decay_term + 13.22) <= 0.01 &&
           std::abs(r.d_b_osc - 35.89) <= 0.01 && std::abs(r.d_b - 35.89) <= 0.01;
  v.detail = fmt("components (%.4f, %.4f), d_b = %.4f", r.d_b_osc_damping_term, r.d_b_osc_decay_term, r.d_b);
  return v;
}

Verdict p2() {
  const double exact = vi_mv_min(representative_params(reference_case()), 35.89);
  const double printed = vi_mv_min(rounded(), 35.89);
  return {std::abs(exact - 264.16) <= 0.05 && std::abs(printed - 264.6) <= 0.5,
          fmt("m_v_min = %.4f (unrounded), %.4f (rounded)", exact, printed)};
}

Verdict p3() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int wrong_modes = 0;
  const int draws = 250;
  for (int i = 0; i < draws; ++i) {
    const int n = t::uniform_int(rng, 2, 12);
    const RepresentativeParams p = t::random_params(rng, n);
    const Eigen::VectorXd lambda = t::random_spectrum(rng, n);
    const double d_b = t::uniform(rng, 0.0, 150.0);
    const t::BruteMinima brute = t::brute_fs_minima(p.m, p.d + d_b + p.d_t, lambda);
    worst = std::max({worst, t::rel_err(fs_min_damping(p, d_b, lambda(n - 1)), brute.damping),
                      t::rel_err(fs_min_decay(p, d_b, lambda(1)), brute.decay)});
    if (brute.damping_mode != n || brute.decay_mode != 2) ++wrong_modes;
  }
  return {worst < 1e-9 && wrong_modes == 0,
          fmt("%g draws, worst rel err %.2e, argmin mismatches %g", draws, worst, wrong_modes)};
}

Verdict p4() {
  std::mt19937_64 rng(1002);
  int mismatches = 0, compared = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = t::uniform_int(rng, 3, 10);
    const RepresentativeParams p = t::random_params(rng, n);
    const ScaledSpectrum s = scaled_spectrum(build_laplacian(t::random_proportional_case(rng, p)), p.r);
    const double d_b = t::uniform(rng, 0.0, 60.0);
    for (const ControllerSpec& spec :
         {ControllerSpec{ControllerKind::FS, d_b, 0.0},
          ControllerSpec{ControllerKind::VI, d_b, std::max(0.0, vi_mv_min(p, d_b))}}) {
      const LocusGeometry g = locus_geometry(spec, p);
      const std::vector<double> grid = default_locus_grid(g, s);
      const auto branches = trace_locus(g.loop, grid);
      for (Eigen::Index k = 1; k < s.lambda.size(); ++k) {
        const auto at = std::lower_bound(grid.begin(), grid.end(), s.lambda(k));
        const std::size_t idx = static_cast<std::size_t>(at - grid.begin());
        std::vector<Complex> traced;
        for (const auto& b : branches) traced.push_back(b.points[idx]);
        ++compared;
        if (!t::multiset_match(traced, mode_subsystem(spec, p, s.lambda(k)).poles(), 1e-7)) ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%g mode pole sets compared, %g mismatches", compared, mismatches)};
}

Verdict p5() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  const SimGrid grid{20.0, 0.01, 0.0};
  for (int i = 0; i < 100; ++i) {
    const int n = t::uniform_int(rng, 2, 8);
    const RepresentativeParams p = t::random_params(rng, n);
    const NetworkCase c = t::random_proportional_case(rng, p);
    const ScaledSpectrum s = scaled_spectrum(build_laplacian(c), p.r);
    const double d_b = t::uniform(rng, 0.0, 60.0);
    ControllerSpec spec{ControllerKind::FS, d_b, 0.0};
    if (i % 3 == 1) spec = {ControllerKind::VI, d_b, std::max(0.0, vi_mv_min(p, d_b)) + t::uniform(rng, 0.0, 20.0)};
    if (i % 3 == 2) spec = {ControllerKind::None, 0.0, 0.0};
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
    for (int b = 0; b < n; ++b) u0(b) = t::uniform(rng, -0.2, 0.2);
    const StepResponse modal = modal_step_response(spec, p, s, u0, grid);
    const StepResponse direct = step_response(full_system_ss(c, scaled_controllers(spec, p)), u0, grid);
    worst = std::max(worst, (modal.omega - direct.omega).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-6, fmt("worst |omega_modal - omega_direct| = %.2e pu", worst)};
}

Verdict p6() {
  const NetworkCase c = reference_case();
  const RepresentativeParams p = representative_params(c);
  const ScaledSpectrum s = scaled_spectrum(build_laplacian(c), p.r);
  const TuningResult tuned = tune_db(p, mode_bounds(s), {0.1, 0.2, 0.2, 0.2 / 60.0}, 0.0);
  const ClosedLoop sys = full_system_ss(proportional_case(c, p), scaled_controllers({ControllerKind::FS, tuned.d_b, 0.0}, p));
  const Eigen::VectorXd u0 = reference_step();
  const StepResponse r = step_response(sys, u0, {40.0, 0.01, 0.0});

  const double K = p.d + tuned.d_b + p.d_t;
  const double final_coi = u0.sum() / (p.r_sum * K);
  double coi_err = 0.0;
  bool monotone = true;
  for (Eigen::Index i = 0; i < r.samples(); ++i) {
    coi_err = std::max(coi_err, std::abs(r.coi(i) - final_coi * (1.0 - std::exp(-K * r.t(i) / p.m))));
    if (i > 0 && r.coi(i) < r.coi(i - 1) - 1e-15) monotone = false;
  }
  const double floor = fs_min_decay(p, tuned.d_b, s.fiedler());
  const EnvelopeFit fit = fit_envelope(r, steady_state(sys, u0));
  const double ratio = fit.rate / floor;
  return {coi_err < 1e-8 && monotone && ratio >= 0.95 && ratio <= 1.3,
          fmt("COI err %.2e pu, envelope rate / closed-form decay = %.4f, monotone = %g", coi_err, ratio, monotone)};
}

Verdict p7() {
  const NetworkCase c = reference_case();
  const RepresentativeParams p = representative_params(c);
  const double d_b = 35.89;
  const double m_v = vi_mv_min(p, d_b);
  const NetworkCase prop = proportional_case(c, p);
  const Eigen::VectorXd u0 = reference_step();
  const SimGrid grid{60.0, 0.01, 0.0};
  const ClosedLoop fs = full_system_ss(prop, scaled_controllers({ControllerKind::FS, d_b, 0.0}, p));
  const ClosedLoop vi = full_system_ss(prop, scaled_controllers({ControllerKind::VI, d_b, m_v}, p));
  const double fs_rate = fit_envelope(step_response(fs, u0, grid), steady_state(fs, u0)).rate;
  const double vi_rate = fit_envelope(step_response(vi, u0, grid), steady_state(vi, u0)).rate;
  const double omega_n = vi_shape(p, d_b, m_v).omega_n;
  const double lhs = fs_beats_vi(p, d_b, m_v).lhs;
  Verdict v{vi_rate <= 1.05 * omega_n && fs_rate > vi_rate && lhs > 2.0, {}};
  v.detail = fmt("VI rate %.4f vs omega_n %.4f, FS rate %.4f", vi_rate, omega_n, fs_rate) + fmt(", LHS %.3f", lhs);
  return v;
}

Verdict p8() {
  std::vector<std::pair<RepresentativeParams, ModeBounds>> setups{{rounded(), kReferenceBounds}};
  std::mt19937_64 rng(1008);
  for (int i = 0; i < 20; ++i) {
    const double l2 = t::uniform(rng, 5.0, 300.0);
    setups.push_back({t::random_params(rng, 3), {l2, l2 * t::uniform(rng, 1.5, 80.0)}});
  }
  double roundtrip = 0.0, top_err = 0.0, knee_gap = 0.0;
  for (const auto& [p, b] : setups) {
    const auto frontier = achievable_frontier(p, b, 256);
    double top = 0.0;
    for (const FrontierPoint& f : frontier) {
      roundtrip = std::max({roundtrip, t::rel_err(fs_min_damping(p, f.d_b, b.lambda_n), f.cos_psi),
                            t::rel_err(fs_min_decay(p, f.d_b, b.lambda_2), f.alpha)});
      top = std::max(top, f.alpha);
    }
    const double alpha_max = std::sqrt(b.lambda_2 / p.m);
    top_err = std::max(top_err, t::rel_err(top, alpha_max));
    const double sw = 2.0 * std::sqrt(b.lambda_2 * p.m) - p.d - p.d_t;
    if (sw > 0.0) {
      const double knee = std::sqrt(b.lambda_2 / b.lambda_n);
      const double eps = 1e-10 * sw;
      knee_gap = std::max({knee_gap, std::abs(fs_min_damping(p, sw, b.lambda_n) - knee),
                           std::abs(fs_min_decay(p, sw - eps, b.lambda_2) - fs_min_decay(p, sw + eps, b.lambda_2)) / alpha_max});
    }
  }
  return {roundtrip < 1e-9 && top_err < 1e-9 && knee_gap < 1e-4,
          fmt("round trip %.2e, max decay err %.2e, knee gap %.2e", roundtrip, top_err, knee_gap)};
}

Verdict p9() {
  std::mt19937_64 rng(1009);
  int feasible = 0, failures = 0;
  while (feasible < 50) {
    const int n = t::uniform_int(rng, 3, 10);
    const RepresentativeParams p = t::random_params(rng, n);
    const ScaledSpectrum s = scaled_spectrum(build_laplacian(t::random_proportional_case(rng, p)), p.r);
    const ModeBounds b = mode_bounds(s);
    const double alpha_max = std::sqrt(b.lambda_2 / p.m);
    const TuningTargets targets{t::uniform(rng, 0.02, 0.9), t::uniform(rng, 0.01, 0.95) * alpha_max,
                                t::uniform(rng, 0.0, 0.5), t::uniform(rng, 0.002, 0.02)};
    const TuningResult r = classify(p, b, targets);
    if (r.regime == Regime::Infeasible) continue;
    ++feasible;
    const ModeAnalysis a = analyze_modes({ControllerKind::FS, r.d_b, 0.0}, p, s);
    if (!check_alpha_psi(a, StabilityRegion::from_targets(targets.alpha_d, targets.cos_psi_d)).pass) ++failures;
  }
  return {failures == 0, fmt("%g feasible target sets, %g region failures", feasible, failures)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"P1", 1.0, p1},    {"P2", 1.0, p2},    {"P3", 1000.0, p3}, {"P4", 2000.0, p4}, {"P5", 30000.0, p5},
      {"P6", 5000.0, p6}, {"P7", 5000.0, p7}, {"P8", 1000.0, p8}, {"P9", 5000.0, p9},
  };
  reference_case();
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = ms < c.budget_ms;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %s  %s  [%.3f ms, budget %.0f ms%s]\n", c.id.c_str(), pass ? "PASS" : "FAIL", v.detail.c_str(), ms,
                c.budget_ms, in_time ? "" : ", over budget");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
