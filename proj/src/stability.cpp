#include "gridshape/stability.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "gridshape/error.hpp"
#include "gridshape/tuning.hpp"

namespace gridshape {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

bool tied(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

ModeBounds mode_bounds(const ScaledSpectrum& spectrum) {
  if (spectrum.size() < 2) invalid("a single bus has no oscillatory modes");
  return {spectrum.fiedler(), spectrum.largest()};
}

StabilityRegion StabilityRegion::from_targets(double alpha, double cos_psi) {
  if (!(alpha > 0.0)) invalid("alpha must be positive");
  if (!(cos_psi > 0.0 && cos_psi <= 1.0)) invalid("cos(psi) must lie in (0, 1]");
  return {alpha, std::acos(cos_psi)};
}

bool StabilityRegion::contains(Complex s) const {
  const double decay = -s.real();
  if (decay < alpha * (1.0 - kRegionRelTol)) return false;
  const double damping = pole_damping(s);
  if (std::isnan(damping)) return false;
  return damping >= std::cos(psi) * (1.0 - kRegionRelTol);
}

double pole_damping(Complex s) {
  const double mag = std::abs(s);
  if (mag < kOriginPoleTol) return std::numeric_limits<double>::quiet_NaN();
  if (s.imag() == 0.0) return s.real() < 0.0 ? 1.0 : -1.0;
  return -s.real() / mag;
}

ModeAnalysis analyze_modes(const ControllerSpec& spec, const RepresentativeParams& p,
                           const ScaledSpectrum& spectrum, Exec exec) {
  return analyze_modes(spec, p, spectrum.lambda, exec);
}

ModeAnalysis analyze_modes(const ControllerSpec& spec, const RepresentativeParams& p,
                           const Eigen::VectorXd& lambda, Exec exec) {
  const auto n = lambda.size();
  if (n < 2) invalid("a single bus has no oscillatory modes");
  ModeAnalysis out;
  out.per_mode.resize(static_cast<std::size_t>(n - 1));
  std::exception_ptr failure;
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par) num_threads(thread_limit())
  for (Eigen::Index k = 1; k < n; ++k) {
    try {
      ModeInfo info;
      info.k = static_cast<int>(k + 1);
      info.lambda = lambda(k);
      info.poles = roots(mode_subsystem(spec, p, lambda(k)).den);
      info.damping = std::numeric_limits<double>::infinity();
      info.decay = std::numeric_limits<double>::infinity();
      for (const Complex& s : info.poles) {
        info.decay = std::min(info.decay, -s.real());
        const double z = pole_damping(s);
        if (!std::isnan(z)) info.damping = std::min(info.damping, z);
      }
      out.per_mode[static_cast<std::size_t>(k - 1)] = std::move(info);
    } catch (...) {
#pragma omp critical(gridshape_modes_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const ModeInfo& m : out.per_mode) {
    if (out.argmin_damping_mode == 0 || tied(m.damping, out.min_damping) || m.damping < out.min_damping) {
      if (out.argmin_damping_mode == 0 || !tied(m.damping, out.min_damping) || m.damping < out.min_damping)
        out.min_damping = m.damping;
      out.argmin_damping_mode = m.k;
    }
    if (out.argmin_decay_mode == 0 || (m.decay < out.min_decay && !tied(m.decay, out.min_decay))) {
      out.min_decay = m.decay;
      out.argmin_decay_mode = m.k;
    } else if (tied(m.decay, out.min_decay)) {
      out.min_decay = std::min(out.min_decay, m.decay);
    }
  }
  return out;
}

RegionCheck check_alpha_psi(const ModeAnalysis& analysis, const StabilityRegion& region) {
  RegionCheck out;
  out.pass = true;
  for (const ModeInfo& m : analysis.per_mode) {
    bool ok = true;
    for (const Complex& s : m.poles) ok = ok && region.contains(s);
    out.per_mode.push_back(ok);
    out.pass = out.pass && ok;
  }
  return out;
}

double fs_min_damping(const RepresentativeParams& p, double d_b, double lambda_n) {
  if (!(lambda_n > 0.0)) invalid("lambda_n must be positive");
  const double root = 2.0 * std::sqrt(lambda_n * p.m);
  if (d_b < root - (p.d + p.d_t)) return (p.d + d_b + p.d_t) / root;
  return 1.0;
}

double fs_min_decay(const RepresentativeParams& p, double d_b, double lambda_2) {
  if (!(lambda_2 > 0.0)) invalid("lambda_2 must be positive");
  const double K = p.d + d_b + p.d_t;
  if (d_b <= 2.0 * std::sqrt(lambda_2 * p.m) - (p.d + p.d_t)) return K / (2.0 * p.m);
  const double disc = std::max(0.0, K * K - 4.0 * lambda_2 * p.m);
  return 2.0 * lambda_2 / (K + std::sqrt(disc));
}

ConvergenceRates fs_convergence_rate(const RepresentativeParams& p, double d_b, double lambda_2) {
  ConvergenceRates out;
  out.coi_rate = (p.d + d_b + p.d_t) / p.m;
  out.system_rate = fs_min_decay(p, d_b, lambda_2);
  return out;
}

ViShape vi_rate_bound(const RepresentativeParams& p, double d_b, double m_v) {
  const double floor_mv = vi_mv_min(p, d_b);
  if (m_v < floor_mv - 1e-9 * std::max(1.0, std::abs(floor_mv)))
    throw Error(ErrorCode::NadirConditionViolated, "virtual inertia below the no-Nadir minimum",
                "m_v = " + std::to_string(m_v) + ", minimum = " + std::to_string(floor_mv));
  return vi_shape(p, d_b, m_v);
}

RateComparison fs_beats_vi(const RepresentativeParams& p, double d_b, double m_v) {
  vi_rate_bound(p, d_b, m_v);
  RateComparison out;
  out.lhs = std::sqrt(p.d + d_b + p.d_t) * std::sqrt((p.m + m_v) * p.tau) / p.m;
  out.margin = out.lhs - 2.0;
  out.fs_faster = out.lhs > 2.0;
  return out;
}

EnvelopeFit fit_envelope(const StepResponse& resp, const Eigen::VectorXd& steady) {
  if (steady.size() != resp.omega.rows()) invalid("steady-state vector does not match the bus count");
  const Eigen::VectorXd dev = (resp.omega.colwise() - steady).colwise().norm().transpose();
  return fit_envelope(resp.t, dev);
}

EnvelopeFit fit_envelope(const Eigen::VectorXd& t, const Eigen::VectorXd& e) {
  const Eigen::Index T = e.size();
  if (t.size() != T || T < 3) invalid("envelope fit needs matching series of at least 3 samples");
  Eigen::Index k_peak = 0;
  const double peak = e.maxCoeff(&k_peak);
  if (!(peak > 0.0)) throw Error(ErrorCode::NotSettled, "deviation is identically zero; no decay to fit");
  if (!(e(T - 1) < 0.01 * peak))
    throw Error(ErrorCode::NotSettled, "response has not settled",
                "final deviation " + std::to_string(e(T - 1)) + " vs peak " + std::to_string(peak));

  const double floor = 1e-10 * peak;
  Eigen::Index k_end = T;
  for (Eigen::Index k = k_peak; k < T; ++k) {
    if (e(k) < floor) {
      k_end = k;
      break;
    }
  }
  std::vector<Eigen::Index> idx{k_peak};
  for (Eigen::Index k = k_peak + 1; k + 1 < k_end; ++k)
    if (e(k) > e(k - 1) && e(k) >= e(k + 1)) idx.push_back(k);
  if (idx.size() < 3) {
    idx.clear();
    for (Eigen::Index k = k_peak; k < k_end; ++k)
      if (e(k) > 0.0) idx.push_back(k);
  }
  if (idx.size() < 2) throw Error(ErrorCode::NotSettled, "too few samples in the decay window");

  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = t(idx[i]);
    y(i) = std::log(e(idx[i]));
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  EnvelopeFit out;
  out.rate = -beta(1);
  out.amplitude = std::exp(beta(0));
  out.residual = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(m));
  out.points = static_cast<std::size_t>(m);
  out.window_start = t(k_peak);
  return out;
}

}  // namespace gridshape
