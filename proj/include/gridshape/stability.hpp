#pragma once

#include <vector>

#include "gridshape/dynamics.hpp"
#include "gridshape/netmodel.hpp"
#include "gridshape/parallel.hpp"

namespace gridshape {

// The two eigenvalues the closed forms depend on.
struct ModeBounds {
  double lambda_2 = 0.0;
  double lambda_n = 0.0;
};
ModeBounds mode_bounds(const ScaledSpectrum& spectrum);

struct StabilityRegion {
  double alpha = 0.0;  // minimum decay rate (1/s)
  double psi = 0.0;    // half-angle (rad)

  static StabilityRegion from_targets(double alpha, double cos_psi);
  // Re(s) <= -alpha and -Re(s)/|s| >= cos(psi), with relative tolerance kRegionRelTol.
  bool contains(Complex s) const;
};

inline constexpr double kRegionRelTol = 1e-9;
inline constexpr double kOriginPoleTol = 1e-10;

// -Re(s)/|s|; 1 for a negative real pole. NaN for poles at the origin.
double pole_damping(Complex s);

struct ModeInfo {
  int k = 0;  // 1-based mode index
  double lambda = 0.0;
  std::vector<Complex> poles;
  double damping = 0.0;
  double decay = 0.0;
};

struct ModeAnalysis {
  std::vector<ModeInfo> per_mode;  // k = 2..n
  double min_damping = 0.0;
  double min_decay = 0.0;
  int argmin_damping_mode = 0;
  int argmin_decay_mode = 0;
};

// Poles, damping and decay of every oscillatory mode k >= 2. Ties within a
// relative 1e-9 go to the largest k for damping and the smallest k for decay.
ModeAnalysis analyze_modes(const ControllerSpec& spec, const RepresentativeParams& p,
                           const ScaledSpectrum& spectrum, Exec exec = Exec::parallel);
ModeAnalysis analyze_modes(const ControllerSpec& spec, const RepresentativeParams& p,
                           const Eigen::VectorXd& lambda, Exec exec = Exec::parallel);

struct RegionCheck {
  std::vector<bool> per_mode;
  bool pass = false;
};
RegionCheck check_alpha_psi(const ModeAnalysis& analysis, const StabilityRegion& region);

double fs_min_damping(const RepresentativeParams& p, double d_b, double lambda_n);
double fs_min_decay(const RepresentativeParams& p, double d_b, double lambda_2);

struct ConvergenceRates {
  double coi_rate = 0.0;
  double system_rate = 0.0;
};
ConvergenceRates fs_convergence_rate(const RepresentativeParams& p, double d_b, double lambda_2);

// Throws NadirConditionViolated when m_v is below the no-Nadir minimum.
ViShape vi_rate_bound(const RepresentativeParams& p, double d_b, double m_v);

struct RateComparison {
  bool fs_faster = false;
  double lhs = 0.0;
  double margin = 0.0;  // lhs - 2
};
RateComparison fs_beats_vi(const RepresentativeParams& p, double d_b, double m_v);

struct EnvelopeFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // RMS of the log-linear fit residuals
  std::size_t points = 0;
  double window_start = 0.0;
};

// Log-linear least squares on the peaks of ||omega(t) - steady|| from the
// largest deviation onward. Throws NotSettled unless the final deviation is
// below 1% of the peak.
EnvelopeFit fit_envelope(const StepResponse& resp, const Eigen::VectorXd& steady);
EnvelopeFit fit_envelope(const Eigen::VectorXd& t, const Eigen::VectorXd& deviation);

}  // namespace gridshape
