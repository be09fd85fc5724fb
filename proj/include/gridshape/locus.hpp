#pragma once

#include <vector>

#include "gridshape/dynamics.hpp"
#include "gridshape/netmodel.hpp"
#include "gridshape/parallel.hpp"
#include "gridshape/polynomial.hpp"

namespace gridshape {

// Loop gain N(s)/D(s) = z_1(s)/s with variable gain lambda; closed-loop
// characteristic polynomial D(s) + lambda N(s).
struct LoopGain {
  Polynomial num;
  Polynomial den;

  Polynomial characteristic(double lambda) const { return den + num * lambda; }
};

LoopGain loop_gain(const ControllerSpec& spec, const RepresentativeParams& p);

struct LocusGeometry {
  LoopGain loop;
  std::vector<Complex> open_poles;
  std::vector<Complex> open_zeros;
  double asymptote_center = 0.0;
  std::vector<double> asymptote_angles;  // degrees
  std::vector<double> break_points;
  std::vector<double> break_gains;
};

LocusGeometry fs_locus_geometry(const RepresentativeParams& p, double d_b);

// Throws NadirConditionViolated when m_v is below the no-Nadir minimum.
LocusGeometry vi_locus_geometry(const RepresentativeParams& p, double d_b, double m_v);

LocusGeometry locus_geometry(const ControllerSpec& spec, const RepresentativeParams& p);

// Real points where d lambda / ds = 0 and lambda = -D/N is positive.
void find_break_points(const LoopGain& loop, double min_gain, std::vector<double>& points,
                       std::vector<double>& gains);

// |D(s)| / |N(s)|, the gain that places a closed-loop pole at s.
double gain_at_point(const LocusGeometry& geometry, Complex s);

struct LocusBranch {
  int branch_id = 0;
  std::vector<double> gains;
  std::vector<Complex> points;
};

// 400 log-spaced gains over [lambda_2/100, 100 lambda_n], refined 8x within
// +-20% of each break gain, with the mode gains lambda_2..lambda_n merged in.
std::vector<double> default_locus_grid(const LocusGeometry& geometry, const ScaledSpectrum& spectrum);

// Closed-loop roots for every gain, continued into branches by optimal
// matching. Throws BranchJump when a step moves a root by more than
// max(5 x median step, 0.5) relative to the root magnitude.
std::vector<LocusBranch> trace_locus(const LoopGain& loop, const std::vector<double>& grid,
                                     Exec exec = Exec::parallel);

inline constexpr double kBranchJumpMedianFactor = 5.0;
inline constexpr double kBranchJumpFloor = 0.5;

}  // namespace gridshape
