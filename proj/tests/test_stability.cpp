#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "gridshape/error.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"
#include "support/random_cases.hpp"

using namespace gridshape;
using Catch::Approx;

namespace {

RepresentativeParams rounded() { return make_params(15.37, 4.37, 15.0, 2.19, Eigen::VectorXd::Ones(3)); }

}  // namespace

TEST_CASE("closed-form minimum damping", "[stability]") {
  const RepresentativeParams p = rounded();
  CHECK(fs_min_damping(p, 35.89, 4967.96) == Approx(0.1).margin(1e-3));
  const double sat = 2.0 * std::sqrt(4967.96 * p.m) - p.d - p.d_t;
  CHECK(fs_min_damping(p, sat, 4967.96) == 1.0);
  CHECK(fs_min_damping(p, sat + 10.0, 4967.96) == 1.0);
}

TEST_CASE("closed-form minimum decay", "[stability]") {
  const RepresentativeParams p = rounded();
  CHECK(fs_min_decay(p, 0.0, 1e6) == Approx(19.37 / 30.74).epsilon(1e-12));
  const double lambda_2 = 110.0;
  const double sw = 2.0 * std::sqrt(lambda_2 * p.m) - p.d - p.d_t;
  const double first = (p.d + sw + p.d_t) / (2.0 * p.m);
  const double K = p.d + sw * (1 + 1e-12) + p.d_t;
  const double second = (K - std::sqrt(std::max(0.0, K * K - 4 * lambda_2 * p.m))) / (2 * p.m);
  CHECK(first == Approx(std::sqrt(lambda_2 / p.m)).epsilon(1e-12));
  CHECK(second == Approx(std::sqrt(lambda_2 / p.m)).epsilon(1e-5));
}

TEST_CASE("closed forms equal brute-force minima over the mode polynomials", "[stability]") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = testing::uniform_int(rng, 2, 12);
    const RepresentativeParams p = testing::random_params(rng, n);
    const Eigen::VectorXd lambda = testing::random_spectrum(rng, n);
    const double d_b = testing::uniform(rng, 0.0, 150.0);
    const double K = p.d + d_b + p.d_t;
    const testing::BruteMinima brute = testing::brute_fs_minima(p.m, K, lambda);
    CHECK(testing::rel_err(fs_min_damping(p, d_b, lambda(n - 1)), brute.damping) < 1e-9);
    CHECK(testing::rel_err(fs_min_decay(p, d_b, lambda(1)), brute.decay) < 1e-9);
    const ModeAnalysis a = analyze_modes({ControllerKind::FS, d_b, 0.0}, p, lambda);
    CHECK(testing::rel_err(a.min_damping, brute.damping) < 1e-9);
    CHECK(testing::rel_err(a.min_decay, brute.decay) < 1e-9);
    CHECK(a.argmin_damping_mode == n);
    CHECK(a.argmin_decay_mode == 2);
  }
}

TEST_CASE("damping is linear then saturated, decay is unimodal", "[stability]") {
  const RepresentativeParams p = rounded();
  const double lambda_2 = 110.0, lambda_n = 4967.96;
  const double sat = 2.0 * std::sqrt(lambda_n * p.m) - p.d - p.d_t;
  const double sw = 2.0 * std::sqrt(lambda_2 * p.m) - p.d - p.d_t;
  double prev_damp = 0.0, prev_decay = 0.0;
  for (double d_b = 0.0; d_b < 2.0 * sat; d_b += 0.37) {
    const double z = fs_min_damping(p, d_b, lambda_n);
    const double a = fs_min_decay(p, d_b, lambda_2);
    CHECK(z >= prev_damp);
    if (d_b + 0.37 < sat) CHECK(fs_min_damping(p, d_b + 0.37, lambda_n) - z == Approx(0.37 / (2.0 * std::sqrt(lambda_n * p.m))));
    if (d_b > 0.0) {
      if (d_b <= sw)
        CHECK(a > prev_decay);
      else if (d_b - 0.37 > sw)
        CHECK(a < prev_decay);
    }
    prev_damp = z;
    prev_decay = a;
  }
}

TEST_CASE("stability region membership", "[stability]") {
  const StabilityRegion region = StabilityRegion::from_targets(0.2, std::cos(84.3 * std::numbers::pi / 180.0));
  CHECK(region.contains(Complex(-1.7975, 17.0)));
  CHECK(region.contains(Complex(-1.7975, -17.0)));
  CHECK_FALSE(region.contains(Complex(-0.1, 0.0)));
  CHECK_FALSE(region.contains(Complex(-1.0, 50.0)));
  CHECK_FALSE(region.contains(Complex(0.0, 0.0)));
  std::mt19937_64 rng(61);
  for (int i = 0; i < 200; ++i) {
    const Complex s(testing::uniform(rng, -5.0, 1.0), testing::uniform(rng, -40.0, 40.0));
    CHECK(region.contains(s) == region.contains(std::conj(s)));
  }
  CHECK(pole_damping(Complex(-3.0, 0.0)) == 1.0);
  CHECK(std::isnan(pole_damping(Complex(1e-12, 0.0))));
}

TEST_CASE("reference-like tuned system passes its region", "[stability]") {
  const NetworkCase c = load_case(GRIDSHAPE_DATA_DIR "/wscc9_modified.json");
  const RepresentativeParams p = representative_params(c);
  const ScaledSpectrum s = scaled_spectrum(build_laplacian(c), p.r);
  const ModeAnalysis a = analyze_modes({ControllerKind::FS, 35.89, 0.0}, p, s);
  const StabilityRegion region{0.2, 84.3 * std::numbers::pi / 180.0};
  const RegionCheck check = check_alpha_psi(a, region);
  CHECK(check.pass);
  CHECK(check.per_mode.size() == 2);
  const RegionCheck strict = check_alpha_psi(a, StabilityRegion::from_targets(2.0, 0.1));
  CHECK_FALSE(strict.pass);
}

TEST_CASE("convergence rates", "[stability]") {
  const RepresentativeParams p = rounded();
  const ConvergenceRates r = fs_convergence_rate(p, 35.89, 110.0);
  CHECK(r.coi_rate == Approx(3.595).margin(5e-4));
  CHECK(r.coi_rate == Approx(2.0 * (p.d + 35.89 + p.d_t) / (2.0 * p.m)).epsilon(1e-15));
  std::mt19937_64 rng(67);
  for (int i = 0; i < 200; ++i) {
    const RepresentativeParams q = testing::random_params(rng, 2);
    const ConvergenceRates c = fs_convergence_rate(q, testing::uniform(rng, 0.0, 200.0), testing::uniform(rng, 0.1, 500.0));
    CHECK(c.coi_rate > c.system_rate);
  }

  const RepresentativeParams v = make_params(15.37, 4.37, 15.0, 2.19, Eigen::VectorXd::Ones(3));
  const double mv_min = vi_mv_min(v, 35.89);
  CHECK(mv_min == Approx(264.6).margin(0.05));
  const ViShape shape = vi_rate_bound(v, 35.89, mv_min);
  CHECK(shape.omega_n == Approx(0.3002).margin(2e-4));
  CHECK(vi_rate_bound(v, 35.89, vi_mv_min(v, 35.89)).xi == Approx(1.0).margin(1e-9));
  CHECK_THROWS_AS(vi_rate_bound(v, 35.89, 10.0), Error);

  const RateComparison cmp = fs_beats_vi(v, 35.89, mv_min);
  CHECK(cmp.fs_faster);
  CHECK(cmp.lhs == Approx(11.97).margin(0.02));

  // At the boundary LHS = 2 the COI rate of FS equals omega_n of VI.
  const RepresentativeParams b = make_params(100.0, 1.0, 1.0, 0.05, Eigen::VectorXd::Ones(2));
  const double d_b = 2.0;
  const double K = b.d + d_b + b.d_t;
  const double m_v = 4.0 * b.m * b.m / (K * b.tau) - b.m;
  if (m_v >= vi_mv_min(b, d_b)) {
    CHECK(fs_beats_vi(b, d_b, m_v).lhs == Approx(2.0).epsilon(1e-12));
    CHECK(K / (2.0 * b.m) == Approx(vi_shape(b, d_b, m_v).omega_n).epsilon(1e-12));
  }
  const RepresentativeParams heavy = make_params(500.0, 1.0, 1.0, 0.01, Eigen::VectorXd::Ones(2));
  CHECK_FALSE(fs_beats_vi(heavy, 0.0, std::max(0.0, vi_mv_min(heavy, 0.0))).fs_faster);
}

TEST_CASE("envelope fit", "[stability]") {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(2001, 0.0, 20.0);
  const Eigen::VectorXd e = (-2.0 * t).array().exp();
  const EnvelopeFit fit = fit_envelope(t, e);
  CHECK(fit.rate == Approx(2.0).margin(1e-6));
  CHECK(fit.amplitude == Approx(1.0).epsilon(1e-6));

  const Eigen::VectorXd osc = ((-0.7 * t).array().exp() * (3.0 * t).array().cos().abs()).matrix();
  CHECK(fit_envelope(t, osc).rate == Approx(0.7).epsilon(0.02));

  auto code = [&](const Eigen::VectorXd& series) {
    try {
      fit_envelope(t, series);
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::InvalidInput;
  };
  CHECK(code(Eigen::VectorXd::Zero(t.size())) == ErrorCode::NotSettled);
  CHECK(code(Eigen::VectorXd::Ones(t.size())) == ErrorCode::NotSettled);
}
