#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gridshape/dynamics.hpp"
#include "gridshape/locus.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"
#include "support/random_cases.hpp"

using namespace gridshape;

// The OpenMP paths must reproduce the serial reference bit for bit: each
// iteration writes its own slot and no reduction reorders floating point sums.

TEST_CASE("mode analysis: serial equals parallel", "[parallel]") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = testing::uniform_int(rng, 2, 200);
    const RepresentativeParams p = testing::random_params(rng, n);
    const Eigen::VectorXd lambda = testing::random_spectrum(rng, n);
    const double d_b = testing::uniform(rng, 0.0, 80.0);
    const ControllerSpec spec = trial % 2 ? ControllerSpec{ControllerKind::FS, d_b, 0.0}
                                          : ControllerSpec{ControllerKind::VI, d_b, std::max(0.0, vi_mv_min(p, d_b))};
    const ModeAnalysis a = analyze_modes(spec, p, lambda, Exec::serial);
    const ModeAnalysis b = analyze_modes(spec, p, lambda, Exec::parallel);
    CHECK(a.min_damping == b.min_damping);
    CHECK(a.min_decay == b.min_decay);
    CHECK(a.argmin_damping_mode == b.argmin_damping_mode);
    CHECK(a.argmin_decay_mode == b.argmin_decay_mode);
    REQUIRE(a.per_mode.size() == b.per_mode.size());
    for (std::size_t i = 0; i < a.per_mode.size(); ++i) CHECK(a.per_mode[i].poles == b.per_mode[i].poles);
  }
}

TEST_CASE("modal response: serial equals parallel", "[parallel]") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = testing::uniform_int(rng, 2, 30);
    const RepresentativeParams p = testing::random_params(rng, n);
    const NetworkCase c = testing::random_proportional_case(rng, p);
    const ScaledSpectrum s = scaled_spectrum(build_laplacian(c), p.r);
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
    u0(testing::uniform_int(rng, 0, n - 1)) = 0.1;
    const ControllerSpec spec{ControllerKind::FS, testing::uniform(rng, 0.0, 50.0), 0.0};
    const SimGrid grid{10.0, 0.01, 0.0};
    const StepResponse a = modal_step_response(spec, p, s, u0, grid, Exec::serial);
    const StepResponse b = modal_step_response(spec, p, s, u0, grid, Exec::parallel);
    CHECK(a.omega == b.omega);
    CHECK(a.p_inv == b.p_inv);
    CHECK(a.coi == b.coi);
  }
}

TEST_CASE("locus tracing: serial equals parallel", "[parallel]") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    const RepresentativeParams p = testing::random_params(rng, 2);
    const double d_b = testing::uniform(rng, 0.0, 50.0);
    const LocusGeometry g = vi_locus_geometry(p, d_b, std::max(0.0, vi_mv_min(p, d_b)) + 5.0);
    std::vector<double> grid;
    for (int i = 0; i < 2000; ++i) grid.push_back(1e-3 * std::pow(1e9, i / 1999.0));
    const auto a = trace_locus(g.loop, grid, Exec::serial);
    const auto b = trace_locus(g.loop, grid, Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].points == b[k].points);
  }
}
