#include <benchmark/benchmark.h>

#include <random>

#include "gridshape/dynamics.hpp"
#include "gridshape/locus.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"
#include "support/random_cases.hpp"

using namespace gridshape;
namespace t = gridshape::testing;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

struct Setup {
  RepresentativeParams p;
  NetworkCase c;
  ScaledSpectrum s;
};

Setup make_setup(int n) {
  std::mt19937_64 rng(7);
  Setup out{t::random_params(rng, n), {}, {}};
  out.c = t::random_proportional_case(rng, out.p);
  out.s = scaled_spectrum(build_laplacian(out.c), out.p.r);
  return out;
}

void BM_analyze_modes(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const int n = static_cast<int>(state.range(0));
  const RepresentativeParams p = t::random_params(rng, n);
  const Eigen::VectorXd lambda = t::random_spectrum(rng, n);
  const ControllerSpec spec{ControllerKind::VI, 20.0, std::max(0.0, vi_mv_min(p, 20.0))};
  for (auto _ : state) benchmark::DoNotOptimize(analyze_modes(spec, p, lambda, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * (n - 1));
}

void BM_modal_step_response(benchmark::State& state) {
  const Setup s = make_setup(static_cast<int>(state.range(0)));
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(s.p.r.size());
  u0(0) = 0.1;
  const ControllerSpec spec{ControllerKind::FS, 20.0, 0.0};
  const SimGrid grid{20.0, 0.01, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(modal_step_response(spec, s.p, s.s, u0, grid, exec_of(state)));
}

void BM_trace_locus(benchmark::State& state) {
  std::mt19937_64 rng(13);
  const RepresentativeParams p = t::random_params(rng, 2);
  const LocusGeometry g = vi_locus_geometry(p, 20.0, std::max(0.0, vi_mv_min(p, 20.0)) + 5.0);
  std::vector<double> grid;
  const int points = static_cast<int>(state.range(0));
  for (int i = 0; i < points; ++i) grid.push_back(1e-3 * std::pow(1e9, double(i) / (points - 1)));
  for (auto _ : state) benchmark::DoNotOptimize(trace_locus(g.loop, grid, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * points);
}

}  // namespace

BENCHMARK(BM_analyze_modes)->ArgsProduct({{64, 1024, 16384}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_modal_step_response)->ArgsProduct({{8, 64}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trace_locus)->ArgsProduct({{1000, 20000}, {0, 1}})->ArgNames({"points", "parallel"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
