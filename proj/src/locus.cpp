#include "gridshape/locus.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <numeric>

#include "gridshape/error.hpp"
#include "gridshape/tuning.hpp"

namespace gridshape {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

std::vector<double> asymptote_angles(int count) {
  std::vector<double> out;
  for (int q = 0; q < count; ++q) out.push_back(180.0 * (2 * q + 1) / count);
  return out;
}

double centroid(const std::vector<Complex>& poles, const std::vector<Complex>& zeros) {
  double sum = 0.0;
  for (const Complex& p : poles) sum += p.real();
  for (const Complex& z : zeros) sum -= z.real();
  return sum / static_cast<double>(poles.size() - zeros.size());
}

}  // namespace

LoopGain loop_gain(const ControllerSpec& spec, const RepresentativeParams& p) {
  const RationalTF z1 = mode_subsystem(spec, p, 0.0);
  return {z1.num, Polynomial::s() * z1.den};
}

void find_break_points(const LoopGain& loop, double min_gain, std::vector<double>& points,
                       std::vector<double>& gains) {
  points.clear();
  gains.clear();
  const Polynomial stationary = loop.num * loop.den.derivative() - loop.den * loop.num.derivative();
  if (stationary.degree() < 1) return;
  for (const Complex& s : roots(stationary)) {
    if (std::abs(s.imag()) > 1e-7 * std::max(1.0, std::abs(s))) continue;
    const double x = s.real();
    const double n = loop.num.eval(x);
    if (n == 0.0) continue;
    const double lambda = -loop.den.eval(x) / n;
    if (lambda > min_gain) {
      points.push_back(x);
      gains.push_back(lambda);
    }
  }
}

LocusGeometry fs_locus_geometry(const RepresentativeParams& p, double d_b) {
  const ControllerSpec spec{ControllerKind::FS, d_b, 0.0};
  spec.validate();
  const double K = p.d + d_b + p.d_t;
  LocusGeometry g;
  g.loop = loop_gain(spec, p);
  g.open_poles = {Complex(-K / p.m, 0.0), Complex(0.0, 0.0)};
  g.asymptote_center = -K / (2.0 * p.m);
  g.asymptote_angles = asymptote_angles(2);
  g.break_points = {g.asymptote_center};
  g.break_gains = {p.m * g.asymptote_center * g.asymptote_center};
  return g;
}

LocusGeometry vi_locus_geometry(const RepresentativeParams& p, double d_b, double m_v) {
  const double floor_mv = vi_mv_min(p, d_b);
  if (m_v < floor_mv - 1e-9 * std::max(1.0, std::abs(floor_mv)))
    throw Error(ErrorCode::NadirConditionViolated, "virtual inertia below the no-Nadir minimum",
                "m_v = " + std::to_string(m_v) + ", minimum = " + std::to_string(floor_mv));
  const ControllerSpec spec{ControllerKind::VI, d_b, m_v};
  spec.validate();
  const ViShape shape = vi_shape(p, d_b, m_v);
  const double wn = shape.omega_n;
  const double xi = shape.xi;

  LocusGeometry g;
  g.loop = loop_gain(spec, p);
  std::vector<Complex> pair;
  if (std::abs(xi - 1.0) <= 1e-9) {
    pair = {Complex(-xi * wn, 0.0), Complex(-xi * wn, 0.0)};
  } else if (xi > 1.0) {
    const double q = -wn * (xi + std::sqrt(xi * xi - 1.0));
    pair = {Complex(q, 0.0), Complex(wn * wn / q, 0.0)};
  } else {
    const double im = wn * std::sqrt(1.0 - xi * xi);
    pair = {Complex(-xi * wn, -im), Complex(-xi * wn, im)};
  }
  g.open_poles = {pair[0], pair[1], Complex(0.0, 0.0)};
  g.open_zeros = {Complex(-1.0 / p.tau, 0.0)};
  g.asymptote_center = 0.5 / p.tau - xi * wn;
  g.asymptote_angles = asymptote_angles(2);
  find_break_points(g.loop, 1e-9 * (p.m + m_v) * wn * wn, g.break_points, g.break_gains);
  return g;
}

LocusGeometry locus_geometry(const ControllerSpec& spec, const RepresentativeParams& p) {
  switch (spec.kind) {
    case ControllerKind::FS: return fs_locus_geometry(p, spec.d_b);
    case ControllerKind::VI: return vi_locus_geometry(p, spec.d_b, spec.m_v);
    case ControllerKind::None: break;
  }
  LocusGeometry g;
  g.loop = loop_gain(spec, p);
  g.open_poles = roots(g.loop.den);
  if (g.loop.num.degree() > 0) g.open_zeros = roots(g.loop.num);
  g.asymptote_center = centroid(g.open_poles, g.open_zeros);
  g.asymptote_angles = asymptote_angles(static_cast<int>(g.open_poles.size() - g.open_zeros.size()));
  find_break_points(g.loop, 1e-9 * std::abs(g.loop.den.scale() / g.loop.num.scale()), g.break_points,
                    g.break_gains);
  return g;
}

double gain_at_point(const LocusGeometry& geometry, Complex s) {
  return std::abs(geometry.loop.den.eval(s)) / std::abs(geometry.loop.num.eval(s));
}

std::vector<double> default_locus_grid(const LocusGeometry& geometry, const ScaledSpectrum& spectrum) {
  if (spectrum.size() < 2) invalid("locus grid needs at least two buses");
  const double lo = spectrum.fiedler() / 100.0;
  const double hi = spectrum.largest() * 100.0;
  const int base = 400;
  const double step = std::log(hi / lo) / (base - 1);
  std::vector<double> grid;
  grid.reserve(base + spectrum.size());
  for (int i = 0; i < base; ++i) grid.push_back(lo * std::exp(step * i));
  for (const double g : geometry.break_gains) {
    const double a = std::max(std::log(0.8 * g), std::log(lo));
    const double b = std::min(std::log(1.2 * g), std::log(hi));
    for (double x = a; x <= b; x += step / 8.0) grid.push_back(std::exp(x));
  }
  for (std::size_t k = 1; k < spectrum.size(); ++k) grid.push_back(spectrum.lambda(static_cast<Eigen::Index>(k)));
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (const double g : grid) {
    if (!out.empty() && g - out.back() <= 1e-14 * g) {
      // keep exact mode gains when a generated point collides with one
      if (std::binary_search(spectrum.lambda.data() + 1, spectrum.lambda.data() + spectrum.lambda.size(), g))
        out.back() = g;
      continue;
    }
    out.push_back(g);
  }
  return out;
}

namespace {

// Permutation of `next` minimizing total distance to `prev`.
std::vector<Complex> match(const std::vector<Complex>& prev, std::vector<Complex> next) {
  const std::size_t n = prev.size();
  if (n <= 6) {
    std::vector<std::size_t> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) cost += std::abs(prev[i] - next[perm[i]]);
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = next[best[i]];
    return out;
  }
  std::vector<Complex> out(n);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && std::abs(prev[i] - next[j]) < best) {
        best = std::abs(prev[i] - next[j]);
        arg = j;
      }
    }
    used[arg] = true;
    out[i] = next[arg];
  }
  return out;
}

}  // namespace

std::vector<LocusBranch> trace_locus(const LoopGain& loop, const std::vector<double>& grid, Exec exec) {
  if (grid.empty()) invalid("locus gain grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) invalid("locus gains must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) invalid("locus gains must be strictly ascending");
  }

  const auto count = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<std::vector<Complex>> solved(grid.size());
  std::exception_ptr failure;
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par) num_threads(thread_limit())
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      solved[i] = roots(loop.characteristic(grid[i]));
    } catch (...) {
#pragma omp critical(gridshape_locus_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> moves;
  moves.reserve(grid.size());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    solved[i] = match(solved[i - 1], solved[i]);
    double size = 0.0, move = 0.0;
    for (std::size_t b = 0; b < solved[i].size(); ++b) {
      size = std::max(size, std::abs(solved[i][b]));
      move = std::max(move, std::abs(solved[i][b] - solved[i - 1][b]));
    }
    moves.push_back(size > 0.0 ? move / size : 0.0);
  }
  if (!moves.empty()) {
    std::vector<double> sorted = moves;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double bound = std::max(kBranchJumpMedianFactor * sorted[sorted.size() / 2], kBranchJumpFloor);
    for (std::size_t i = 0; i < moves.size(); ++i) {
      if (moves[i] > bound)
        throw Error(ErrorCode::BranchJump, "root locus continuation jumped; refine the gain grid",
                    "between gains " + std::to_string(grid[i]) + " and " + std::to_string(grid[i + 1]));
    }
  }

  const std::size_t nb = solved.front().size();
  std::vector<LocusBranch> branches(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    branches[b].branch_id = static_cast<int>(b);
    branches[b].gains = grid;
    branches[b].points.reserve(grid.size());
    for (const auto& pts : solved) branches[b].points.push_back(pts[b]);
  }
  return branches;
}

}  // namespace gridshape
