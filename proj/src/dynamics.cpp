#include "gridshape/dynamics.hpp"

#include <omp.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>

#include "gridshape/error.hpp"

namespace gridshape {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

}  // namespace

std::vector<Complex> RationalTF::zeros() const {
  if (num.is_zero()) return {};
  return roots(num);
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::None: return "none";
    case ControllerKind::FS: return "fs";
    case ControllerKind::VI: return "vi";
  }
  return "none";
}

ControllerKind controller_kind_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "fs") return ControllerKind::FS;
  if (lower == "vi") return ControllerKind::VI;
  if (lower == "none") return ControllerKind::None;
  invalid("unknown controller kind '" + std::string(text) + "' (expected fs, vi or none)");
}

void ControllerSpec::validate() const {
  if (!std::isfinite(d_b) || d_b < 0.0) invalid("d_b must be finite and non-negative");
  if (!std::isfinite(m_v) || m_v < 0.0) invalid("m_v must be finite and non-negative");
}

RationalTF generator_tf(double m, double d, double d_t, double tau) {
  if (!(m > 0.0 && d > 0.0 && d_t > 0.0 && tau > 0.0)) invalid("generator parameters must be positive");
  return {Polynomial{1.0, tau}, Polynomial{d + d_t, m + d * tau, m * tau}};
}

RationalTF controller_tf(const ControllerSpec& spec, double d_t, double tau) {
  spec.validate();
  switch (spec.kind) {
    case ControllerKind::FS:
      // d_t - (d_b + d_t)(tau s + 1) over (tau s + 1)
      return {Polynomial{-spec.d_b, -(spec.d_b + d_t) * tau}, Polynomial{1.0, tau}};
    case ControllerKind::VI:
      return {Polynomial{-spec.d_b, -spec.m_v}, Polynomial{1.0}};
    case ControllerKind::None:
      break;
  }
  return {Polynomial{0.0}, Polynomial{1.0}};
}

ViShape vi_shape(const RepresentativeParams& p, double d_b, double m_v) {
  const double mt = p.m + m_v;
  ViShape out;
  out.omega_n = std::sqrt((p.d + d_b + p.d_t) / (mt * p.tau));
  out.xi = (1.0 / p.tau + (p.d + d_b) / mt) / (2.0 * out.omega_n);
  return out;
}

RationalTF mode_subsystem(const ControllerSpec& spec, const RepresentativeParams& p, double lambda_k) {
  spec.validate();
  if (!(lambda_k >= 0.0) || !std::isfinite(lambda_k)) invalid("mode gain must be finite and non-negative");
  const double K = p.d + spec.d_b + p.d_t;
  switch (spec.kind) {
    case ControllerKind::FS:
      if (lambda_k == 0.0) return {Polynomial{1.0}, Polynomial{K, p.m}};
      return {Polynomial{0.0, 1.0}, Polynomial{lambda_k, K, p.m}};
    case ControllerKind::VI: {
      const double mt = p.m + spec.m_v;
      const double a0 = K / p.tau;                      // (m + m_v) omega_n^2
      const double a1 = mt / p.tau + p.d + spec.d_b;    // (m + m_v) 2 xi omega_n
      if (lambda_k == 0.0) return {Polynomial{1.0 / p.tau, 1.0}, Polynomial{a0, a1, mt}};
      return {Polynomial{0.0, 1.0 / p.tau, 1.0}, Polynomial{lambda_k / p.tau, a0 + lambda_k, a1, mt}};
    }
    case ControllerKind::None: {
      const RationalTF g = generator_tf(p.m, p.d, p.d_t, p.tau);
      if (lambda_k == 0.0) return g;
      return {Polynomial::s() * g.num, Polynomial::s() * g.den + g.num * lambda_k};
    }
  }
  invalid("unknown controller kind");
}

RationalTF mode_interconnection(const RationalTF& g, const RationalTF& c, double lambda_k) {
  const Polynomial s = Polynomial::s();
  const Polynomial num = s * g.num * c.den;
  const Polynomial den = s * (g.den * c.den - g.num * c.num) + g.num * c.den * lambda_k;
  return {num, den};
}

StateSpace realize(const RationalTF& tf) {
  if (!tf.proper()) invalid("cannot realize an improper transfer function");
  const int n = tf.den.degree();
  const double lead = tf.den.leading();
  StateSpace ss;
  const double d0 = tf.num[n] / lead;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::MatrixXd::Zero(n, 1);
  ss.C = Eigen::MatrixXd::Zero(1, n);
  ss.D = Eigen::MatrixXd::Constant(1, 1, d0);
  if (n == 0) return ss;
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    const double a_i = tf.den[i] / lead;
    ss.A(n - 1, i) = -a_i;
    ss.C(0, i) = tf.num[i] / lead - d0 * a_i;
  }
  ss.B(n - 1, 0) = 1.0;
  return ss;
}

std::vector<BusController> scaled_controllers(const ControllerSpec& spec, const RepresentativeParams& p) {
  spec.validate();
  std::vector<BusController> out;
  out.reserve(static_cast<std::size_t>(p.r.size()));
  for (Eigen::Index i = 0; i < p.r.size(); ++i) {
    const double r = p.r(i);
    out.push_back({spec.kind, r * spec.d_b, r * spec.m_v, r * p.d_t, p.tau});
  }
  return out;
}

ClosedLoop full_system_ss(const NetworkCase& c, const std::vector<BusController>& controllers) {
  const Eigen::MatrixXd L_B = build_laplacian(c);
  const auto n = static_cast<Eigen::Index>(c.size());
  if (static_cast<Eigen::Index>(controllers.size()) != n) invalid("need exactly one controller per bus");

  std::vector<Eigen::Index> filter_index(n, -1);
  Eigen::Index nf = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const BusController& k = controllers[i];
    if (!(k.d_b >= 0.0) || !(k.m_v >= 0.0)) invalid("controller gains must be non-negative");
    if (k.kind == ControllerKind::FS) {
      if (!(k.tau > 0.0) || !(k.d_t >= 0.0)) invalid("FS filter needs tau > 0 and d_t >= 0");
      filter_index[i] = 2 * n + nf++;
    }
  }
  const Eigen::Index angle0 = 2 * n + nf;
  const Eigen::Index nx = angle0 + n - 1;

  ClosedLoop out;
  out.total_inertia.resize(n);
  StateSpace& ss = out.ss;
  ss.A = Eigen::MatrixXd::Zero(nx, nx);
  ss.B = Eigen::MatrixXd::Zero(nx, n);
  ss.C = Eigen::MatrixXd::Zero(2 * n, nx);
  ss.D = Eigen::MatrixXd::Zero(2 * n, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Bus& bus = c.buses[i];
    const BusController& k = controllers[i];
    const double M = bus.m + (k.kind == ControllerKind::VI ? k.m_v : 0.0);
    if (!(M > 0.0) || !std::isfinite(M))
      throw Error(ErrorCode::AlgebraicLoop, "bus " + std::to_string(bus.id) + " has no positive total inertia");
    out.total_inertia(i) = M;

    // M w' = -d w - x_t - p_e + u + p_b (without the -m_v w' part, absorbed in M)
    double damping = bus.d;
    if (k.kind != ControllerKind::None) damping += k.d_b;
    if (k.kind == ControllerKind::FS) damping += k.d_t;
    ss.A(i, i) = -damping / M;
    ss.A(i, n + i) = -1.0 / M;
    if (k.kind == ControllerKind::FS) ss.A(i, filter_index[i]) = k.d_t / M;
    for (Eigen::Index j = 0; j + 1 < n; ++j) ss.A(i, angle0 + j) = -L_B(i, j) / M;
    ss.B(i, i) = 1.0 / M;

    ss.A(n + i, i) = bus.d_t / bus.tau;
    ss.A(n + i, n + i) = -1.0 / bus.tau;

    if (k.kind == ControllerKind::FS) {
      const Eigen::Index f = filter_index[i];
      ss.A(f, i) = 1.0 / k.tau;
      ss.A(f, f) = -1.0 / k.tau;
    }
  }
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    ss.A(angle0 + j, j) = 1.0;
    ss.A(angle0 + j, n - 1) -= 1.0;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const BusController& k = controllers[i];
    ss.C(i, i) = 1.0;
    switch (k.kind) {
      case ControllerKind::FS:
        ss.C(n + i, i) = -(k.d_b + k.d_t);
        ss.C(n + i, filter_index[i]) = k.d_t;
        break;
      case ControllerKind::VI:
        ss.C.row(n + i) = -k.m_v * ss.A.row(i);
        ss.C(n + i, i) -= k.d_b;
        ss.D.row(n + i) = -k.m_v * ss.B.row(i);
        break;
      case ControllerKind::None:
        break;
    }
  }
  return out;
}

Eigen::VectorXd time_grid(const SimGrid& grid) {
  if (!(grid.dt > 0.0) || !std::isfinite(grid.dt)) invalid("dt must be positive");
  if (!(grid.t_end > 0.0) || !std::isfinite(grid.t_end)) invalid("t_end must be positive");
  if (!(grid.onset >= 0.0)) invalid("onset must be non-negative");
  const auto steps = static_cast<Eigen::Index>(std::llround(grid.t_end / grid.dt));
  if (steps < 1) invalid("t_end must be at least one step");
  if (steps > 10'000'000) invalid("time grid too long");
  Eigen::VectorXd t(steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) t(k) = static_cast<double>(k) * grid.dt;
  return t;
}

namespace {

// Exact propagation x -> Phi x + gamma over a step of length h under constant input.
void zoh(const Eigen::MatrixXd& A, const Eigen::VectorXd& Bu, double h, Eigen::MatrixXd& phi, Eigen::VectorXd& gamma) {
  const Eigen::Index nx = A.rows();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nx + 1, nx + 1);
  aug.topLeftCorner(nx, nx) = A * h;
  aug.topRightCorner(nx, 1) = Bu * h;
  const Eigen::MatrixXd e = aug.exp();
  phi = e.topLeftCorner(nx, nx);
  gamma = e.topRightCorner(nx, 1);
}

}  // namespace

Eigen::MatrixXd lti_step(const StateSpace& ss, const Eigen::VectorXd& u0, const SimGrid& grid,
                         std::vector<std::string>* warnings) {
  if (u0.size() != ss.inputs()) invalid("disturbance length does not match the system inputs");
  if (!u0.allFinite()) invalid("disturbance must be finite");
  const Eigen::VectorXd t = time_grid(grid);
  const Eigen::Index T = t.size();
  const Eigen::Index nx = ss.states();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(ss.outputs(), T);

  if (nx > 0 && warnings != nullptr) {
    const Eigen::VectorXcd eig = ss.A.eigenvalues();
    if (eig.real().maxCoeff() >= 0.0) warnings->push_back("state matrix is not Hurwitz; response may not settle");
  }

  const auto first = static_cast<Eigen::Index>(std::ceil(grid.onset / grid.dt - 1e-9));
  if (first >= T) return y;
  const Eigen::VectorXd feed = ss.D * u0;
  if (nx == 0) {
    for (Eigen::Index k = first; k < T; ++k) y.col(k) = feed;
    return y;
  }

  const Eigen::VectorXd Bu = ss.B * u0;
  Eigen::MatrixXd phi;
  Eigen::VectorXd gamma;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
  const double lead_in = t(first) - grid.onset;
  if (lead_in > 0.0) {
    zoh(ss.A, Bu, lead_in, phi, gamma);
    x = gamma;
  }
  zoh(ss.A, Bu, grid.dt, phi, gamma);
  for (Eigen::Index k = first; k < T; ++k) {
    if (k > first) x = phi * x + gamma;
    if (!x.allFinite())
      throw Error(ErrorCode::NonFiniteState, "state became non-finite", "t = " + std::to_string(t(k)));
    y.col(k).noalias() = ss.C * x;
    y.col(k) += feed;
  }
  return y;
}

Eigen::VectorXd center_of_inertia(const Eigen::MatrixXd& omega, const Eigen::VectorXd& inertia) {
  if (inertia.size() != omega.rows()) invalid("inertia vector does not match the bus count");
  return (inertia.transpose() * omega).transpose() / inertia.sum();
}

Eigen::VectorXd steady_state(const ClosedLoop& sys, const Eigen::VectorXd& u0) {
  const Eigen::Index n = sys.total_inertia.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.ss.A);
  if (!lu.isInvertible()) throw Error(ErrorCode::EigensolveFailure, "state matrix is singular; no steady state");
  const Eigen::VectorXd x = -lu.solve(sys.ss.B * u0);
  return (sys.ss.C * x + sys.ss.D * u0).head(n);
}

StepResponse step_response(const ClosedLoop& sys, const Eigen::VectorXd& u0, const SimGrid& grid) {
  StepResponse out;
  const Eigen::Index n = sys.total_inertia.size();
  out.t = time_grid(grid);
  out.u0 = u0;
  const Eigen::MatrixXd y = lti_step(sys.ss, u0, grid, &out.warnings);
  out.omega = y.topRows(n);
  out.p_inv = y.bottomRows(n);
  out.coi = center_of_inertia(out.omega, sys.total_inertia);
  return out;
}

StepResponse modal_step_response(const ControllerSpec& spec, const RepresentativeParams& p,
                                 const ScaledSpectrum& spectrum, const Eigen::VectorXd& u0,
                                 const SimGrid& grid, Exec exec) {
  const auto n = static_cast<Eigen::Index>(spectrum.size());
  if (u0.size() != n || p.r.size() != n) invalid("disturbance and r must match the spectrum size");
  spec.validate();

  StepResponse out;
  out.t = time_grid(grid);
  out.u0 = u0;
  const Eigen::Index T = out.t.size();
  const RationalTF c = controller_tf(spec, p.d_t, p.tau);
  const Eigen::VectorXd sqrt_r = p.r.cwiseSqrt();

  // Mode k drives omega along mu_k and the inverter powers along R mu_k.
  std::vector<Eigen::VectorXd> mu(n), r_mu(n);
  mu[0] = Eigen::VectorXd::Constant(n, u0.sum() / p.r_sum);
  r_mu[0] = p.r.cwiseProduct(mu[0]);
  for (Eigen::Index k = 1; k < n; ++k) {
    const Eigen::VectorXd v = spectrum.V.col(k);
    const double proj = v.dot(u0.cwiseQuotient(sqrt_r));
    mu[k] = v.cwiseQuotient(sqrt_r) * proj;
    r_mu[k] = v.cwiseProduct(sqrt_r) * proj;
  }

  std::vector<Eigen::VectorXd> z_step(n), w_step(n);
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(1);
  const bool par = exec == Exec::parallel;
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (par) num_threads(thread_limit())
  for (Eigen::Index k = 0; k < n; ++k) {
    try {
      const double lambda_k = k == 0 ? 0.0 : spectrum.lambda(k);
      const RationalTF z = mode_subsystem(spec, p, lambda_k);
      z_step[k] = lti_step(realize(z), unit, grid).row(0).transpose();
      if (spec.kind == ControllerKind::None)
        w_step[k] = Eigen::VectorXd::Zero(T);
      else
        w_step[k] = lti_step(realize(c * z), unit, grid).row(0).transpose();
    } catch (...) {
#pragma omp critical(gridshape_modal_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  out.omega = Eigen::MatrixXd::Zero(n, T);
  out.p_inv = Eigen::MatrixXd::Zero(n, T);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.omega.noalias() += mu[k] * z_step[k].transpose();
    out.p_inv.noalias() += r_mu[k] * w_step[k].transpose();
  }
  out.coi = center_of_inertia(out.omega, p.r);
  return out;
}

}  // namespace gridshape
