#include "gridshape/netmodel.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include "gridshape/error.hpp"

namespace gridshape {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Connectivity of the graph given by the nonzero off-diagonal pattern.
bool connected(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::queue<Eigen::Index> q;
  q.push(0);
  seen[0] = true;
  Eigen::Index count = 1;
  while (!q.empty()) {
    const Eigen::Index i = q.front();
    q.pop();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && !seen[j] && w(i, j) != 0.0) {
        seen[j] = true;
        ++count;
        q.push(j);
      }
    }
  }
  return count == n;
}

void check_laplacian(const Eigen::MatrixXd& L, const char* what) {
  if (L.rows() != L.cols()) invalid(std::string(what) + " is not square");
  const double scale = std::max(L.cwiseAbs().maxCoeff(), 1e-300);
  if (!L.allFinite()) invalid(std::string(what) + " has non-finite entries");
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    invalid(std::string(what) + " is not symmetric");
  if (L.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9 * scale)
    invalid(std::string(what) + " rows do not sum to zero");
}

}  // namespace

double NetworkCase::omega0() const { return 2.0 * std::numbers::pi * f0; }

std::size_t NetworkCase::index_of(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return i;
  invalid("unknown bus id " + std::to_string(bus_id));
}

void NetworkCase::validate() const {
  if (buses.empty()) invalid("case has no buses");
  if (!positive_finite(f0)) invalid("f0 must be positive");
  if (!positive_finite(s_base)) invalid("s_base must be positive");
  std::set<int> ids;
  for (const Bus& b : buses) {
    if (!ids.insert(b.id).second) invalid("duplicate bus id " + std::to_string(b.id));
    if (!positive_finite(b.m) || !positive_finite(b.d) || !positive_finite(b.d_t) ||
        !positive_finite(b.tau) || !positive_finite(b.v_mag))
      invalid("bus " + std::to_string(b.id) + ": m, d, d_t, tau and v_mag must be positive");
    if (!std::isfinite(b.theta0)) invalid("bus " + std::to_string(b.id) + ": theta0 not finite");
  }
  std::set<std::pair<int, int>> pairs;
  for (const Line& l : lines) {
    if (l.from == l.to) invalid("line " + std::to_string(l.from) + "-" + std::to_string(l.to) + " is a self-loop");
    if (!ids.contains(l.from) || !ids.contains(l.to))
      invalid("line " + std::to_string(l.from) + "-" + std::to_string(l.to) + " references an unknown bus");
    if (!positive_finite(l.b))
      invalid("line " + std::to_string(l.from) + "-" + std::to_string(l.to) + " needs positive susceptance");
    auto key = std::minmax(l.from, l.to);
    if (!pairs.insert({key.first, key.second}).second)
      invalid("duplicate line " + std::to_string(key.first) + "-" + std::to_string(key.second));
  }
  if (laplacian_override) {
    if (laplacian_override->rows() != static_cast<Eigen::Index>(buses.size()))
      invalid("laplacian_override dimension does not match the bus count");
    check_laplacian(*laplacian_override, "laplacian_override");
  }
}

NetworkCase case_from_json(const nlohmann::json& j) {
  NetworkCase c;
  try {
    c.name = j.value("name", std::string{});
    c.f0 = j.value("f0", 60.0);
    c.s_base = j.value("s_base", 100.0);
    for (const auto& jb : j.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.m = jb.at("m").get<double>();
      b.d = jb.at("d").get<double>();
      b.d_t = jb.at("d_t").get<double>();
      b.tau = jb.at("tau").get<double>();
      b.v_mag = jb.value("v_mag", 1.0);
      b.theta0 = jb.value("theta0", 0.0);
      c.buses.push_back(b);
    }
    if (j.contains("lines")) {
      for (const auto& jl : j.at("lines"))
        c.lines.push_back({jl.at("from").get<int>(), jl.at("to").get<int>(), jl.at("b").get<double>()});
    }
    if (j.contains("laplacian_override") && !j.at("laplacian_override").is_null()) {
      const auto& rows = j.at("laplacian_override");
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd L(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n) invalid("laplacian_override is not square");
        for (Eigen::Index k = 0; k < n; ++k) L(i, k) = rows[i][k].get<double>();
      }
      c.laplacian_override = std::move(L);
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed case JSON: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const NetworkCase& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["f0"] = c.f0;
  j["s_base"] = c.s_base;
  j["buses"] = nlohmann::json::array();
  for (const Bus& b : c.buses)
    j["buses"].push_back({{"id", b.id}, {"m", b.m}, {"d", b.d}, {"d_t", b.d_t}, {"tau", b.tau},
                          {"v_mag", b.v_mag}, {"theta0", b.theta0}});
  j["lines"] = nlohmann::json::array();
  for (const Line& l : c.lines) j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"b", l.b}});
  if (c.laplacian_override) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.laplacian_override->rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < c.laplacian_override->cols(); ++k) row.push_back((*c.laplacian_override)(i, k));
      rows.push_back(std::move(row));
    }
    j["laplacian_override"] = std::move(rows);
  }
  return j;
}

NetworkCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open case file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    invalid("case file " + path.string() + " is not valid JSON: " + e.what());
  }
  return case_from_json(j);
}

std::string case_hash(const NetworkCase& c) {
  const std::string text = to_json(c).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

Eigen::MatrixXd build_laplacian(const NetworkCase& c) {
  c.validate();
  if (c.laplacian_override) {
    if (!connected(*c.laplacian_override))
      throw Error(ErrorCode::DisconnectedGraph, "laplacian_override describes a disconnected network");
    return *c.laplacian_override;
  }
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  const double w0 = c.omega0();
  for (const Line& l : c.lines) {
    const auto i = static_cast<Eigen::Index>(c.index_of(l.from));
    const auto k = static_cast<Eigen::Index>(c.index_of(l.to));
    const Bus& bi = c.buses[i];
    const Bus& bk = c.buses[k];
    const double w = w0 * bi.v_mag * bk.v_mag * l.b * std::cos(bi.theta0 - bk.theta0);
    if (!(w > 0.0))
      throw Error(ErrorCode::NonPositiveWeight,
                  "line " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                      " has a non-positive linearized weight (angle difference >= 90 deg)");
    L(i, k) = -w;
    L(k, i) = -w;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i) sum += L(i, k);
    L(i, i) = -sum;
  }
  if (!connected(L)) throw Error(ErrorCode::DisconnectedGraph, "line graph is not connected");
  return L;
}

void RepresentativeParams::validate() const {
  if (!positive_finite(m) || !positive_finite(d) || !positive_finite(d_t) || !positive_finite(tau))
    invalid("representative m, d, d_t and tau must be positive");
  if (r.size() == 0) invalid("proportionality vector is empty");
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!positive_finite(r(i))) invalid("proportionality parameters must be positive");
}

Eigen::VectorXd mean_inertia_convention(const NetworkCase& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::VectorXd m(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = c.buses[i].m;
  return m / m.mean();
}

RepresentativeParams representative_params(const NetworkCase& c, const ProportionalityConvention& convention) {
  c.validate();
  RepresentativeParams p;
  p.r = convention(c);
  if (p.r.size() != static_cast<Eigen::Index>(c.size())) invalid("convention returned the wrong number of r_i");
  p.r_sum = p.r.sum();
  double m_sum = 0.0, d_sum = 0.0, dt_sum = 0.0, tau_sum = 0.0;
  for (const Bus& b : c.buses) {
    m_sum += b.m;
    d_sum += b.d;
    dt_sum += b.d_t;
    tau_sum += b.tau;
  }
  const double n = static_cast<double>(c.size());
  p.m = m_sum / n;
  p.d = d_sum / p.r_sum;
  p.d_t = dt_sum / p.r_sum;
  p.tau = tau_sum / n;
  p.validate();
  return p;
}

RepresentativeParams make_params(double m, double d, double d_t, double tau, Eigen::VectorXd r) {
  RepresentativeParams p{m, d, d_t, tau, std::move(r), 0.0};
  p.r_sum = p.r.sum();
  p.validate();
  return p;
}

NetworkCase proportional_case(const NetworkCase& c, const RepresentativeParams& p) {
  if (p.r.size() != static_cast<Eigen::Index>(c.size())) invalid("r does not match the bus count");
  NetworkCase out = c;
  for (std::size_t i = 0; i < out.buses.size(); ++i) {
    const double ri = p.r(static_cast<Eigen::Index>(i));
    out.buses[i].m = ri * p.m;
    out.buses[i].d = ri * p.d;
    out.buses[i].d_t = ri * p.d_t;
    out.buses[i].tau = p.tau;
  }
  return out;
}

ScaledSpectrum scaled_spectrum(const Eigen::MatrixXd& L_B, const Eigen::VectorXd& r) {
  check_laplacian(L_B, "network Laplacian");
  if (r.size() != L_B.rows()) invalid("r does not match the Laplacian dimension");
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!positive_finite(r(i))) invalid("proportionality parameters must be positive");

  ScaledSpectrum out;
  out.r = r;
  out.L_B = L_B;
  const Eigen::VectorXd inv_sqrt = r.cwiseSqrt().cwiseInverse();
  out.L = inv_sqrt.asDiagonal() * L_B * inv_sqrt.asDiagonal();
  out.L = 0.5 * (out.L + out.L.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.L);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::EigensolveFailure, "scaled Laplacian eigensolve did not converge");
  out.lambda = solver.eigenvalues();
  out.V = solver.eigenvectors();

  for (Eigen::Index k = 0; k < out.V.cols(); ++k) {
    Eigen::Index arg = 0;
    out.V.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.V(arg, k) < 0.0) out.V.col(k) *= -1.0;
  }

  const auto n = out.lambda.size();
  if (n > 1) {
    const double top = out.lambda(n - 1);
    if (!(top > 0.0) || out.lambda(1) <= kZeroEigenRelTol * top)
      throw Error(ErrorCode::DisconnectedGraph, "scaled Laplacian has more than one zero eigenvalue");
    if (std::abs(out.lambda(0)) > kZeroEigenRelTol * top)
      invalid("network Laplacian has no zero eigenvalue");
  }
  return out;
}

}  // namespace gridshape
