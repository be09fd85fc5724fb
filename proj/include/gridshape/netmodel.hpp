#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gridshape {

struct Bus {
  int id = 0;
  double m = 0.0;      // inertia (s)
  double d = 0.0;      // damping (pu)
  double d_t = 0.0;    // turbine inverse droop (pu)
  double tau = 0.0;    // turbine time constant (s)
  double v_mag = 1.0;  // voltage magnitude (pu)
  double theta0 = 0.0; // equilibrium angle (rad)
};

struct Line {
  int from = 0;
  int to = 0;
  double b = 0.0;  // susceptance (pu)
};

struct NetworkCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  double f0 = 60.0;
  double s_base = 100.0;
  // Used verbatim in place of the line-built Laplacian (pu, carries Omega_0).
  std::optional<Eigen::MatrixXd> laplacian_override;

  std::size_t size() const { return buses.size(); }
  double omega0() const;
  // Index of the bus with the given id; throws InvalidInput if absent.
  std::size_t index_of(int bus_id) const;
  // Checks every type invariant except graph connectivity.
  void validate() const;
};

NetworkCase case_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkCase& c);
NetworkCase load_case(const std::filesystem::path& path);

// Hex SHA-256 of the canonical JSON form; stable across re-serialization.
std::string case_hash(const NetworkCase& c);

// Network Laplacian L_B with the Omega_0 factor, or the override verbatim.
Eigen::MatrixXd build_laplacian(const NetworkCase& c);

struct RepresentativeParams {
  double m = 0.0;
  double d = 0.0;
  double d_t = 0.0;
  double tau = 0.0;
  Eigen::VectorXd r;
  double r_sum = 0.0;

  void validate() const;
};

// Maps a case to its proportionality parameters r_i.
using ProportionalityConvention = std::function<Eigen::VectorXd(const NetworkCase&)>;

// r_i = m_i / mean(m).
Eigen::VectorXd mean_inertia_convention(const NetworkCase& c);

RepresentativeParams representative_params(
    const NetworkCase& c, const ProportionalityConvention& convention = mean_inertia_convention);

// Uniform parameters for synthetic proportional systems.
RepresentativeParams make_params(double m, double d, double d_t, double tau, Eigen::VectorXd r);

// The case with its bus parameters replaced by r_i-scaled representative ones
// (m_i = r_i m, d_i = r_i d, d_t,i = r_i d_t, tau_i = tau). Network untouched.
NetworkCase proportional_case(const NetworkCase& c, const RepresentativeParams& p);

struct ScaledSpectrum {
  Eigen::VectorXd r;
  Eigen::MatrixXd L_B;
  Eigen::MatrixXd L;
  Eigen::VectorXd lambda;  // non-decreasing
  Eigen::MatrixXd V;       // orthonormal, column k pairs with lambda(k)

  std::size_t size() const { return static_cast<std::size_t>(lambda.size()); }
  double fiedler() const { return lambda(1); }
  double largest() const { return lambda(lambda.size() - 1); }
};

// L = R^{-1/2} L_B R^{-1/2} and its symmetric eigendecomposition. Each
// eigenvector is signed so its largest-magnitude entry is positive.
ScaledSpectrum scaled_spectrum(const Eigen::MatrixXd& L_B, const Eigen::VectorXd& r);

// Relative threshold separating the zero eigenvalue from the rest.
inline constexpr double kZeroEigenRelTol = 1e-8;

}  // namespace gridshape
