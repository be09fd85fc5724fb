#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gridshape/netmodel.hpp"
#include "gridshape/parallel.hpp"
#include "gridshape/polynomial.hpp"

namespace gridshape {

// Ratio of real polynomials in s.
struct RationalTF {
  Polynomial num;
  Polynomial den;

  Complex eval(Complex s) const { return num.eval(s) / den.eval(s); }
  double dc_gain() const { return num[0] / den[0]; }
  std::vector<Complex> poles() const { return roots(den); }
  std::vector<Complex> zeros() const;
  bool proper() const { return num.degree() <= den.degree(); }
  RationalTF operator*(const RationalTF& rhs) const { return {num * rhs.num, den * rhs.den}; }
};

enum class ControllerKind { None, FS, VI };

std::string_view to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(std::string_view text);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::None;
  double d_b = 0.0;  // inverter inverse droop (pu)
  double m_v = 0.0;  // virtual inertia (s), VI only

  void validate() const;
};

// (tau s + 1) / (m tau s^2 + (m + d tau) s + d + d_t)
RationalTF generator_tf(double m, double d, double d_t, double tau);

// FS: d_t/(tau s + 1) - (d_b + d_t); VI: -(m_v s + d_b); None: 0. The VI
// numerator is improper and is only ever used inside a closed loop.
RationalTF controller_tf(const ControllerSpec& spec, double d_t, double tau);

// Natural frequency and damping of the VI closed-loop COI dynamics.
struct ViShape {
  double omega_n = 0.0;
  double xi = 0.0;
};
ViShape vi_shape(const RepresentativeParams& p, double d_b, double m_v);

// Scalar subsystem of mode lambda_k. At lambda_k = 0 the common factor s is
// cancelled so the COI subsystem is returned in reduced form.
RationalTF mode_subsystem(const ControllerSpec& spec, const RepresentativeParams& p, double lambda_k);

// Closed-form-free construction s g / (s (1 - g c) + lambda g) from the
// generator and controller transfer functions, without any cancellation.
RationalTF mode_interconnection(const RationalTF& g, const RationalTF& c, double lambda_k);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  Eigen::Index outputs() const { return C.rows(); }
};

// Controllable canonical realization of a proper SISO transfer function.
StateSpace realize(const RationalTF& tf);

// One inverter's controller in physical units.
struct BusController {
  ControllerKind kind = ControllerKind::None;
  double d_b = 0.0;
  double m_v = 0.0;
  double d_t = 0.0;  // FS filter gain
  double tau = 0.0;  // FS filter time constant
};

// Per-bus controllers scaled by r_i from one representative controller.
std::vector<BusController> scaled_controllers(const ControllerSpec& spec, const RepresentativeParams& p);

// Closed loop of generators, inverters and the network. States are bus
// frequencies, turbine states, FS filter states (FS buses only) and n-1 angle
// differences to the last bus. Input is the bus disturbance vector; outputs
// are the n bus frequencies followed by the n inverter powers.
struct ClosedLoop {
  StateSpace ss;
  Eigen::VectorXd total_inertia;  // m_i + m_v,i
};
ClosedLoop full_system_ss(const NetworkCase& c, const std::vector<BusController>& controllers);

struct SimGrid {
  double t_end = 40.0;
  double dt = 0.01;
  double onset = 0.0;  // disturbance switches on here; outputs are zero before
};

struct StepResponse {
  Eigen::VectorXd t;
  Eigen::MatrixXd omega;  // n x T
  Eigen::VectorXd coi;
  Eigen::MatrixXd p_inv;  // n x T
  Eigen::VectorXd u0;
  std::vector<std::string> warnings;

  Eigen::Index samples() const { return t.size(); }
};

Eigen::VectorXd time_grid(const SimGrid& grid);

// Output trajectory y(t) of an LTI system under the step u0, by exact
// zero-order-hold propagation of the augmented system.
Eigen::MatrixXd lti_step(const StateSpace& ss, const Eigen::VectorXd& u0, const SimGrid& grid,
                         std::vector<std::string>* warnings = nullptr);

// Final value of the bus frequencies under the step u0.
Eigen::VectorXd steady_state(const ClosedLoop& sys, const Eigen::VectorXd& u0);

StepResponse step_response(const ClosedLoop& sys, const Eigen::VectorXd& u0, const SimGrid& grid);

// Response of a proportional system assembled from its scalar modes.
StepResponse modal_step_response(const ControllerSpec& spec, const RepresentativeParams& p,
                                 const ScaledSpectrum& spectrum, const Eigen::VectorXd& u0,
                                 const SimGrid& grid, Exec exec = Exec::parallel);

// Inertia-weighted average of the rows of omega.
Eigen::VectorXd center_of_inertia(const Eigen::MatrixXd& omega, const Eigen::VectorXd& inertia);

}  // namespace gridshape
