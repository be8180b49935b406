#pragma once

#include <utility>

#include "beamstab/fem.hpp"

namespace beamstab {

// Gains of the acceleration feedback together with the splitting parameter
// kappa used by the certificate.  k = 0 is admitted so the undamped closed
// loop can be analysed; the stabilizing law itself wants k > 0.
struct Gains {
  double alpha = 1.0;
  double beta = 1.0;
  double k = 1.0;
  double kappa = 2.0;

  void validate() const;
};

// Constants of the two-sided bound  M1 ||xi||^2 <= 2V <= M2 ||xi||^2  together
// with the feasibility thresholds on (kappa, alpha, beta).  feasible means all
// three strict inequalities hold, which is equivalent to M1 > 0.
struct StabilityCertificate {
  double M1 = 0.0;
  double M2 = 0.0;
  double kappa_lower_sq = 0.0;  // kappa^2 must exceed this
  double alpha_lower = 0.0;     // alpha must exceed this (= kappa^2 gamma^2)
  double beta_lower = 0.0;      // beta must exceed this
  bool feasible = false;
  Gains gains;
};

StabilityCertificate certificate(const ChannelSpec& ch, const Gains& g);

// Pick gains that satisfy the certificate thresholds with the given safety
// factor: kappa^2 = margin * kappa_lower_sq, beta = margin * beta_lower,
// alpha = margin * kappa^2 gamma^2 floored at 1 (the gamma = 0 case leaves
// alpha unconstrained).  margin must exceed 1; k is passed through.
Gains suggest_gains(const ChannelSpec& ch, double margin, double k);

enum class FeedbackMode { DiscreteConsistent, ContinuousForm };

// The control is a linear functional of (a, phi, omega); velocities never
// enter.  DiscreteConsistent contracts the assembled operators against the
// constrained interpolant of psi, which is exactly the form under which the
// discrete energy balance closes.  ContinuousForm evaluates the classical
// expression: interior quadrature against the true psi'' plus the clamped-end
// flux terms from recover_boundary.
struct FeedbackLaw {
  Eigen::VectorXd coef_a;
  double coef_phi = 0.0;
  double coef_omega = 0.0;

  double operator()(const Eigen::VectorXd& a, double phi, double omega) const {
    return coef_a.dot(a) + coef_phi * phi + coef_omega * omega;
  }
};

FeedbackLaw build_feedback(const DiscreteOperators& ops, const ChannelSpec& ch,
                           const Gains& g, FeedbackMode mode);

struct DiscreteState;  // defined in simulator.hpp

double feedback(const DiscreteState& x, const DiscreteOperators& ops,
                const ChannelSpec& ch, const Gains& g, FeedbackMode mode);
double feedback_turning(const DiscreteState& x, const DiscreteOperators& ops,
                        const ChannelSpec& ch, const Gains& g, FeedbackMode mode);
double feedback_raising(const DiscreteState& x, const DiscreteOperators& ops,
                        const ChannelSpec& ch, const Gains& g, FeedbackMode mode);

// Affine change of variables between the commanded angular accelerations
// (uT, uR) and the motor torques (M_T, M_R_tilde).  The maps are inverse to
// each other state by state; all coefficients are frozen at construction
// except the state-dependent boundary/integral terms.
class TorqueMap {
public:
  TorqueMap(const TorqueMapParams& p, const Mesh& mesh_t, const Mesh& mesh_r);

  // single-channel conversions (each depends on its own channel state only)
  double torque_turning(double uT, const Eigen::VectorXd& aT_constrained) const;
  double torque_raising(double uR, const Eigen::VectorXd& aR_constrained,
                        double phiR_tilde) const;
  double accel_turning(double MT, const Eigen::VectorXd& aT_constrained) const;
  double accel_raising(double MR, const Eigen::VectorXd& aR_constrained,
                       double phiR_tilde) const;

  double turning_denominator() const { return DT_; }
  double raising_denominator() const { return DR_; }

private:
  // boundary term of the turning map: (R (cz y'')' + cz y'' cos(phiR0)) at x=0
  double turning_boundary(const Eigen::VectorXd& aT) const;
  // state terms of the raising map: cy z''(0) and the two gravity couplings
  double raising_state_terms(const Eigen::VectorXd& aR, double phiR_tilde) const;

  TorqueMapParams p_;
  Mesh mesh_t_, mesh_r_;
  DofLayout layout_t_{}, layout_r_{};
  double DT_ = 0.0, DR_ = 0.0;
  double z0_weight_ = 0.0;  // int z0 rho dx + m z0(l)
  Eigen::VectorXd L_rho_r_;  // int rho v dx + m v(l) on the raising mesh
};

// joint conversions over both channels at once
std::pair<double, double> torque_from_accel(double uT, double uR,
                                            const Eigen::VectorXd& aT,
                                            const Eigen::VectorXd& aR,
                                            double phiR_tilde, const TorqueMap& map);
std::pair<double, double> accel_from_torque(double MT, double MR,
                                            const Eigen::VectorXd& aT,
                                            const Eigen::VectorXd& aR,
                                            double phiR_tilde, const TorqueMap& map);

}  // namespace beamstab
