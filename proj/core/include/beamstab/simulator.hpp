#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"
#include "beamstab/lyapunov.hpp"

namespace beamstab {

// simulation state; the tip dofs of b carry the tip translational and
// angular velocities
struct DiscreteState {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double phi = 0.0;
  double omega = 0.0;

  static DiscreteState zero(const DofLayout& layout);
  static DiscreteState from_packed(const Eigen::VectorXd& x_sim,
                                   const DofLayout& layout);
  Eigen::VectorXd packed() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;  // packed sim states, optional
  std::vector<double> V;
  std::vector<double> norm_X;
  std::vector<double> omega;
  std::vector<double> phi;
  std::vector<double> u_applied;  // control of the mode in effect
  std::vector<double> u_literal;  // continuous-form transcription, for gap diagnostics
  std::vector<double> tip_disp;
  std::vector<double> torque;  // filled only when a torque map is supplied
  bool has_torque = false;
};

struct SimulateOptions {
  bool record_states = true;
  const TorqueMap* torque = nullptr;  // non-owning; enables the torque column
};

// Closed loop M_lhs xdot = A_raw x over [a, b, phi, omega], the feedback
// folded in as a rank-one coupling. A single instance caches one
// factorization per time step size; instances are cheap, so concurrent runs
// should each own one rather than share.
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(const DiscreteOperators& ops, const ChannelSpec& ch,
                   const Gains& g, FeedbackMode mode);

  int dim() const { return static_cast<int>(A_raw_.rows()); }
  const Eigen::MatrixXd& A_raw() const { return A_raw_; }
  const Eigen::MatrixXd& M_lhs() const { return M_lhs_; }
  Eigen::MatrixXd A_cl() const;  // dense M_lhs^{-1} A_raw
  const DiscreteOperators& ops() const { return ops_; }
  const LyapunovForm& form() const { return form_; }
  const Gains& gains() const { return g_; }
  ChannelTag tag() const { return tag_; }

  double control(const Eigen::VectorXd& x_sim) const;
  double control_literal(const Eigen::VectorXd& x_sim) const;

  // one step of the implicit midpoint rule,
  // (M - dt/2 A) x_next = (M + dt/2 A) x, with one round of residual refinement
  Eigen::VectorXd step_midpoint(const Eigen::VectorXd& x_sim, double dt) const;

  // a twentieth of the shortest undamped discrete period
  double default_dt() const { return default_dt_; }

  // closed-loop eigenvalues, computed after a similarity transform into
  // energy coordinates whenever the Lyapunov form is positive definite
  Eigen::VectorXcd spectrum() const;

 private:
  DiscreteOperators ops_;
  Gains g_;
  ChannelTag tag_;
  LyapunovForm form_;
  FeedbackLaw law_;
  FeedbackLaw law_literal_;
  Eigen::MatrixXd A_raw_, M_lhs_;
  double default_dt_ = 0.0;

  mutable bool have_factor_ = false;
  mutable double factored_dt_ = 0.0;
  mutable Eigen::MatrixXd lhs_mat_, rhs_mat_;
  mutable Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Trajectory simulate(const ClosedLoopSystem& sys, const DiscreteState& x0, double dt,
                    double T, const SimulateOptions& opts = {});

}  // namespace beamstab
