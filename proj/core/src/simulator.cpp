#include "beamstab/simulator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamstab {

DiscreteState DiscreteState::zero(const DofLayout& layout) {
  DiscreteState x;
  x.a = Eigen::VectorXd::Zero(layout.n_constrained());
  x.b = Eigen::VectorXd::Zero(layout.n_constrained());
  return x;
}

DiscreteState DiscreteState::from_packed(const Eigen::VectorXd& x_sim,
                                         const DofLayout& layout) {
  const int nc = layout.n_constrained();
  if (x_sim.size() != 2 * nc + 2)
    throw std::invalid_argument("state unpack: size does not match the layout");
  DiscreteState s;
  s.a = x_sim.head(nc);
  s.b = x_sim.segment(nc, nc);
  s.phi = x_sim(2 * nc);
  s.omega = x_sim(2 * nc + 1);
  return s;
}

Eigen::VectorXd DiscreteState::packed() const {
  if (a.size() != b.size())
    throw std::invalid_argument("state pack: a and b disagree in size");
  Eigen::VectorXd x(a.size() + b.size() + 2);
  x << a, b, phi, omega;
  return x;
}

ClosedLoopSystem::ClosedLoopSystem(const DiscreteOperators& ops,
                                   const ChannelSpec& ch, const Gains& g,
                                   FeedbackMode mode)
    : ops_(ops), g_(g), tag_(ch.tag) {
  g_.validate();
  form_ = build_V(ops_, ch, g_);
  law_ = build_feedback(ops_, ch, g_, mode);
  law_literal_ = build_feedback(ops_, ch, g_, FeedbackMode::ContinuousForm);

  const int nc = ops_.layout.n_constrained();
  const int n = 2 * nc + 2;
  const int iphi = 2 * nc, iom = 2 * nc + 1;

  M_lhs_ = Eigen::MatrixXd::Identity(n, n);
  M_lhs_.block(nc, nc, nc, nc) = ops_.M_aug;

  // rows: adot = b; M_aug bdot = -K a + gamma phi L_rho + u L_psi;
  // phidot = omega; omegadot = u, with u = coef_a.a + coef_phi phi + coef_omega omega
  A_raw_ = Eigen::MatrixXd::Zero(n, n);
  A_raw_.block(0, nc, nc, nc) = Eigen::MatrixXd::Identity(nc, nc);
  A_raw_.block(nc, 0, nc, nc) =
      -ops_.K + ops_.L_psi * law_.coef_a.transpose();
  A_raw_.block(nc, iphi, nc, 1) = ch.gamma * ops_.L_rho + law_.coef_phi * ops_.L_psi;
  A_raw_.block(nc, iom, nc, 1) = law_.coef_omega * ops_.L_psi;
  A_raw_(iphi, iom) = 1.0;
  A_raw_.block(iom, 0, 1, nc) = law_.coef_a.transpose();
  A_raw_(iom, iphi) = law_.coef_phi;
  A_raw_(iom, iom) = law_.coef_omega;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      ops_.K, ops_.M_aug, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("closed loop: undamped frequency solve failed");
  const double lam_max = es.eigenvalues().maxCoeff();
  default_dt_ = 2.0 * std::numbers::pi / std::sqrt(lam_max) / 20.0;
}

Eigen::MatrixXd ClosedLoopSystem::A_cl() const {
  return M_lhs_.partialPivLu().solve(A_raw_);
}

namespace {

double apply_law(const FeedbackLaw& law, const Eigen::VectorXd& x_sim) {
  const auto nc = law.coef_a.size();
  return law.coef_a.dot(x_sim.head(nc)) + law.coef_phi * x_sim(2 * nc) +
         law.coef_omega * x_sim(2 * nc + 1);
}

}  // namespace

double ClosedLoopSystem::control(const Eigen::VectorXd& x_sim) const {
  return apply_law(law_, x_sim);
}

double ClosedLoopSystem::control_literal(const Eigen::VectorXd& x_sim) const {
  return apply_law(law_literal_, x_sim);
}

Eigen::VectorXd ClosedLoopSystem::step_midpoint(const Eigen::VectorXd& x_sim,
                                                double dt) const {
  if (!std::isfinite(dt) || dt == 0.0)
    throw std::invalid_argument("step: dt must be finite and nonzero");
  if (x_sim.size() != dim())
    throw std::invalid_argument("step: state has the wrong size");

  if (!have_factor_ || factored_dt_ != dt) {
    lhs_mat_ = M_lhs_ - 0.5 * dt * A_raw_;
    rhs_mat_ = M_lhs_ + 0.5 * dt * A_raw_;
    lu_.compute(lhs_mat_);
    have_factor_ = true;
    factored_dt_ = dt;
  }

  const Eigen::VectorXd rhs = rhs_mat_ * x_sim;
  Eigen::VectorXd y = lu_.solve(rhs);
  // one round of residual refinement keeps the energy balance at round-off
  y += lu_.solve(rhs - lhs_mat_ * y);
  return y;
}

Eigen::VectorXcd ClosedLoopSystem::spectrum() const {
  const Eigen::MatrixXd Acl = A_cl();
  const Eigen::MatrixXd Q = 2.0 * form_.P_sim;
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() == Eigen::Success) {
    // similarity into energy coordinates: the transformed matrix has
    // non-positive symmetric part, which keeps spurious positive real parts
    // of the computed eigenvalues at the round-off level
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd Ahat = L.transpose() * Acl;
    Ahat = L.triangularView<Eigen::Lower>().solve(Ahat.transpose()).transpose();
    return Eigen::EigenSolver<Eigen::MatrixXd>(Ahat, false).eigenvalues();
  }
  return Eigen::EigenSolver<Eigen::MatrixXd>(Acl, false).eigenvalues();
}

Trajectory simulate(const ClosedLoopSystem& sys, const DiscreteState& x0, double dt,
                    double T, const SimulateOptions& opts) {
  if (!(dt > 0.0) || !(T > 0.0) || dt > T)
    throw std::invalid_argument("simulate: need 0 < dt <= T");
  Eigen::VectorXd x = x0.packed();
  if (x.size() != sys.dim())
    throw std::invalid_argument("simulate: initial state has the wrong size");

  const long n_steps = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
  const int nc = sys.ops().layout.n_constrained();
  const int tip = sys.ops().layout.tip_value();
  const Eigen::MatrixXd G_sim = sys.ops().gram.sim();

  Trajectory traj;
  traj.has_torque = opts.torque != nullptr;
  traj.times.reserve(n_steps + 1);
  traj.V.reserve(n_steps + 1);

  auto record = [&](double t, const Eigen::VectorXd& xs) {
    traj.times.push_back(t);
    if (opts.record_states) traj.states.push_back(xs);
    traj.V.push_back(sys.form().eval(xs));
    traj.norm_X.push_back(std::sqrt(xs.dot(G_sim * xs)));
    traj.omega.push_back(xs(2 * nc + 1));
    traj.phi.push_back(xs(2 * nc));
    const double u = sys.control(xs);
    traj.u_applied.push_back(u);
    traj.u_literal.push_back(sys.control_literal(xs));
    traj.tip_disp.push_back(xs(tip));
    if (opts.torque) {
      const Eigen::VectorXd a = xs.head(nc);
      traj.torque.push_back(sys.tag() == ChannelTag::Raising
                                ? opts.torque->torque_raising(u, a, xs(2 * nc))
                                : opts.torque->torque_turning(u, a));
    }
  };

  record(0.0, x);
  for (long n = 1; n <= n_steps; ++n) {
    x = sys.step_midpoint(x, dt);
    record(static_cast<double>(n) * dt, x);
  }
  return traj;
}

}  // namespace beamstab
