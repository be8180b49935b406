#include "beamstab/lyapunov.hpp"

#include <cmath>
#include <stdexcept>

#include "beamstab/simulator.hpp"

namespace beamstab {

double LyapunovForm::eval_extended(const Eigen::VectorXd& x_ext) const {
  if (x_ext.size() != P.rows())
    throw std::invalid_argument("lyapunov: extended state has the wrong size");
  return x_ext.dot(P * x_ext);
}

double LyapunovForm::eval(const Eigen::VectorXd& x_sim) const {
  if (x_sim.size() != P_sim.rows())
    throw std::invalid_argument("lyapunov: simulation state has the wrong size");
  return x_sim.dot(P_sim * x_sim);
}

double LyapunovForm::eval(const DiscreteState& x) const {
  return eval(x.packed());
}

LyapunovForm build_V(const DiscreteOperators& ops, const ChannelSpec& ch,
                     const Gains& g) {
  g.validate();
  const int nc = ops.layout.n_constrained();
  const double gamma = ch.gamma;
  const double psi_l = ch.psi(ch.physical.l);
  const double dpsi_l = ch.psi.derivative(ch.physical.l);
  const double m = ch.physical.m, J = ch.physical.J;
  const Eigen::VectorXd s = ops.psi_c();
  const Eigen::VectorXd Mds = ops.M_dist * s;
  const double omega_diag =
      g.beta + s.dot(Mds) + m * psi_l * psi_l + J * dpsi_l * dpsi_l;

  LyapunovForm form;
  form.layout = ops.layout;

  // extended layout [a, b, phi, omega, p, q]; Q = 2P
  const int ne = 2 * nc + 4;
  const int iphi = 2 * nc, iom = 2 * nc + 1, ip = 2 * nc + 2, iq = 2 * nc + 3;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(ne, ne);
  Q.topLeftCorner(nc, nc) = ops.K;
  Q.block(0, iphi, nc, 1) = -gamma * ops.L_rho;
  Q.block(iphi, 0, 1, nc) = -gamma * ops.L_rho.transpose();
  Q.block(nc, nc, nc, nc) = ops.M_dist;
  Q.block(nc, iom, nc, 1) = -Mds;
  Q.block(iom, nc, 1, nc) = -Mds.transpose();
  Q(iphi, iphi) = g.alpha;
  Q(iom, iom) = omega_diag;
  Q(ip, ip) = m;
  Q(ip, iom) = Q(iom, ip) = -m * psi_l;
  Q(iq, iq) = J;
  Q(iq, iom) = Q(iom, iq) = -J * dpsi_l;
  form.P = 0.5 * Q;

  // simulation layout folds p, q onto the tip dofs of b
  const int ns = 2 * nc + 2;
  const int jphi = 2 * nc, jom = 2 * nc + 1;
  const int tv = nc + ops.layout.tip_value(), ts = nc + ops.layout.tip_slope();
  Eigen::MatrixXd Qs = Eigen::MatrixXd::Zero(ns, ns);
  Qs.topLeftCorner(nc, nc) = ops.K;
  Qs.block(0, jphi, nc, 1) = -gamma * ops.L_rho;
  Qs.block(jphi, 0, 1, nc) = -gamma * ops.L_rho.transpose();
  Qs.block(nc, nc, nc, nc) = ops.M_dist;
  Qs(tv, tv) += m;
  Qs(ts, ts) += J;
  Eigen::VectorXd Mas = Mds;
  Mas(ops.layout.tip_value()) += m * psi_l;
  Mas(ops.layout.tip_slope()) += J * dpsi_l;
  Qs.block(nc, jom, nc, 1) = -Mas;
  Qs.block(jom, nc, 1, nc) = -Mas.transpose();
  Qs(jphi, jphi) = g.alpha;
  Qs(jom, jom) = omega_diag;
  form.P_sim = 0.5 * Qs;

  return form;
}

std::vector<double> dissipation_residual(const Trajectory& traj,
                                         const LyapunovForm& form, const Gains& g) {
  const std::size_t n = traj.times.size();
  if (n < 2) return {};
  const bool have_states = traj.states.size() == n;
  if (traj.omega.size() != n || (!have_states && traj.V.size() != n))
    throw std::invalid_argument("dissipation_residual: inconsistent trajectory");

  auto value = [&](std::size_t i) {
    return have_states ? form.eval(traj.states[i]) : traj.V[i];
  };
  std::vector<double> r(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    const double om_mid = 0.5 * (traj.omega[i] + traj.omega[i + 1]);
    r[i] = value(i + 1) - value(i) + g.k * dt * om_mid * om_mid;
  }
  return r;
}

NormEquivalence norm_equivalence(const LyapunovForm& form, const Gram& gram,
                                 const StabilityCertificate& cert) {
  const Eigen::MatrixXd G = gram.extended();
  if (G.rows() != form.P.rows())
    throw std::invalid_argument("norm_equivalence: layout mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("norm_equivalence: gram matrix is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(2.0 * form.P, G,
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("norm_equivalence: eigensolve failed");

  NormEquivalence out;
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  const double tol = 1e-8 * cert.M2;
  out.pass = cert.feasible && cert.M1 - tol <= out.lambda_min &&
             out.lambda_max <= cert.M2 + tol;
  return out;
}

namespace {

// integrate fn over the mesh, splitting each element at the breakpoints of
// the supplied profiles
double integrate_over_mesh(const Mesh& mesh, int gauss_points,
                           const std::vector<const Profile*>& split_at,
                           const std::function<double(double)>& fn) {
  double total = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e)
    total += integrate_piecewise(mesh.nodes[e], mesh.nodes[e + 1], gauss_points,
                                 split_at, fn);
  return total;
}

bool bounded(double lhs, double rhs, double rel_slack) {
  return lhs <= rhs + rel_slack * std::max(1.0, std::abs(rhs));
}

}  // namespace

bool FriedrichsValues::chain_holds(double rel_slack) const {
  return bounded(eta_sq, slope_bound, rel_slack) &&
         bounded(slope_bound, curv_bound, rel_slack);
}

FriedrichsValues friedrichs_check(const Eigen::VectorXd& a_unconstrained,
                                  const Mesh& mesh) {
  if (a_unconstrained.size() != 2 * static_cast<int>(mesh.nodes.size()))
    throw std::invalid_argument("friedrichs_check: expected the unconstrained layout");
  if (a_unconstrained(0) != 0.0 || a_unconstrained(1) != 0.0)
    throw std::invalid_argument("friedrichs_check: clamped dofs must be zero");

  const double l = mesh.length();
  auto sq = [&](int deriv) {
    return integrate_over_mesh(mesh, 6, {}, [&](double x) {
      const double v = hermite_eval(a_unconstrained, mesh, x, deriv);
      return v * v;
    });
  };
  FriedrichsValues out;
  out.eta_sq = sq(0);
  out.slope_bound = 0.5 * l * l * sq(1);
  out.curv_bound = 0.25 * l * l * l * l * sq(2);
  return out;
}

bool StateBounds::all_hold(double rel_slack) const {
  return bounded(cs_load_lhs, cs_load_rhs, rel_slack) &&
         bounded(cs_tip_lhs, cs_tip_rhs, rel_slack) &&
         bounded(composite_lhs, composite_rhs, rel_slack);
}

StateBounds state_bounds(const Eigen::VectorXd& a_unconstrained, const Mesh& mesh,
                         const Profile& rho, double m) {
  if (a_unconstrained.size() != 2 * static_cast<int>(mesh.nodes.size()))
    throw std::invalid_argument("state_bounds: expected the unconstrained layout");
  const double l = mesh.length();

  auto eta = [&](double x, int d) { return hermite_eval(a_unconstrained, mesh, x, d); };
  const double load = integrate_over_mesh(
      mesh, 6, {&rho}, [&](double x) { return eta(x, 0) * rho(x); });
  const double eta_sq = integrate_over_mesh(
      mesh, 6, {}, [&](double x) { return eta(x, 0) * eta(x, 0); });
  const double slope_sq = integrate_over_mesh(
      mesh, 6, {}, [&](double x) { return eta(x, 1) * eta(x, 1); });
  const double curv_sq = integrate_over_mesh(
      mesh, 6, {}, [&](double x) { return eta(x, 2) * eta(x, 2); });
  const double rho_sq = integrate_profile(rho, &rho, 0);
  const double eta_l = a_unconstrained(a_unconstrained.size() - 2);

  StateBounds out;
  out.cs_load_lhs = load * load;
  out.cs_load_rhs = eta_sq * rho_sq;
  out.cs_tip_lhs = eta_l * eta_l;
  out.cs_tip_rhs = l * slope_sq;
  out.composite_lhs = load * load + m * m * eta_l * eta_l;
  out.composite_rhs = 0.5 * l * l * l * (m * m + 0.5 * l * rho_sq) * curv_sq;
  return out;
}

}  // namespace beamstab
