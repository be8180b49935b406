#include "beamstab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "beamstab/simulator.hpp"

namespace beamstab {

void Gains::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("gains: alpha must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("gains: beta must be positive");
  if (!(k >= 0.0)) throw std::invalid_argument("gains: k must be non-negative");
  if (!(kappa != 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("gains: kappa must be nonzero");
}

namespace {

// extrema on a sampled grid (breakpoints plus 64 samples per interval),
// refined x2 until both ends are stable to 1e-10
std::pair<double, double> grid_extrema(const Profile& p) {
  const auto& bp = p.breakpoints();
  double lo_prev = 0.0, hi_prev = 0.0;
  int per_interval = 64;
  for (int pass = 0;; ++pass, per_interval *= 2) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      const double xs = bp[k], xe = bp[k + 1];
      for (int s = 0; s <= per_interval; ++s) {
        const double v = p(xs + (xe - xs) * static_cast<double>(s) / per_interval);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const bool stable =
        pass > 0 && std::abs(lo - lo_prev) <= 1e-10 * std::max(1.0, std::abs(lo)) &&
        std::abs(hi - hi_prev) <= 1e-10 * std::max(1.0, std::abs(hi));
    if (stable || pass >= 14) return {lo, hi};
    lo_prev = lo;
    hi_prev = hi;
  }
}

struct ChannelQuadratures {
  double rho_min, rho_max, c_min, c_max;
  double int_rho_sq;    // int rho^2
  double int_rho_psi;   // int rho psi
  double int_rho_psi2;  // int rho psi^2
  double psi_l, dpsi_l;
  double load_sq;       // m^2 + (l/2) int rho^2
};

ChannelQuadratures channel_quadratures(const ChannelSpec& ch) {
  const auto& phys = ch.physical;
  ChannelQuadratures q{};
  std::tie(q.rho_min, q.rho_max) = grid_extrema(phys.rho);
  std::tie(q.c_min, q.c_max) = grid_extrema(phys.c);
  q.int_rho_sq = integrate_profile(phys.rho, &phys.rho, 0);
  q.int_rho_psi = integrate_profile(ch.psi, &phys.rho, 0);
  q.int_rho_psi2 = integrate_piecewise(
      0.0, phys.l, 8, {&ch.psi, &phys.rho},
      [&](double x) { return phys.rho(x) * ch.psi(x) * ch.psi(x); });
  q.psi_l = ch.psi(phys.l);
  q.dpsi_l = ch.psi.derivative(phys.l);
  q.load_sq = phys.m * phys.m + 0.5 * phys.l * q.int_rho_sq;
  return q;
}

}  // namespace

StabilityCertificate certificate(const ChannelSpec& ch, const Gains& g) {
  g.validate();
  const auto& phys = ch.physical;
  const ChannelQuadratures q = channel_quadratures(ch);
  const double l = phys.l, m = phys.m, J = phys.J;
  const double gamma = ch.gamma;
  const double kappa_sq = g.kappa * g.kappa;
  const double l3 = l * l * l;

  StabilityCertificate cert;
  cert.gains = g;
  cert.kappa_lower_sq = l3 / q.c_min * q.load_sq;
  cert.alpha_lower = kappa_sq * gamma * gamma;
  cert.beta_lower = q.int_rho_psi2 + m * q.psi_l * q.psi_l + J * q.dpsi_l * q.dpsi_l;

  cert.M1 = std::min({g.alpha - kappa_sq * gamma * gamma,
                      0.5 * m,
                      0.5 * J,
                      0.5 * q.rho_min,
                      g.beta - cert.beta_lower,
                      q.c_min - l3 / kappa_sq * q.load_sq});
  cert.M2 = std::max({g.alpha + gamma * gamma,
                      2.0 * m,
                      2.0 * J,
                      2.0 * q.rho_max,
                      g.beta + 2.0 * q.int_rho_psi2 + 2.0 * J * q.dpsi_l * q.dpsi_l +
                          2.0 * m * q.psi_l * q.psi_l,
                      l3 * q.load_sq + q.c_max});

  cert.feasible = kappa_sq > cert.kappa_lower_sq && g.alpha > cert.alpha_lower &&
                  g.beta > cert.beta_lower;
  return cert;
}

Gains suggest_gains(const ChannelSpec& ch, double margin, double k) {
  if (!(margin > 1.0))
    throw std::invalid_argument("suggest_gains: margin must exceed 1");
  if (!(k >= 0.0)) throw std::invalid_argument("suggest_gains: k must be non-negative");
  const ChannelQuadratures q = channel_quadratures(ch);
  const double l3 = ch.physical.l * ch.physical.l * ch.physical.l;
  const double kappa_lower_sq = l3 / q.c_min * q.load_sq;
  const double beta_lower = q.int_rho_psi2 + ch.physical.m * q.psi_l * q.psi_l +
                            ch.physical.J * q.dpsi_l * q.dpsi_l;

  Gains g;
  g.kappa = std::sqrt(margin * kappa_lower_sq);
  g.alpha = std::max(margin * g.kappa * g.kappa * ch.gamma * ch.gamma, 1.0);
  g.beta = std::max(margin * beta_lower, 1.0);
  g.k = k;
  g.validate();
  return g;
}

FeedbackLaw build_feedback(const DiscreteOperators& ops, const ChannelSpec& ch,
                           const Gains& g, FeedbackMode mode) {
  g.validate();
  const double gamma = ch.gamma;
  const int nc = ops.layout.n_constrained();
  Eigen::VectorXd bracket(nc);
  double phi_inner = 0.0;

  if (mode == FeedbackMode::DiscreteConsistent) {
    const Eigen::VectorXd s = ops.psi_c();
    bracket = ops.K * s;
    phi_inner = g.alpha - gamma * ops.L_rho.dot(s);
  } else {
    // interior quadrature of c psi'' against each shape function
    const Profile& c = ch.physical.c;
    const Profile& psi = ch.psi;
    Eigen::VectorXd f_full = Eigen::VectorXd::Zero(ops.layout.n_unconstrained());
    for (int e = 0; e < ops.mesh.n_elements(); ++e) {
      const double xa = ops.mesh.nodes[e], xb = ops.mesh.nodes[e + 1];
      const double h = xb - xa;
      const GaussRule& rule = gauss_rule(8);
      std::vector<double> cuts{xa};
      for (const Profile* p : {&c, &psi})
        for (double x : p->breakpoints())
          if (x > xa && x < xb) cuts.push_back(x);
      cuts.push_back(xb);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t sgm = 0; sgm + 1 < cuts.size(); ++sgm) {
        const double mid = 0.5 * (cuts[sgm] + cuts[sgm + 1]);
        const double half = 0.5 * (cuts[sgm + 1] - cuts[sgm]);
        for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
          const double x = mid + half * rule.nodes[qp];
          const double w = half * rule.weights[qp];
          const double t = (x - xa) / h;
          const double d2N[4] = {(-6.0 + 12.0 * t) / (h * h), (-4.0 + 6.0 * t) / h,
                                 (6.0 - 12.0 * t) / (h * h), (-2.0 + 6.0 * t) / h};
          const double cpp = c(x) * psi.second_derivative(x);
          for (int i = 0; i < 4; ++i) f_full(2 * e + i) += w * cpp * d2N[i];
        }
      }
    }
    bracket = f_full.tail(nc);
    // clamped-end correction (c eta'' psi' - (c eta'')' psi)|_{x=0}; only the
    // first interior node's dofs reach the clamp element
    const double psi0 = psi(0.0), dpsi0 = psi.derivative(0.0);
    const double c0 = c(0.0);
    for (int j = 0; j < 2 && j < nc; ++j) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(nc);
      unit(j) = 1.0;
      const BoundaryValues bv = recover_boundary(ops.extend(unit), c, ops.mesh);
      bracket(j) += dpsi0 * c0 * bv.eta_pp_0 - psi0 * bv.flux_0;
    }
    const double q_psi = integrate_profile(psi, &ch.physical.rho, 0) +
                         ch.physical.m * psi(ch.physical.l);
    phi_inner = g.alpha - gamma * q_psi;
  }

  FeedbackLaw law;
  law.coef_a = -(bracket - gamma * ops.L_rho) / g.beta;
  law.coef_phi = -phi_inner / g.beta;
  law.coef_omega = -g.k / g.beta;
  return law;
}

double feedback(const DiscreteState& x, const DiscreteOperators& ops,
                const ChannelSpec& ch, const Gains& g, FeedbackMode mode) {
  return build_feedback(ops, ch, g, mode)(x.a, x.phi, x.omega);
}

double feedback_turning(const DiscreteState& x, const DiscreteOperators& ops,
                        const ChannelSpec& ch, const Gains& g, FeedbackMode mode) {
  if (ch.tag != ChannelTag::Turning)
    throw std::invalid_argument("feedback_turning: channel is not the turning one");
  return feedback(x, ops, ch, g, mode);
}

double feedback_raising(const DiscreteState& x, const DiscreteOperators& ops,
                        const ChannelSpec& ch, const Gains& g, FeedbackMode mode) {
  if (ch.tag != ChannelTag::Raising)
    throw std::invalid_argument("feedback_raising: channel is not the raising one");
  return feedback(x, ops, ch, g, mode);
}

// ---------------------------------------------------------------------------
// torque maps
// ---------------------------------------------------------------------------

TorqueMap::TorqueMap(const TorqueMapParams& p, const Mesh& mesh_t, const Mesh& mesh_r)
    : p_(p), mesh_t_(mesh_t), mesh_r_(mesh_r) {
  layout_t_ = DofLayout{static_cast<int>(mesh_t_.nodes.size())};
  layout_r_ = DofLayout{static_cast<int>(mesh_r_.nodes.size())};
  DT_ = p_.turning_denominator();
  DR_ = p_.raising_denominator();
  z0_weight_ = integrate_profile(p_.z0, &p_.rho, 0) + p_.m * p_.z0(p_.l);
  // mass-type load on the raising mesh: int rho v dx + m v(l)
  DiscreteOperators ops_r = assemble(mesh_r_, p_.rho, p_.cy,
                                     Profile::zero(p_.l), p_.m, p_.J2,
                                     LoadMode::ExactQuadrature);
  L_rho_r_ = ops_r.L_rho;
}

double TorqueMap::turning_boundary(const Eigen::VectorXd& aT) const {
  if (aT.size() != layout_t_.n_constrained())
    throw std::invalid_argument("torque map: turning state has the wrong size");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(layout_t_.n_unconstrained());
  full.tail(aT.size()) = aT;
  const BoundaryValues bv = recover_boundary(full, p_.cz, mesh_t_);
  return p_.R * bv.flux_0 + p_.cz(0.0) * bv.eta_pp_0 * std::cos(p_.phiR0);
}

double TorqueMap::raising_state_terms(const Eigen::VectorXd& aR,
                                      double phiR_tilde) const {
  if (aR.size() != layout_r_.n_constrained())
    throw std::invalid_argument("torque map: raising state has the wrong size");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(layout_r_.n_unconstrained());
  full.tail(aR.size()) = aR;
  const BoundaryValues bv = recover_boundary(full, p_.cy, mesh_r_);
  const double sp = std::sin(p_.phiR0), cp = std::cos(p_.phiR0);
  return p_.cy(0.0) * bv.eta_pp_0 +
         p_.g * (L_rho_r_.dot(aR) + p_.m0 * p_.d) * sp +
         p_.g * z0_weight_ * phiR_tilde * cp;
}

double TorqueMap::torque_turning(double uT, const Eigen::VectorXd& aT) const {
  return DT_ * uT + turning_boundary(aT);
}

double TorqueMap::accel_turning(double MT, const Eigen::VectorXd& aT) const {
  return (MT - turning_boundary(aT)) / DT_;
}

double TorqueMap::torque_raising(double uR, const Eigen::VectorXd& aR,
                                 double phiR_tilde) const {
  return DR_ * uR - raising_state_terms(aR, phiR_tilde);
}

double TorqueMap::accel_raising(double MR, const Eigen::VectorXd& aR,
                                double phiR_tilde) const {
  return (MR + raising_state_terms(aR, phiR_tilde)) / DR_;
}

std::pair<double, double> torque_from_accel(double uT, double uR,
                                            const Eigen::VectorXd& aT,
                                            const Eigen::VectorXd& aR,
                                            double phiR_tilde, const TorqueMap& map) {
  return {map.torque_turning(uT, aT), map.torque_raising(uR, aR, phiR_tilde)};
}

std::pair<double, double> accel_from_torque(double MT, double MR,
                                            const Eigen::VectorXd& aT,
                                            const Eigen::VectorXd& aR,
                                            double phiR_tilde, const TorqueMap& map) {
  return {map.accel_turning(MT, aT), map.accel_raising(MR, aR, phiR_tilde)};
}

}  // namespace beamstab
