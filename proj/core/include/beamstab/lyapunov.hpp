#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"

namespace beamstab {

struct Trajectory;

// Quadratic energy-like form certifying stability: V(x) = x^T P x, so the
// matrix entering the norm-equivalence pencil is 2P.
//
// P lives on the extended layout [a, b, phi, omega, p, q] where the tip
// velocity p and tip angular rate q are independent coordinates. P_sim is the
// same form on the simulation layout [a, b, phi, omega], where the tip dofs
// of b play the roles of p and q.
struct LyapunovForm {
  Eigen::MatrixXd P;
  Eigen::MatrixXd P_sim;
  DofLayout layout;

  double eval_extended(const Eigen::VectorXd& x_ext) const;
  double eval(const Eigen::VectorXd& x_sim) const;
  double eval(const DiscreteState& x) const;
};

LyapunovForm build_V(const DiscreteOperators& ops, const ChannelSpec& ch,
                     const Gains& g);

// residual_n = V(x_{n+1}) - V(x_n) + k dt omega_mid^2 for each recorded step;
// zero to round-off when the trajectory was produced with the consistent load
// and the discretely consistent feedback
std::vector<double> dissipation_residual(const Trajectory& traj,
                                         const LyapunovForm& form, const Gains& g);

struct NormEquivalence {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool pass = false;
};

// Generalized symmetric-definite eigensolve of 2P z = lambda G z on the
// extended state. pass requires a feasible certificate and
// M1 - tol <= lambda_min, lambda_max <= M2 + tol with tol = 1e-8 M2.
NormEquivalence norm_equivalence(const LyapunovForm& form, const Gram& gram,
                                 const StabilityCertificate& cert);

// The chain int eta^2 <= (l^2/2) int eta'^2 <= (l^4/4) int eta''^2 for
// functions clamped at x = 0.
struct FriedrichsValues {
  double eta_sq = 0.0;
  double slope_bound = 0.0;
  double curv_bound = 0.0;
  bool chain_holds(double rel_slack = 1e-12) const;
};

// a is the unconstrained dof vector; the two clamped dofs must be zero
FriedrichsValues friedrichs_check(const Eigen::VectorXd& a_unconstrained,
                                  const Mesh& mesh);

// Per-state scalar bounds used in the certificate derivation:
//   load:      (int eta rho)^2            <= int eta^2 * int rho^2
//   tip:       eta(l)^2                   <= l * int eta'^2
//   composite: (int eta rho)^2 + m^2 eta(l)^2
//              <= (l^3/2)(m^2 + (l/2) int rho^2) * int eta''^2
struct StateBounds {
  double cs_load_lhs = 0.0, cs_load_rhs = 0.0;
  double cs_tip_lhs = 0.0, cs_tip_rhs = 0.0;
  double composite_lhs = 0.0, composite_rhs = 0.0;
  bool all_hold(double rel_slack = 1e-12) const;
};

StateBounds state_bounds(const Eigen::VectorXd& a_unconstrained, const Mesh& mesh,
                         const Profile& rho, double m);

}  // namespace beamstab
