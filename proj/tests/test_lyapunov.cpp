#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "beamstab/beam_model.hpp"
#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"
#include "beamstab/lyapunov.hpp"
#include "beamstab/rng.hpp"
#include "beamstab/run_config.hpp"
#include "beamstab/simulator.hpp"

using namespace beamstab;

namespace {

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

double quad_mesh(const Mesh& mesh, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e)
    acc += integrate_piecewise(mesh.nodes[e], mesh.nodes[e + 1], 8, {}, f);
  return acc;
}

ChannelSpec graded_channel() {
  return ChannelSpec(
      BeamPhysical(1.0, Profile::linear(1.0, 2.0, 1.0), Profile::linear(2.0, 3.0, 1.0),
                   2.0, 0.5),
      Profile::linear(0.0, -1.0, 1.0), 1.5, ChannelTag::Custom);
}

ChannelSpec uniform_channel() {
  const Profile one = Profile::constant(1.0, 1.0);
  return ChannelSpec(BeamPhysical(1.0, one, one, 1.0, 1.0),
                     Profile::linear(0.0, -1.0, 1.0), 0.0, ChannelTag::Custom);
}

}  // namespace

TEST_CASE("the energy form matches its integral definition term by term") {
  const ChannelSpec ch = graded_channel();
  const Mesh mesh = Mesh::uniform(5, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g{10.0, 4.0, 1.0, 2.0};
  const LyapunovForm form = build_V(ops, ch, g);

  const int nc = ops.layout.n_constrained();
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd a = rng.normal_vector(nc);
    const Eigen::VectorXd b = rng.normal_vector(nc);
    const double phi = rng.normal(), omega = rng.normal();
    const double p = rng.normal(), q = rng.normal();

    Eigen::VectorXd x_ext(2 * nc + 4);
    x_ext << a, b, phi, omega, p, q;

    // clamped interpolant of psi, the velocity reference shape
    Eigen::VectorXd psi_t = interpolate(ch.psi, mesh);
    psi_t(0) = psi_t(1) = 0.0;
    const Eigen::VectorXd af = ops.extend(a), bf = ops.extend(b);
    const auto& phys = ch.physical;

    const double bend = quad_mesh(
        mesh, [&](double x) { return phys.c(x) * std::pow(hermite_eval(af, mesh, x, 2), 2); });
    const double kinetic = quad_mesh(mesh, [&](double x) {
      const double rel = hermite_eval(bf, mesh, x, 0) - omega * hermite_eval(psi_t, mesh, x, 0);
      return phys.rho(x) * rel * rel;
    });
    const double grav =
        quad_mesh(mesh, [&](double x) { return phys.rho(x) * hermite_eval(af, mesh, x, 0); }) +
        phys.m * hermite_eval(af, mesh, 1.0, 0);
    const double tip_v = phys.m * std::pow(p - omega * ch.psi(1.0), 2);
    const double tip_w = phys.J * std::pow(q - omega * ch.psi.derivative(1.0), 2);

    const double two_v = bend + kinetic + tip_v + tip_w + g.alpha * phi * phi +
                         g.beta * omega * omega - 2.0 * ch.gamma * phi * grav;
    CHECK(close(2.0 * form.eval_extended(x_ext), two_v));

    // the simulation-layout form agrees with the extended one on states where
    // the tip dofs of b carry (p, q)
    Eigen::VectorXd b_sim = b;
    b_sim(ops.layout.tip_value()) = p;
    b_sim(ops.layout.tip_slope()) = q;
    Eigen::VectorXd x_sim(2 * nc + 2);
    x_sim << a, b_sim, phi, omega;
    Eigen::VectorXd x_ext_tied(2 * nc + 4);
    x_ext_tied << a, b_sim, phi, omega, p, q;
    CHECK(close(form.eval(x_sim), form.eval_extended(x_ext_tied)));

    DiscreteState st;
    st.a = a;
    st.b = b_sim;
    st.phi = phi;
    st.omega = omega;
    CHECK(close(form.eval(st), form.eval(x_sim)));
  }
}

TEST_CASE("without coupling the rigid block of the form is diagonal") {
  const Profile one = Profile::constant(1.0, 1.0);
  const ChannelSpec ch(BeamPhysical(1.0, one, one, 1.0, 1.0), Profile::zero(1.0),
                       0.0, ChannelTag::Custom);
  const Mesh mesh = Mesh::uniform(4, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g{3.0, 7.0, 1.0, 2.0};
  const LyapunovForm form = build_V(ops, ch, g);

  const int nc = ops.layout.n_constrained();
  const int iphi = 2 * nc, iom = 2 * nc + 1;
  CHECK(close(2.0 * form.P(iphi, iphi), 3.0));
  CHECK(close(2.0 * form.P(iom, iom), 7.0));
  CHECK(form.P(iphi, iom) == 0.0);
  CHECK(form.P.block(0, iphi, 2 * nc, 1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(form.P.block(0, iom, 2 * nc, 1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((form.P - form.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("norm equivalence brackets the pencil spectrum by the certificate") {
  const ChannelSpec ch = uniform_channel();
  const Gains g{1.0, 3.0, 1.0, 2.0};
  const StabilityCertificate cert = certificate(ch, g);
  REQUIRE(cert.feasible);

  for (int n : {4, 8, 16}) {
    const Mesh mesh = Mesh::uniform(n, 1.0);
    const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
    const LyapunovForm form = build_V(ops, ch, g);
    const NormEquivalence ne = norm_equivalence(form, ops.gram, cert);
    CHECK(ne.pass);
    CHECK(ne.lambda_min >= cert.M1 - 1e-8 * cert.M2);
    CHECK(ne.lambda_max <= cert.M2 * (1.0 + 1e-8));
    CHECK(ne.lambda_min <= ne.lambda_max);
  }
}

TEST_CASE("an infeasible certificate can never certify the pencil") {
  const ChannelSpec ch = uniform_channel();
  const Gains g{1.0, 1.0, 1.0, 2.0};  // beta below the 7/3 threshold
  const StabilityCertificate cert = certificate(ch, g);
  REQUIRE(!cert.feasible);

  const Mesh mesh = Mesh::uniform(8, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const NormEquivalence ne = norm_equivalence(build_V(ops, ch, g), ops.gram, cert);
  CHECK(!ne.pass);
}

TEST_CASE("discrete energy balance closes along consistent trajectories") {
  const ChannelSpec ch = make_r_channel(RunConfig::default_params());
  const Mesh mesh = Mesh::uniform(8, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g = suggest_gains(ch, 2.0, 1.0);
  const ClosedLoopSystem sys(ops, ch, g, FeedbackMode::DiscreteConsistent);

  Rng rng(5);
  DiscreteState x0 = DiscreteState::from_packed(
      random_unit_state(rng, ops.gram.sim()), ops.layout);
  const Trajectory traj = simulate(sys, x0, 0.01, 0.5);
  const std::vector<double> res = dissipation_residual(traj, sys.form(), g);
  REQUIRE(res.size() == traj.times.size() - 1);

  double worst = 0.0;
  for (double r : res) worst = std::max(worst, std::abs(r));
  CHECK(worst <= 1e-13 * traj.V.front());

  // recompute the first residual from the recorded states
  const double om_mid = 0.5 * (traj.omega[0] + traj.omega[1]);
  const double manual = sys.form().eval(traj.states[1]) -
                        sys.form().eval(traj.states[0]) +
                        g.k * 0.01 * om_mid * om_mid;
  CHECK(close(res[0], manual, 1e-15));
}

TEST_CASE("the balance diagnostic flags the transcribed law") {
  // graded rigidity plus a curved turning shape: the continuous-form law is
  // not the discrete gradient, so a nonzero residual must be reported
  TorqueMapParams p = RunConfig::default_params();
  p = TorqueMapParams(p.I0, p.I1, p.I2, p.I3, p.J1, p.J2, p.J3, p.m0, p.d, p.R,
                      p.g, p.phiR0, p.l, p.m, p.rho,
                      Profile::linear(1.0, 1.5, 1.0), p.cy,
                      Profile::cubic({0.0, 0.0, 0.3, -0.1}, 1.0));
  const ChannelSpec ch = make_t_channel(p);
  const Mesh mesh = Mesh::uniform(4, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g = suggest_gains(ch, 2.0, 1.0);
  const ClosedLoopSystem sys(ops, ch, g, FeedbackMode::ContinuousForm);

  Rng rng(6);
  DiscreteState x0 = DiscreteState::from_packed(
      random_unit_state(rng, ops.gram.sim()), ops.layout);
  const Trajectory traj = simulate(sys, x0, 0.01, 0.5);
  double worst = 0.0;
  for (double r : dissipation_residual(traj, sys.form(), g))
    worst = std::max(worst, std::abs(r));
  CHECK(worst > 1e-9 * traj.V.front());
}

TEST_CASE("clamped-end chain inequality: frozen values for eta = x^2") {
  const Mesh mesh = Mesh::uniform(6, 1.0);
  const Eigen::VectorXd a = interpolate(Profile::cubic({0, 0, 1, 0}, 1.0), mesh);
  const FriedrichsValues fv = friedrichs_check(a, mesh);
  CHECK(close(fv.eta_sq, 0.2));
  CHECK(close(fv.slope_bound, 2.0 / 3.0));
  CHECK(close(fv.curv_bound, 1.0));
  CHECK(fv.chain_holds());

  Eigen::VectorXd bad = a;
  bad(1) = 0.5;  // nonzero clamped slope
  CHECK_THROWS_AS(friedrichs_check(bad, mesh), std::invalid_argument);
}

TEST_CASE("per-state bounds: frozen values for eta = x^2 with graded density") {
  const Mesh mesh = Mesh::uniform(4, 1.0);
  const Eigen::VectorXd a = interpolate(Profile::cubic({0, 0, 1, 0}, 1.0), mesh);
  const Profile rho = Profile::linear(1.0, 2.0, 1.0);
  const StateBounds sb = state_bounds(a, mesh, rho, 2.0);

  CHECK(close(sb.cs_load_lhs, 49.0 / 144.0));  // (int (1+x) x^2)^2 = (7/12)^2
  CHECK(close(sb.cs_load_rhs, 7.0 / 15.0));    // (1/5)(7/3)
  CHECK(close(sb.cs_tip_lhs, 1.0));
  CHECK(close(sb.cs_tip_rhs, 4.0 / 3.0));
  CHECK(close(sb.composite_lhs, 49.0 / 144.0 + 4.0));
  CHECK(close(sb.composite_rhs, 31.0 / 3.0));  // (1/2)(4 + 7/6) * 4
  CHECK(sb.all_hold());
}

TEST_CASE("bound sweeps over random clamped states never find a violation") {
  const Mesh mesh = Mesh::uniform(16, 1.0);
  const Profile rho = Profile::linear(1.0, 2.0, 1.0);
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd a = random_clamped_dofs(rng, 17);
    CHECK(friedrichs_check(a, mesh).chain_holds());
    CHECK(state_bounds(a, mesh, rho, 2.0).all_hold());
  }
}
