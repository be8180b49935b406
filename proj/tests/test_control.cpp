#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "beamstab/beam_model.hpp"
#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"
#include "beamstab/rng.hpp"
#include "beamstab/run_config.hpp"
#include "beamstab/simulator.hpp"

using namespace beamstab;

namespace {

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// element-by-element Gauss quadrature; profiles in these tests have no
// breakpoints interior to any element, so 8 points are exact
double quad_mesh(const Mesh& mesh, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e)
    acc += integrate_piecewise(mesh.nodes[e], mesh.nodes[e + 1], 8, {}, f);
  return acc;
}

// clamped interpolant of psi: nodal dofs with the two clamped entries zeroed
Eigen::VectorXd clamped_interp(const Profile& psi, const Mesh& mesh) {
  Eigen::VectorXd v = interpolate(psi, mesh);
  v(0) = 0.0;
  v(1) = 0.0;
  return v;
}

ChannelSpec uniform_channel() {
  const Profile one = Profile::constant(1.0, 1.0);
  return ChannelSpec(BeamPhysical(1.0, one, one, 1.0, 1.0),
                     Profile::linear(0.0, -1.0, 1.0), 0.0, ChannelTag::Custom);
}

ChannelSpec graded_channel() {
  // rho = 1 + x, c = 2 + x, psi = -x, tip (2, 0.5), gravity coupling 1.5
  return ChannelSpec(
      BeamPhysical(1.0, Profile::linear(1.0, 2.0, 1.0), Profile::linear(2.0, 3.0, 1.0),
                   2.0, 0.5),
      Profile::linear(0.0, -1.0, 1.0), 1.5, ChannelTag::Custom);
}

}  // namespace

TEST_CASE("gain validation") {
  CHECK_NOTHROW(Gains{1.0, 1.0, 0.0, 2.0}.validate());  // k = 0 is admitted
  CHECK_THROWS_AS((Gains{0.0, 1.0, 1.0, 2.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Gains{1.0, -1.0, 1.0, 2.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Gains{1.0, 1.0, -0.5, 2.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Gains{1.0, 1.0, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("certificate constants for the uniform beam") {
  // rho = c = 1, l = 1, m = J = 1, psi = -x, no gravity coupling;
  // alpha = 1, beta = 3, kappa = 2: every threshold evaluates in closed form
  const StabilityCertificate cert =
      certificate(uniform_channel(), Gains{1.0, 3.0, 1.0, 2.0});
  CHECK(close(cert.kappa_lower_sq, 1.5));
  CHECK(close(cert.alpha_lower, 0.0));
  CHECK(close(cert.beta_lower, 7.0 / 3.0));
  CHECK(cert.feasible);
  CHECK(close(cert.M1, 0.5));
  CHECK(close(cert.M2, 23.0 / 3.0));
}

TEST_CASE("certificate constants for a graded beam with gravity coupling") {
  // rho = 1 + x, c = 2 + x, m = 2, J = 1/2, gamma = 3/2;
  // alpha = 10, beta = 4, kappa = 2 evaluated by hand:
  //   int rho^2 = 7/3, load constant m^2 + (l/2) int rho^2 = 31/6
  //   kappa threshold 31/12, beta threshold 7/12 + 2 + 1/2 = 37/12
  const StabilityCertificate cert =
      certificate(graded_channel(), Gains{10.0, 4.0, 1.0, 2.0});
  CHECK(close(cert.kappa_lower_sq, 31.0 / 12.0));
  CHECK(close(cert.alpha_lower, 9.0));
  CHECK(close(cert.beta_lower, 37.0 / 12.0));
  CHECK(cert.feasible);
  CHECK(close(cert.M1, 0.25));   // J/2 is the binding term
  CHECK(close(cert.M2, 12.25));  // alpha + gamma^2 dominates
}

TEST_CASE("feasibility flips when any threshold is crossed") {
  const ChannelSpec ch = graded_channel();
  CHECK(!certificate(ch, Gains{10.0, 3.0, 1.0, 2.0}).feasible);   // beta <= 37/12
  CHECK(!certificate(ch, Gains{9.0, 4.0, 1.0, 2.0}).feasible);    // alpha <= 9
  CHECK(!certificate(ch, Gains{10.0, 4.0, 1.0, 1.6}).feasible);   // kappa^2 <= 31/12
  CHECK(certificate(ch, Gains{10.0, 3.0, 1.0, 2.0}).M1 <= 0.0);
}

TEST_CASE("suggested gains satisfy their own certificate") {
  const TorqueMapParams p = RunConfig::default_params();
  for (const ChannelSpec& ch :
       {make_r_channel(p), make_t_channel(p), graded_channel()}) {
    for (double margin : {1.2, 2.0, 10.0}) {
      const Gains g = suggest_gains(ch, margin, 0.8);
      const StabilityCertificate cert = certificate(ch, g);
      CHECK(cert.feasible);
      CHECK(cert.M1 > 0.0);
      CHECK(close(g.kappa * g.kappa, margin * cert.kappa_lower_sq));
      CHECK(g.k == 0.8);
    }
  }
  CHECK_THROWS_AS(suggest_gains(graded_channel(), 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("discretely consistent feedback matches its quadrature oracle") {
  const ChannelSpec ch = graded_channel();
  const Mesh mesh = Mesh::uniform(5, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g{10.0, 4.0, 1.0, 2.0};
  const FeedbackLaw law = build_feedback(ops, ch, g, FeedbackMode::DiscreteConsistent);

  const auto& phys = ch.physical;
  const Eigen::VectorXd psi_t = clamped_interp(ch.psi, mesh);
  const int nc = ops.layout.n_constrained();
  REQUIRE(law.coef_a.size() == nc);

  for (int j = 0; j < nc; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(2 * mesh.n_elements() + 2);
    ej(2 + j) = 1.0;
    const double bend = quad_mesh(mesh, [&](double x) {
      return phys.c(x) * hermite_eval(psi_t, mesh, x, 2) * hermite_eval(ej, mesh, x, 2);
    });
    double grav = quad_mesh(mesh, [&](double x) {
      return phys.rho(x) * hermite_eval(ej, mesh, x, 0);
    });
    grav += phys.m * hermite_eval(ej, mesh, 1.0, 0);
    CHECK(close(law.coef_a(j), -(bend - ch.gamma * grav) / g.beta));
  }

  // angle coefficient: alpha reduced by gamma times the psi-weighted mass
  double rs = quad_mesh(mesh, [&](double x) {
    return phys.rho(x) * hermite_eval(psi_t, mesh, x, 0);
  });
  rs += phys.m * hermite_eval(psi_t, mesh, 1.0, 0);
  CHECK(close(law.coef_phi, -(g.alpha - ch.gamma * rs) / g.beta));
  CHECK(close(law.coef_omega, -g.k / g.beta));
}

TEST_CASE("continuous-form feedback matches its quadrature oracle") {
  // turning geometry with a cubic static shape so psi'' is nonzero inside
  TorqueMapParams p = RunConfig::default_params();
  p = TorqueMapParams(p.I0, p.I1, p.I2, p.I3, p.J1, p.J2, p.J3, p.m0, p.d, p.R,
                      p.g, p.phiR0, p.l, p.m, Profile::linear(1.0, 2.0, 1.0),
                      Profile::linear(1.0, 1.5, 1.0), p.cy,
                      Profile::cubic({0.0, 0.0, 0.3, -0.1}, 1.0));
  const ChannelSpec ch = make_t_channel(p);
  const Mesh mesh = Mesh::uniform(6, 1.0);
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  const Gains g{2.0, 3.0, 0.7, 2.0};
  const FeedbackLaw law = build_feedback(ops, ch, g, FeedbackMode::ContinuousForm);

  const auto& phys = ch.physical;
  const int nc = ops.layout.n_constrained();
  for (int j = 0; j < nc; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(2 * mesh.n_elements() + 2);
    ej(2 + j) = 1.0;
    const double bend = quad_mesh(mesh, [&](double x) {
      return phys.c(x) * ch.psi.second_derivative(x) * hermite_eval(ej, mesh, x, 2);
    });
    // clamped-end bracket c eta'' psi' - (c eta'')' psi at x = 0
    const double epp = hermite_eval(ej, mesh, 0.0, 2);
    const double eppp = hermite_eval(ej, mesh, 0.0, 3);
    const double flux = phys.c.derivative(0.0) * epp + phys.c(0.0) * eppp;
    const double boundary =
        phys.c(0.0) * epp * ch.psi.derivative(0.0) - flux * ch.psi(0.0);
    double grav = quad_mesh(mesh, [&](double x) {
      return phys.rho(x) * hermite_eval(ej, mesh, x, 0);
    });
    grav += phys.m * hermite_eval(ej, mesh, 1.0, 0);
    CHECK(close(law.coef_a(j), -(bend + boundary - ch.gamma * grav) / g.beta));
  }

  const double rpsi = integrate_profile(ch.psi, &phys.rho, 0) + phys.m * ch.psi(1.0);
  CHECK(close(law.coef_phi, -(g.alpha - ch.gamma * rpsi) / g.beta));
  CHECK(close(law.coef_omega, -g.k / g.beta));
}

TEST_CASE("the two feedback modes coincide for a straight shape and uniform rigidity") {
  // raising channel at zero elevation: psi = -x, constant cy, gamma = 0.
  // The clamped interpolant differs from psi only in the first element, and
  // with constant rigidity the weak end fluxes reproduce the pointwise ones
  // exactly, so the transcription gap vanishes on every mesh.
  TorqueMapParams p = RunConfig::default_params();
  p = TorqueMapParams(p.I0, p.I1, p.I2, p.I3, p.J1, p.J2, p.J3, p.m0, p.d, p.R,
                      p.g, 0.0, p.l, p.m, p.rho, p.cz, p.cy, p.z0);
  const ChannelSpec ch = make_r_channel(p);
  CHECK(ch.gamma == 0.0);

  const Gains g = suggest_gains(ch, 2.0, 1.0);
  for (int n : {3, 8, 17}) {
    const Mesh mesh = Mesh::uniform(n, 1.0);
    const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
    const FeedbackLaw dc = build_feedback(ops, ch, g, FeedbackMode::DiscreteConsistent);
    const FeedbackLaw cf = build_feedback(ops, ch, g, FeedbackMode::ContinuousForm);
    const double scale = dc.coef_a.cwiseAbs().maxCoeff();
    CHECK((dc.coef_a - cf.coef_a).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK(close(dc.coef_phi, cf.coef_phi));
    CHECK(close(dc.coef_omega, cf.coef_omega));
  }
}

TEST_CASE("the transcription gap shrinks at first order under refinement") {
  // graded rigidity makes the weak and pointwise end fluxes differ at O(h),
  // and the turning shape psi(0) = -R weights that difference into the law
  TorqueMapParams p = RunConfig::default_params();
  p = TorqueMapParams(p.I0, p.I1, p.I2, p.I3, p.J1, p.J2, p.J3, p.m0, p.d, p.R,
                      p.g, p.phiR0, p.l, p.m, p.rho,
                      Profile::linear(1.0, 1.5, 1.0), p.cy,
                      Profile::cubic({0.0, 0.0, 0.3, -0.1}, 1.0));
  const ChannelSpec ch = make_t_channel(p);
  const Gains g = suggest_gains(ch, 2.0, 1.0);

  double prev_gap = 0.0;
  for (int n : {8, 16, 32}) {
    const Mesh mesh = Mesh::uniform(n, 1.0);
    const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
    // frozen probe eta = x^2 (1 - x)^2 with eta'''(0) != 0
    Eigen::VectorXd a(2 * n + 2);
    for (int i = 0; i <= n; ++i) {
      const double x = mesh.nodes[i];
      a(2 * i) = x * x * (1.0 - x) * (1.0 - x);
      a(2 * i + 1) = 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    }
    const Eigen::VectorXd ac = a.tail(ops.layout.n_constrained());
    const FeedbackLaw dc = build_feedback(ops, ch, g, FeedbackMode::DiscreteConsistent);
    const FeedbackLaw cf = build_feedback(ops, ch, g, FeedbackMode::ContinuousForm);
    const double gap = std::abs(dc(ac, 0.3, 0.2) - cf(ac, 0.3, 0.2));
    CHECK(gap > 0.0);
    if (n > 8) CHECK(gap < prev_gap / 1.6);
    prev_gap = gap;
  }
}

TEST_CASE("feedback dispatch enforces the channel tag") {
  const TorqueMapParams p = RunConfig::default_params();
  const ChannelSpec r = make_r_channel(p);
  const Mesh mesh = Mesh::uniform(4, 1.0);
  const DiscreteOperators ops = assemble(mesh, r, LoadMode::Consistent);
  const Gains g = suggest_gains(r, 2.0, 1.0);

  DiscreteState x = DiscreteState::zero(ops.layout);
  x.a.setConstant(0.01);
  x.phi = 0.2;
  x.omega = -0.1;
  const double u = feedback(x, ops, r, g, FeedbackMode::DiscreteConsistent);
  CHECK(close(u, feedback_raising(x, ops, r, g, FeedbackMode::DiscreteConsistent)));
  CHECK_THROWS_AS(feedback_turning(x, ops, r, g, FeedbackMode::DiscreteConsistent),
                  std::invalid_argument);
}

TEST_CASE("torque and acceleration maps invert each other") {
  const TorqueMapParams p = RunConfig::default_params();
  const Mesh mesh_t = Mesh::uniform(6, 1.0);
  const Mesh mesh_r = Mesh::uniform(5, 1.0);
  const TorqueMap map(p, mesh_t, mesh_r);
  CHECK(close(map.raising_denominator(), p.raising_denominator()));
  CHECK(close(map.turning_denominator(), p.turning_denominator()));

  Rng rng(314);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd aT = rng.normal_vector(2 * 6);
    const Eigen::VectorXd aR = rng.normal_vector(2 * 5);
    const double uT = 3.0 * rng.normal(), uR = 3.0 * rng.normal();
    const double phiR = rng.normal();

    const auto [MT, MR] = torque_from_accel(uT, uR, aT, aR, phiR, map);
    const auto [uT2, uR2] = accel_from_torque(MT, MR, aT, aR, phiR, map);
    CHECK(close(uT2, uT));
    CHECK(close(uR2, uR));

    // and in the opposite order
    const auto [uT3, uR3] = accel_from_torque(uT, uR, aT, aR, phiR, map);
    const auto [MT3, MR3] = torque_from_accel(uT3, uR3, aT, aR, phiR, map);
    CHECK(close(MT3, uT));
    CHECK(close(MR3, uR));
  }
}

TEST_CASE("torque maps evaluate to their closed-form values on simple states") {
  const TorqueMapParams p = RunConfig::default_params();
  const Mesh mesh = Mesh::uniform(4, 1.0);
  const TorqueMap map(p, mesh, mesh);

  // deflection y = x^2 in both channels: y''(0) = 2, (cz y'')'(0) = 0
  const Eigen::VectorXd a = interpolate(Profile::cubic({0, 0, 1, 0}, 1.0), mesh);
  const Eigen::VectorXd ac = a.tail(2 * 4);

  // turning: D_T u + cz(0) y''(0) cos(phi0), flux term vanishes for constant cz
  const double boundary = 2.0 * std::cos(p.phiR0);
  CHECK(close(map.torque_turning(1.3, ac), p.turning_denominator() * 1.3 + boundary));

  // raising: D_R u - [cy z''(0) + g sin(phi0) (int rho x^2 + m + m0 d)];
  // the straight reference shape removes the phi-proportional gravity term
  const double grav = p.g * 0.5 * (1.0 / 3.0 + 1.0 + p.m0 * p.d);
  const double expect = p.raising_denominator() * 1.3 - (2.0 + grav);
  CHECK(close(map.torque_raising(1.3, ac, 0.7), expect));
  CHECK(close(map.accel_raising(expect, ac, 0.7), 1.3));
}
