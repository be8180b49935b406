#include "beamstab/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "beamstab/lyapunov.hpp"
#include "beamstab/reference.hpp"
#include "beamstab/reports.hpp"
#include "beamstab/rng.hpp"
#include "beamstab/simulator.hpp"

namespace beamstab {

namespace {

std::string out_path(const RunConfig& cfg, const char* name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool le_with_slack(double lhs, double rhs, double rel_slack = 1e-12) {
  return lhs <= rhs + rel_slack * std::max(1.0, std::abs(rhs));
}

DiscreteState initial_state(const RunConfig& cfg, const DiscreteOperators& ops) {
  if (cfg.x0 == "zero") return DiscreteState::zero(ops.layout);
  Rng rng(cfg.seed);
  return DiscreteState::from_packed(random_unit_state(rng, ops.gram.sim()),
                                    ops.layout);
}

}  // namespace

int cmd_certify(const RunConfig& cfg) {
  const ChannelSpec ch = cfg.make_channel();
  const Gains g = cfg.resolve_gains(ch);
  const StabilityCertificate cert = certificate(ch, g);
  write_text_atomic(out_path(cfg, "certificate.json"), certificate_json(cert));
  std::printf("certificate: M1=%.6g M2=%.6g kappa^2>=%.6g alpha>%.6g beta>%.6g %s\n",
              cert.M1, cert.M2, cert.kappa_lower_sq, cert.alpha_lower,
              cert.beta_lower, cert.feasible ? "feasible" : "INFEASIBLE");
  return cert.feasible ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
  const ChannelSpec ch = cfg.make_channel();
  const Gains g = cfg.resolve_gains(ch);
  const StabilityCertificate cert = certificate(ch, g);
  const Mesh mesh = cfg.make_mesh();
  const DiscreteOperators ops = assemble(mesh, ch, cfg.load_mode);
  ClosedLoopSystem sys(ops, ch, g, cfg.feedback_mode);

  const double dt = cfg.dt > 0.0 ? cfg.dt : sys.default_dt();
  const DiscreteState x0 = initial_state(cfg, ops);
  const TorqueMap map(cfg.params, mesh, mesh);

  SimulateOptions opts;
  opts.record_states = false;
  opts.torque = &map;
  const Trajectory traj = simulate(sys, x0, dt, cfg.T, opts);

  RunSummary s;
  s.feasible = cert.feasible;
  s.M1 = cert.M1;
  s.M2 = cert.M2;
  s.bound = cert.feasible ? std::sqrt(cert.M2 / cert.M1) : 0.0;
  const double n0 = traj.norm_X.front();
  double sup = 0.0;
  for (double v : traj.norm_X) sup = std::max(sup, v);
  s.sup_ratio = n0 > 0.0 ? sup / n0 : 0.0;
  s.max_residual = max_abs(dissipation_residual(traj, sys.form(), g));
  s.final_abs_omega = std::abs(traj.omega.back());
  s.max_abs_omega = max_abs(traj.omega);
  s.dt = dt;
  s.T = cfg.T;
  s.steps = static_cast<long>(traj.times.size()) - 1;

  write_text_atomic(out_path(cfg, "trajectory.csv"), trajectory_csv(traj));
  write_text_atomic(out_path(cfg, "summary.json"), summary_json(s));
  std::printf("simulate: %ld steps dt=%.6g sup|xi|/|xi0|=%.9g bound=%.9g "
              "max_residual=%.3g final|omega|=%.3g\n",
              s.steps, dt, s.sup_ratio, s.bound, s.max_residual, s.final_abs_omega);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const ChannelSpec ch = cfg.make_channel();
  const Gains g = cfg.resolve_gains(ch);
  const StabilityCertificate cert = certificate(ch, g);
  const Mesh mesh = cfg.make_mesh();
  // the battery checks the identities on the consistent pairing regardless of
  // the configured simulation mode
  const DiscreteOperators ops = assemble(mesh, ch, LoadMode::Consistent);
  ClosedLoopSystem sys(ops, ch, g, FeedbackMode::DiscreteConsistent);

  VerificationReport rep;
  rep.M1 = cert.M1;
  rep.M2 = cert.M2;

  Rng rng(cfg.seed);

  // exact energy balance over a 1000-step probe run
  const double dt = cfg.dt > 0.0 ? cfg.dt : sys.default_dt();
  const DiscreteState x0 = DiscreteState::from_packed(
      random_unit_state(rng, ops.gram.sim()), ops.layout);
  SimulateOptions opts;
  opts.record_states = false;
  const Trajectory traj = simulate(sys, x0, dt, 1000.0 * dt, opts);
  rep.dissipation_max_residual = max_abs(dissipation_residual(traj, sys.form(), g));
  rep.dissipation_scale = traj.V.front();
  rep.dissipation_pass = rep.dissipation_max_residual <= 1e-10 * rep.dissipation_scale;

  // two-sided eigenvalue bounds
  const NormEquivalence ne = norm_equivalence(sys.form(), ops.gram, cert);
  rep.lambda_min = ne.lambda_min;
  rep.lambda_max = ne.lambda_max;
  rep.norm_equivalence_pass = ne.pass;

  // per-state integral inequalities on random clamped shapes
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd a = random_clamped_dofs(rng, n_nodes);
    if (!friedrichs_check(a, mesh).chain_holds()) ++rep.friedrichs_violations;
  }
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd a = random_clamped_dofs(rng, n_nodes);
    const StateBounds sb = state_bounds(a, mesh, ch.physical.rho, ch.physical.m);
    if (!le_with_slack(sb.cs_load_lhs, sb.cs_load_rhs) ||
        !le_with_slack(sb.cs_tip_lhs, sb.cs_tip_rhs))
      ++rep.cauchy_schwarz_violations;
    if (!le_with_slack(sb.composite_lhs, sb.composite_rhs))
      ++rep.composite_violations;
  }

  // closed-loop spectrum against the contraction property
  const Eigen::VectorXcd ev = sys.spectrum();
  rep.spectrum_max_real = ev.real().maxCoeff();
  rep.spectrum_pass = rep.spectrum_max_real <= 1e-10;

  rep.pass = rep.dissipation_pass && rep.norm_equivalence_pass &&
             rep.friedrichs_violations == 0 && rep.cauchy_schwarz_violations == 0 &&
             rep.composite_violations == 0 && rep.spectrum_pass;

  write_text_atomic(out_path(cfg, "verification.json"), verification_json(rep));
  std::printf("verify: dissipation %s (max %.3g, scale %.3g)\n",
              rep.dissipation_pass ? "ok" : "FAIL", rep.dissipation_max_residual,
              rep.dissipation_scale);
  std::printf("verify: pencil %s (lambda in [%.9g, %.9g], M in [%.9g, %.9g])\n",
              rep.norm_equivalence_pass ? "ok" : "FAIL", rep.lambda_min,
              rep.lambda_max, rep.M1, rep.M2);
  std::printf("verify: friedrichs %d, cauchy-schwarz %d, composite %d violations\n",
              rep.friedrichs_violations, rep.cauchy_schwarz_violations,
              rep.composite_violations);
  std::printf("verify: spectrum %s (max Re = %.3g)\n",
              rep.spectrum_pass ? "ok" : "FAIL", rep.spectrum_max_real);
  std::printf("verify: %s\n", rep.pass ? "all properties hold" : "FAILURES present");
  return rep.pass ? 0 : 1;
}

namespace {

// dof vector interpolating the frozen probe shape x^2 (l-x)^2
Eigen::VectorXd probe_dofs(const Mesh& mesh) {
  const double l = mesh.length();
  const int n = static_cast<int>(mesh.nodes.size());
  Eigen::VectorXd a(2 * n);
  for (int i = 0; i < n; ++i) {
    const double x = mesh.nodes[i];
    a(2 * i) = x * x * (l - x) * (l - x);
    a(2 * i + 1) = 2.0 * x * (l - x) * (l - 2.0 * x);
  }
  return a;
}

// rate from the coarsest admissible refinement pair; fine meshes may sit on
// the round-off floor where the ratio stops meaning anything
std::string observed_order(const std::vector<double>& errs) {
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double coarse = errs[i], fine = errs[i + 1];
    if (!std::isfinite(coarse) || !std::isfinite(fine)) continue;
    if (coarse <= 1e-13 || fine <= 1e-13) continue;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::log2(coarse / fine));
    return buf;
  }
  return "n/a";
}

}  // namespace

int cmd_converge(const RunConfig& cfg) {
  const ChannelSpec ch = cfg.make_channel();
  const Gains g = cfg.resolve_gains(ch);
  const auto& phys = ch.physical;

  double ref_freq = std::numeric_limits<double>::quiet_NaN();
  if (phys.rho.degree() == 0 && phys.c.degree() == 0)
    ref_freq = reference_frequencies(phys.l, phys.rho(0.0), phys.c(0.0), phys.m,
                                     phys.J, 1)
                   .front();

  std::vector<ConvergenceRow> rows;
  for (int n : {4, 8, 16, 32, 64}) {
    const Mesh mesh = Mesh::uniform(n, phys.l);
    const DiscreteOperators ops = assemble(mesh, ch, cfg.load_mode);
    ConvergenceRow row;
    row.n = n;

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        ops.K, ops.M_aug, Eigen::EigenvaluesOnly);
    const double w1 = std::sqrt(es.eigenvalues().minCoeff());
    row.eig_err = std::isfinite(ref_freq)
                      ? std::abs(w1 - ref_freq) / ref_freq
                      : std::numeric_limits<double>::quiet_NaN();

    const Eigen::VectorXd probe = probe_dofs(mesh);
    const Eigen::VectorXd ac = probe.tail(ops.layout.n_constrained());
    const double phi = 0.3, omega = 0.2;
    const FeedbackLaw dc = build_feedback(ops, ch, g, FeedbackMode::DiscreteConsistent);
    const FeedbackLaw cf = build_feedback(ops, ch, g, FeedbackMode::ContinuousForm);
    row.mode_gap = std::abs(dc(ac, phi, omega) - cf(ac, phi, omega));

    ClosedLoopSystem sys(ops, ch, g, FeedbackMode::ContinuousForm);
    DiscreteState x0 = DiscreteState::zero(ops.layout);
    x0.a = ac;
    x0.phi = phi;
    x0.omega = omega;
    const double dt = cfg.dt > 0.0 ? cfg.dt : 0.01;
    SimulateOptions opts;
    opts.record_states = false;
    const Trajectory traj = simulate(sys, x0, dt, 200.0 * dt, opts);
    row.residual =
        max_abs(dissipation_residual(traj, sys.form(), g)) / traj.V.front();

    rows.push_back(row);
  }

  std::vector<double> eig_errs, gaps, residuals;
  for (const auto& r : rows) {
    eig_errs.push_back(r.eig_err);
    gaps.push_back(r.mode_gap);
    residuals.push_back(r.residual);
  }
  const std::string footer = "# observed_order eig=" + observed_order(eig_errs) +
                             " gap=" + observed_order(gaps) +
                             " residual=" + observed_order(residuals);

  write_text_atomic(out_path(cfg, "convergence.csv"), convergence_csv(rows, footer));
  for (const auto& r : rows)
    std::printf("converge: n=%-3d eig_err=%.3e mode_gap=%.3e cf_residual=%.3e\n",
                r.n, r.eig_err, r.mode_gap, r.residual);
  std::printf("converge: %s\n", footer.c_str() + 2);
  return 0;
}

}  // namespace beamstab
