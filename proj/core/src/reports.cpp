#include "beamstab/reports.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace beamstab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::string certificate_json(const StabilityCertificate& cert) {
  nlohmann::json j;
  j["M1"] = cert.M1;
  j["M2"] = cert.M2;
  j["kappa_lower_sq"] = cert.kappa_lower_sq;
  j["alpha_lower"] = cert.alpha_lower;
  j["beta_lower"] = cert.beta_lower;
  j["feasible"] = cert.feasible;
  j["gains"] = {{"alpha", cert.gains.alpha},
                {"beta", cert.gains.beta},
                {"k", cert.gains.k},
                {"kappa", cert.gains.kappa}};
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,V,norm_X,omega,phi,u,tip_disp";
  if (traj.has_torque) out += ",torque";
  out += '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += fmt(traj.times[i]);
    out += ',';
    out += fmt(traj.V[i]);
    out += ',';
    out += fmt(traj.norm_X[i]);
    out += ',';
    out += fmt(traj.omega[i]);
    out += ',';
    out += fmt(traj.phi[i]);
    out += ',';
    out += fmt(traj.u_applied[i]);
    out += ',';
    out += fmt(traj.tip_disp[i]);
    if (traj.has_torque) {
      out += ',';
      out += fmt(traj.torque[i]);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["sup_ratio"] = s.sup_ratio;
  j["bound"] = s.bound;
  j["max_dissipation_residual"] = s.max_residual;
  j["final_abs_omega"] = s.final_abs_omega;
  j["max_abs_omega"] = s.max_abs_omega;
  j["feasible"] = s.feasible;
  j["M1"] = s.M1;
  j["M2"] = s.M2;
  j["dt"] = s.dt;
  j["T"] = s.T;
  j["steps"] = s.steps;
  return j.dump(2) + "\n";
}

std::string verification_json(const VerificationReport& r) {
  nlohmann::json j;
  j["lambda_min"] = r.lambda_min;
  j["lambda_max"] = r.lambda_max;
  j["M1"] = r.M1;
  j["M2"] = r.M2;
  j["pass"] = r.pass;
  j["dissipation_max_residual"] = r.dissipation_max_residual;
  j["friedrichs_violations"] = r.friedrichs_violations;
  j["properties"] = {
      {"norm_equivalence",
       {{"pass", r.norm_equivalence_pass},
        {"lambda_min", r.lambda_min},
        {"lambda_max", r.lambda_max}}},
      {"dissipation",
       {{"pass", r.dissipation_pass},
        {"max_residual", r.dissipation_max_residual},
        {"scale", r.dissipation_scale}}},
      {"friedrichs", {{"pass", r.friedrichs_violations == 0},
                      {"violations", r.friedrichs_violations}}},
      {"cauchy_schwarz", {{"pass", r.cauchy_schwarz_violations == 0},
                          {"violations", r.cauchy_schwarz_violations}}},
      {"composite_bound", {{"pass", r.composite_violations == 0},
                           {"violations", r.composite_violations}}},
      {"spectrum",
       {{"pass", r.spectrum_pass}, {"max_real_part", r.spectrum_max_real}}},
  };
  return j.dump(2) + "\n";
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows,
                            const std::string& footer) {
  std::string out = "n,eig_err_rel,mode_gap,cf_residual\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += fmt(r.eig_err);
    out += ',';
    out += fmt(r.mode_gap);
    out += ',';
    out += fmt(r.residual);
    out += '\n';
  }
  if (!footer.empty()) {
    out += footer;
    if (footer.back() != '\n') out += '\n';
  }
  return out;
}

}  // namespace beamstab
