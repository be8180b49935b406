#pragma once

#include <string>
#include <vector>

#include "beamstab/control.hpp"
#include "beamstab/simulator.hpp"

namespace beamstab {

// write via a temp file in the same directory plus rename, so readers never
// observe a partial file
void write_text_atomic(const std::string& path, const std::string& content);

std::string certificate_json(const StabilityCertificate& cert);

// header t,V,norm_X,omega,phi,u,tip_disp[,torque]; 17 significant digits,
// LF line endings
std::string trajectory_csv(const Trajectory& traj);

struct RunSummary {
  double sup_ratio = 0.0;     // sup_t ||xi(t)||_X / ||xi(0)||_X
  double bound = 0.0;         // sqrt(M2/M1), 0 when the certificate is infeasible
  double max_residual = 0.0;  // worst discrete energy-balance residual
  double final_abs_omega = 0.0;
  double max_abs_omega = 0.0;
  bool feasible = false;
  double M1 = 0.0;
  double M2 = 0.0;
  double dt = 0.0;
  double T = 0.0;
  long steps = 0;
};

std::string summary_json(const RunSummary& s);

struct VerificationReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
  bool norm_equivalence_pass = false;
  double dissipation_max_residual = 0.0;
  double dissipation_scale = 0.0;  // V at the start of the probe run
  bool dissipation_pass = false;
  int friedrichs_violations = 0;
  int cauchy_schwarz_violations = 0;
  int composite_violations = 0;
  double spectrum_max_real = 0.0;
  bool spectrum_pass = false;
  bool pass = false;
};

std::string verification_json(const VerificationReport& r);

struct ConvergenceRow {
  int n = 0;
  double eig_err = 0.0;    // relative first-frequency error vs the reference
  double mode_gap = 0.0;   // |u_discrete - u_continuous| on the frozen probe state
  double residual = 0.0;   // continuous-form energy-balance residual (scaled)
};

// footer, when nonempty, is appended as trailing comment lines
std::string convergence_csv(const std::vector<ConvergenceRow>& rows,
                            const std::string& footer = "");

}  // namespace beamstab
