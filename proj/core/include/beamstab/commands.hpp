#pragma once

#include "beamstab/run_config.hpp"

namespace beamstab {

// Workflow entry points behind the command-line front end. Each writes its
// report files under cfg.out_dir and prints a short outcome line.
//
// Exit-code contract: 0 = pass, 1 = domain-negative outcome (infeasible
// gains, failed property), 2 = usage/config error (raised as exceptions for
// the caller to map).
int cmd_certify(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_converge(const RunConfig& cfg);

}  // namespace beamstab
