// Command-line front door: certify | simulate | verify | converge, each driven
// by a config file. Exit codes: 0 pass, 1 domain-negative outcome
// (infeasible gains, failed property), 2 usage or config errors.

#include <cstdio>
#include <cstdint>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "beamstab/commands.hpp"
#include "beamstab/run_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"boundary-feedback stabilization toolkit for flexible beams"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;

  struct SubCmd {
    const char* name;
    const char* help;
    int (*fn)(const beamstab::RunConfig&);
    CLI::App* sub = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* seed_opt = nullptr;
  };
  SubCmd cmds[] = {
      {"certify", "evaluate the stability certificate for the configured gains",
       beamstab::cmd_certify},
      {"simulate", "integrate the closed loop and record the trajectory",
       beamstab::cmd_simulate},
      {"verify", "run the property battery (energy balance, eigen-pencil, bounds)",
       beamstab::cmd_verify},
      {"converge", "mesh-refinement study against the analytic reference",
       beamstab::cmd_converge},
  };
  for (auto& c : cmds) {
    c.sub = app.add_subcommand(c.name, c.help);
    c.sub->add_option("--config", config_path, "config file (dotted keys or JSON)")
        ->required();
    c.out = c.sub->add_option("--out", out_dir, "output directory override");
    c.seed_opt = c.sub->add_option("--seed", seed, "RNG seed override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    beamstab::RunConfig cfg = beamstab::parse_config_file(config_path);
    for (const auto& c : cmds) {
      if (!c.sub->parsed()) continue;
      if (c.out->count() > 0) cfg.out_dir = out_dir;
      if (c.seed_opt->count() > 0) cfg.seed = seed;
      return c.fn(cfg);
    }
    std::fprintf(stderr, "error: no subcommand selected\n");
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
