#pragma once

#include <cstdint>
#include <string>

#include "beamstab/beam_model.hpp"
#include "beamstab/control.hpp"
#include "beamstab/fem.hpp"

namespace beamstab {

// One experiment description: beam and platform parameters, mesh size, gains,
// feedback/load modes, integration window and bookkeeping.
//
// Parsed from a dotted key-value file ([section] headers with key = value
// lines, # comments) or from an equivalent JSON object. Unknown keys are
// rejected. Profiles accept a bare number (constant), "linear: v0, vl"
// (end values), "cubic: c0, c1, c2, c3" (global coefficients over [0, l]),
// "pieces: <path>.json", or an inline JSON array of pieces.
struct RunConfig {
  std::string channel = "raising";  // "raising" | "turning"
  TorqueMapParams params;

  int mesh_n = 16;

  bool gains_suggest = true;  // derive gains from the thresholds with a margin
  double margin = 2.0;
  Gains gains;  // explicit values when gains_suggest is false; k always used

  FeedbackMode feedback_mode = FeedbackMode::DiscreteConsistent;
  LoadMode load_mode = LoadMode::Consistent;

  double dt = 0.005;  // <= 0 requests the step-size default of the integrator
  double T = 50.0;
  std::string x0 = "random-unit";  // "random-unit" | "zero"
  std::uint64_t seed = 42;
  std::string out_dir = ".";

  RunConfig();

  static TorqueMapParams default_params();

  ChannelSpec make_channel() const;
  Gains resolve_gains(const ChannelSpec& ch) const;
  Mesh make_mesh() const;
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// dotted key-value rendering; parse_config_text(config_to_text(c)) recovers c
std::string config_to_text(const RunConfig& cfg);

}  // namespace beamstab
