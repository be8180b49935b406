#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "beamstab/run_config.hpp"

using namespace beamstab;

namespace {

bool close(double a, double b, double tol = 1e-15) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("an empty config yields the documented defaults") {
  const RunConfig cfg = parse_config_text("");
  CHECK(cfg.channel == "raising");
  CHECK(cfg.mesh_n == 16);
  CHECK(cfg.gains_suggest);
  CHECK(cfg.margin == 2.0);
  CHECK(cfg.gains.k == 1.0);
  CHECK(cfg.feedback_mode == FeedbackMode::DiscreteConsistent);
  CHECK(cfg.load_mode == LoadMode::Consistent);
  CHECK(cfg.dt == 0.005);
  CHECK(cfg.T == 50.0);
  CHECK(cfg.x0 == "random-unit");
  CHECK(cfg.seed == 42);
  CHECK(close(cfg.params.g, 9.81));
  CHECK(close(cfg.params.rho(0.3), 1.0));
}

TEST_CASE("sections, comments and quoted strings parse") {
  const RunConfig cfg = parse_config_text(R"(
# experiment description
channel = "turning"   # channel selection

[beam]
l = 2.0
rho = "linear: 1, 3"
cz = "cubic: 1, 0, 0.5, 0"

[mesh]
n = 24

[sim]
dt = 0.01
T = 10
x0 = "zero"

[rng]
seed = 7
)");
  CHECK(cfg.channel == "turning");
  CHECK(cfg.params.l == 2.0);
  CHECK(close(cfg.params.rho(1.0), 2.0));  // end-value parametrization
  CHECK(close(cfg.params.cz(2.0), 1.0 + 0.5 * 4.0));
  CHECK(cfg.mesh_n == 24);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.T == 10.0);
  CHECK(cfg.x0 == "zero");
  CHECK(cfg.seed == 7);

  // dotted keys work without section headers too
  CHECK(parse_config_text("beam.l = 3.0").params.l == 3.0);
}

TEST_CASE("the JSON form is equivalent") {
  const RunConfig cfg = parse_config_text(R"({
    "channel": "turning",
    "beam": {"l": 1.5, "rho": "linear: 1, 2",
             "cz": [{"x_start": 0, "x_end": 1.5, "coeffs": [2, 0, 0, 0]}]},
    "mesh": {"n": 4},
    "gains": {"suggest": false, "alpha": 3, "beta": 2, "k": 0.5, "kappa": 2},
    "sim": {"dt": 0.02, "T": 5},
    "rng": {"seed": 12345678901234567890}
  })");
  CHECK(cfg.channel == "turning");
  CHECK(cfg.params.l == 1.5);
  CHECK(close(cfg.params.rho(1.5), 2.0));
  CHECK(close(cfg.params.cz(0.7), 2.0));
  CHECK(cfg.mesh_n == 4);
  CHECK(!cfg.gains_suggest);
  CHECK(cfg.gains.alpha == 3.0);
  CHECK(cfg.gains.k == 0.5);
  // large seeds survive verbatim (no round trip through double)
  CHECK(cfg.seed == 12345678901234567890ull);
}

TEST_CASE("piecewise profiles load from a side file") {
  const std::string path = "test_config_profile.json";
  {
    std::ofstream out(path);
    out << R"([{"x_start":0,"x_end":0.5,"coeffs":[1,1,0,0]},
               {"x_start":0.5,"x_end":1,"coeffs":[1.5,-1,0,0]}])";
  }
  const RunConfig cfg =
      parse_config_text("[beam]\nrho = \"pieces: " + path + "\"");
  CHECK(close(cfg.params.rho(0.25), 1.25));
  CHECK(close(cfg.params.rho(0.75), 1.25));
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_config_text("[beam]\nrho = \"pieces: does_not_exist.json\""),
                  std::invalid_argument);
}

TEST_CASE("malformed configs are rejected with specific errors") {
  CHECK_THROWS_AS(parse_config_text("[beam]\nfoo = 1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("mesh.n = 4\nmesh.n = 8"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("mesh.n = 4.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("channel = \"sideways\""), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("just a line"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[unclosed\nx = 1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("sim.T = 0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("sim.x0 = \"everywhere\""), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("gains.margin = 0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("gains.k = 0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("rng.seed = -3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("rng.seed = 42.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("feedback.mode = \"psychic\""),
                  std::invalid_argument);
  // explicit gains clash with the suggestion switch
  CHECK_THROWS_AS(parse_config_text("[gains]\nsuggest = true\nalpha = 5"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("{\"channel\": }"), std::invalid_argument);
}

TEST_CASE("rendering a config and parsing it back is the identity") {
  RunConfig cfg = parse_config_text(R"(
channel = "turning"
[beam]
l = 1.25
m = 0.8
rho = "linear: 1, 2"
cz = "cubic: 1, 0.1, -0.2, 0.3"
z0 = "cubic: 0, 0, 0.2, -0.1"
[platform]
phiR0 = 0.4
[gains]
suggest = false
alpha = 40
beta = 5
k = 2
kappa = 3
[feedback]
mode = "continuous-form"
load = "exact-quadrature"
[sim]
dt = 0.0025
T = 12.5
[rng]
seed = 987654321
[output]
dir = "runs/exp one"
)");

  const std::string text = config_to_text(cfg);
  const RunConfig back = parse_config_text(text);

  CHECK(back.channel == cfg.channel);
  CHECK(back.params.l == cfg.params.l);
  CHECK(back.params.m == cfg.params.m);
  CHECK(back.params.phiR0 == cfg.params.phiR0);
  for (double x : {0.0, 0.37, 1.0, 1.25}) {
    CHECK(back.params.rho(x) == cfg.params.rho(x));
    CHECK(back.params.cz(x) == cfg.params.cz(x));
    CHECK(back.params.z0(x) == cfg.params.z0(x));
  }
  CHECK(back.mesh_n == cfg.mesh_n);
  CHECK(back.gains_suggest == cfg.gains_suggest);
  CHECK(back.gains.alpha == cfg.gains.alpha);
  CHECK(back.gains.beta == cfg.gains.beta);
  CHECK(back.gains.kappa == cfg.gains.kappa);
  CHECK(back.gains.k == cfg.gains.k);
  CHECK(back.feedback_mode == cfg.feedback_mode);
  CHECK(back.load_mode == cfg.load_mode);
  CHECK(back.dt == cfg.dt);
  CHECK(back.T == cfg.T);
  CHECK(back.seed == cfg.seed);
  CHECK(back.out_dir == cfg.out_dir);

  // and the rendering is a fixed point
  CHECK(config_to_text(back) == text);
}

TEST_CASE("multi-interval profiles round trip through the rendering") {
  const std::string src = R"([beam]
rho = [{"x_start":0,"x_end":0.5,"coeffs":[1,1,0,0]},{"x_start":0.5,"x_end":1,"coeffs":[1.5,-1,0,0]}]
)";
  const RunConfig cfg = parse_config_text(src);
  const RunConfig back = parse_config_text(config_to_text(cfg));
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0})
    CHECK(back.params.rho(x) == cfg.params.rho(x));
}

TEST_CASE("gains resolution honors the suggestion switch") {
  RunConfig cfg = parse_config_text("gains.margin = 3");
  const ChannelSpec ch = cfg.make_channel();
  const Gains g = cfg.resolve_gains(ch);
  CHECK(close(g.kappa * g.kappa, 3.0 * certificate(ch, g).kappa_lower_sq));

  RunConfig fixed = parse_config_text(
      "[gains]\nsuggest = false\nalpha = 2\nbeta = 3\nk = 1\nkappa = 2");
  const Gains gf = fixed.resolve_gains(ch);
  CHECK(gf.alpha == 2.0);
  CHECK(gf.beta == 3.0);
}
