#include "beamstab/run_config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace beamstab {

namespace {

struct RawValue {
  enum class Kind { Number, String, Bool, Json };
  Kind kind = Kind::String;
  std::string text;  // original token (numbers keep full precision here)
  double num = 0.0;
  bool flag = false;
};

using RawMap = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool try_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void insert_value(RawMap& kv, const std::string& key, RawValue v) {
  if (!kv.emplace(key, std::move(v)).second) fail("duplicate key '" + key + "'");
}

void parse_dotted_text(const std::string& text, RawMap& kv) {
  std::istringstream in(text);
  std::string line;
  std::string prefix;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside quotes
    bool quoted = false;
    std::string bare;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      if (ch == '#' && !quoted) break;
      bare += ch;
    }
    bare = trim(bare);
    if (bare.empty()) continue;

    if (bare.front() == '[') {
      if (bare.back() != ']') fail("malformed section header at line " +
                                   std::to_string(lineno));
      prefix = trim(bare.substr(1, bare.size() - 2));
      if (prefix.empty()) fail("empty section name at line " + std::to_string(lineno));
      prefix += '.';
      continue;
    }

    const auto eq = bare.find('=');
    if (eq == std::string::npos)
      fail("expected key = value at line " + std::to_string(lineno));
    std::string key = trim(bare.substr(0, eq));
    std::string val = trim(bare.substr(eq + 1));
    if (key.empty() || val.empty())
      fail("empty key or value at line " + std::to_string(lineno));
    key = prefix + key;

    RawValue rv;
    rv.text = val;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        fail("unterminated string at line " + std::to_string(lineno));
      rv.kind = RawValue::Kind::String;
      rv.text = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      rv.kind = RawValue::Kind::Bool;
      rv.flag = val == "true";
    } else if (val.front() == '[' || val.front() == '{') {
      rv.kind = RawValue::Kind::Json;
    } else if (double num; try_number(val, num)) {
      rv.kind = RawValue::Kind::Number;
      rv.num = num;
    } else {
      rv.kind = RawValue::Kind::String;
    }
    insert_value(kv, key, std::move(rv));
  }
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, RawMap& kv) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_json(it.value(), key, kv);
    }
    return;
  }
  RawValue rv;
  rv.text = j.dump();
  if (j.is_number()) {
    rv.kind = RawValue::Kind::Number;
    rv.num = j.get<double>();
  } else if (j.is_boolean()) {
    rv.kind = RawValue::Kind::Bool;
    rv.flag = j.get<bool>();
  } else if (j.is_string()) {
    rv.kind = RawValue::Kind::String;
    rv.text = j.get<std::string>();
  } else if (j.is_array()) {
    rv.kind = RawValue::Kind::Json;
  } else {
    fail("unsupported JSON value for key '" + prefix + "'");
  }
  insert_value(kv, prefix, std::move(rv));
}

std::optional<RawValue> take(RawMap& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  RawValue v = std::move(it->second);
  kv.erase(it);
  return v;
}

double take_number(RawMap& kv, const std::string& key, double fallback) {
  auto v = take(kv, key);
  if (!v) return fallback;
  if (v->kind != RawValue::Kind::Number) fail("key '" + key + "' must be a number");
  return v->num;
}

bool take_bool(RawMap& kv, const std::string& key, bool fallback) {
  auto v = take(kv, key);
  if (!v) return fallback;
  if (v->kind != RawValue::Kind::Bool) fail("key '" + key + "' must be true or false");
  return v->flag;
}

std::string take_string(RawMap& kv, const std::string& key, const std::string& fallback) {
  auto v = take(kv, key);
  if (!v) return fallback;
  if (v->kind != RawValue::Kind::String) fail("key '" + key + "' must be a string");
  return v->text;
}

std::uint64_t take_seed(RawMap& kv, const std::string& key, std::uint64_t fallback) {
  auto v = take(kv, key);
  if (!v) return fallback;
  if (v->kind != RawValue::Kind::Number) fail("key '" + key + "' must be an integer");
  try {
    if (!v->text.empty() && v->text.front() == '-') throw std::invalid_argument("negative");
    std::size_t pos = 0;
    const unsigned long long r = std::stoull(v->text, &pos);
    if (pos != v->text.size()) throw std::invalid_argument("trailing characters");
    return r;
  } catch (const std::exception&) {
    fail("key '" + key + "' is not a valid unsigned integer");
  }
}

std::vector<double> split_numbers(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    double v;
    if (!try_number(trim(item), v))
      fail("key '" + key + "': expected comma-separated numbers");
    out.push_back(v);
  }
  return out;
}

Profile parse_profile(const RawValue& v, double l, const std::string& key) {
  if (v.kind == RawValue::Kind::Number) return Profile::constant(v.num, l);
  if (v.kind == RawValue::Kind::Json) return profile_from_json(v.text);
  if (v.kind != RawValue::Kind::String) fail("key '" + key + "' is not a profile");

  const auto colon = v.text.find(':');
  if (colon == std::string::npos) {
    double num;
    if (try_number(trim(v.text), num)) return Profile::constant(num, l);
    fail("key '" + key + "': unrecognized profile value '" + v.text + "'");
  }
  const std::string tag = trim(v.text.substr(0, colon));
  const std::string rest = trim(v.text.substr(colon + 1));
  if (tag == "linear") {
    const auto vals = split_numbers(rest, key);
    if (vals.size() != 2) fail("key '" + key + "': linear wants two end values");
    return Profile::linear(vals[0], vals[1], l);
  }
  if (tag == "cubic") {
    const auto vals = split_numbers(rest, key);
    if (vals.size() != 4) fail("key '" + key + "': cubic wants four coefficients");
    return Profile::cubic({vals[0], vals[1], vals[2], vals[3]}, l);
  }
  if (tag == "pieces") {
    std::ifstream in(rest);
    if (!in) fail("key '" + key + "': cannot open profile file '" + rest + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return profile_from_json(buf.str());
  }
  fail("key '" + key + "': unknown profile form '" + tag + "'");
}

Profile take_profile(RawMap& kv, const std::string& key, double l,
                     const Profile& fallback) {
  auto v = take(kv, key);
  if (!v) return fallback;
  return parse_profile(*v, l, key);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string profile_value(const Profile& p) {
  if (p.intervals() == 1) {
    const auto& c = p.interval_coeffs(0);
    if (c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) return fmt(c[0]);
    if (c[2] == 0.0 && c[3] == 0.0)
      return "\"linear: " + fmt(c[0]) + ", " + fmt(c[0] + c[1] * p.length()) + "\"";
    return "\"cubic: " + fmt(c[0]) + ", " + fmt(c[1]) + ", " + fmt(c[2]) + ", " +
           fmt(c[3]) + "\"";
  }
  // compact form: the dotted format is line oriented
  return nlohmann::json::parse(profile_to_json(p)).dump();
}

RunConfig build(RawMap kv) {
  RunConfig cfg;
  cfg.channel = take_string(kv, "channel", cfg.channel);

  const double l = take_number(kv, "beam.l", cfg.params.l);
  const double m = take_number(kv, "beam.m", cfg.params.m);
  const Profile rho = take_profile(kv, "beam.rho", l, Profile::constant(1.0, l));
  const Profile cz = take_profile(kv, "beam.cz", l, Profile::constant(1.0, l));
  const Profile cy = take_profile(kv, "beam.cy", l, Profile::constant(1.0, l));
  const Profile z0 = take_profile(kv, "beam.z0", l, Profile::zero(l));

  const double I0 = take_number(kv, "platform.I0", cfg.params.I0);
  const double I1 = take_number(kv, "platform.I1", cfg.params.I1);
  const double I2 = take_number(kv, "platform.I2", cfg.params.I2);
  const double I3 = take_number(kv, "platform.I3", cfg.params.I3);
  const double J1 = take_number(kv, "platform.J1", cfg.params.J1);
  const double J2 = take_number(kv, "platform.J2", cfg.params.J2);
  const double J3 = take_number(kv, "platform.J3", cfg.params.J3);
  const double m0 = take_number(kv, "platform.m0", cfg.params.m0);
  const double d = take_number(kv, "platform.d", cfg.params.d);
  const double R = take_number(kv, "platform.R", cfg.params.R);
  const double g = take_number(kv, "platform.g", cfg.params.g);
  const double phiR0 = take_number(kv, "platform.phiR0", cfg.params.phiR0);

  cfg.params = TorqueMapParams(I0, I1, I2, I3, J1, J2, J3, m0, d, R, g, phiR0, l, m,
                               rho, cz, cy, z0);

  const double n = take_number(kv, "mesh.n", cfg.mesh_n);
  if (n < 1.0 || n != std::floor(n)) fail("mesh.n must be a positive integer");
  cfg.mesh_n = static_cast<int>(n);

  cfg.gains_suggest = take_bool(kv, "gains.suggest", cfg.gains_suggest);
  cfg.margin = take_number(kv, "gains.margin", cfg.margin);
  cfg.gains.k = take_number(kv, "gains.k", cfg.gains.k);
  const bool has_explicit = kv.count("gains.alpha") || kv.count("gains.beta") ||
                            kv.count("gains.kappa");
  if (cfg.gains_suggest && has_explicit)
    fail("gains.alpha/beta/kappa conflict with gains.suggest = true");
  cfg.gains.alpha = take_number(kv, "gains.alpha", cfg.gains.alpha);
  cfg.gains.beta = take_number(kv, "gains.beta", cfg.gains.beta);
  cfg.gains.kappa = take_number(kv, "gains.kappa", cfg.gains.kappa);

  const std::string mode = take_string(kv, "feedback.mode", "discrete-consistent");
  if (mode == "discrete-consistent")
    cfg.feedback_mode = FeedbackMode::DiscreteConsistent;
  else if (mode == "continuous-form")
    cfg.feedback_mode = FeedbackMode::ContinuousForm;
  else
    fail("feedback.mode must be discrete-consistent or continuous-form");

  const std::string load = take_string(kv, "feedback.load", "consistent");
  if (load == "consistent")
    cfg.load_mode = LoadMode::Consistent;
  else if (load == "exact-quadrature")
    cfg.load_mode = LoadMode::ExactQuadrature;
  else
    fail("feedback.load must be consistent or exact-quadrature");

  cfg.dt = take_number(kv, "sim.dt", cfg.dt);
  cfg.T = take_number(kv, "sim.T", cfg.T);
  cfg.x0 = take_string(kv, "sim.x0", cfg.x0);
  cfg.seed = take_seed(kv, "rng.seed", cfg.seed);
  cfg.out_dir = take_string(kv, "output.dir", cfg.out_dir);

  if (!kv.empty()) fail("unknown key '" + kv.begin()->first + "'");
  cfg.validate();
  return cfg;
}

}  // namespace

TorqueMapParams RunConfig::default_params() {
  const double l = 1.0;
  return TorqueMapParams(1.0, 1.0, 1.0, 1.0,            // I0..I3
                         0.5, 1.0, 1.0,                 // J1..J3
                         0.5, 0.1, 0.5,                 // m0, d, R
                         9.81, std::numbers::pi / 6.0,  // g, phiR0
                         l, 1.0,                        // l, m
                         Profile::constant(1.0, l), Profile::constant(1.0, l),
                         Profile::constant(1.0, l), Profile::zero(l));
}

RunConfig::RunConfig() : params(default_params()) {}

ChannelSpec RunConfig::make_channel() const {
  if (channel == "raising") return make_r_channel(params);
  if (channel == "turning") return make_t_channel(params);
  throw std::invalid_argument("config: channel must be raising or turning");
}

Gains RunConfig::resolve_gains(const ChannelSpec& ch) const {
  if (gains_suggest) return suggest_gains(ch, margin, gains.k);
  Gains g = gains;
  g.validate();
  return g;
}

Mesh RunConfig::make_mesh() const { return Mesh::uniform(mesh_n, params.l); }

void RunConfig::validate() const {
  if (channel != "raising" && channel != "turning")
    throw std::invalid_argument("config: channel must be raising or turning");
  if (mesh_n < 1) throw std::invalid_argument("config: mesh.n must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("config: sim.T must be positive");
  if (x0 != "random-unit" && x0 != "zero")
    throw std::invalid_argument("config: sim.x0 must be random-unit or zero");
  if (gains_suggest && !(margin > 1.0))
    throw std::invalid_argument("config: gains.margin must exceed 1");
  if (!(gains.k > 0.0))
    throw std::invalid_argument("config: gains.k must be positive");
  if (!gains_suggest) gains.validate();
}

RunConfig parse_config_text(const std::string& text) {
  RawMap kv;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("JSON parse error: ") + e.what());
    }
    flatten_json(j, "", kv);
  } else {
    parse_dotted_text(text, kv);
  }
  return build(std::move(kv));
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "channel = \"" << cfg.channel << "\"\n\n";
  out << "[beam]\n";
  out << "l = " << fmt(cfg.params.l) << "\n";
  out << "m = " << fmt(cfg.params.m) << "\n";
  out << "rho = " << profile_value(cfg.params.rho) << "\n";
  out << "cz = " << profile_value(cfg.params.cz) << "\n";
  out << "cy = " << profile_value(cfg.params.cy) << "\n";
  out << "z0 = " << profile_value(cfg.params.z0) << "\n\n";
  out << "[platform]\n";
  out << "I0 = " << fmt(cfg.params.I0) << "\n";
  out << "I1 = " << fmt(cfg.params.I1) << "\n";
  out << "I2 = " << fmt(cfg.params.I2) << "\n";
  out << "I3 = " << fmt(cfg.params.I3) << "\n";
  out << "J1 = " << fmt(cfg.params.J1) << "\n";
  out << "J2 = " << fmt(cfg.params.J2) << "\n";
  out << "J3 = " << fmt(cfg.params.J3) << "\n";
  out << "m0 = " << fmt(cfg.params.m0) << "\n";
  out << "d = " << fmt(cfg.params.d) << "\n";
  out << "R = " << fmt(cfg.params.R) << "\n";
  out << "g = " << fmt(cfg.params.g) << "\n";
  out << "phiR0 = " << fmt(cfg.params.phiR0) << "\n\n";
  out << "[mesh]\n";
  out << "n = " << cfg.mesh_n << "\n\n";
  out << "[gains]\n";
  out << "suggest = " << (cfg.gains_suggest ? "true" : "false") << "\n";
  out << "margin = " << fmt(cfg.margin) << "\n";
  out << "k = " << fmt(cfg.gains.k) << "\n";
  if (!cfg.gains_suggest) {
    out << "alpha = " << fmt(cfg.gains.alpha) << "\n";
    out << "beta = " << fmt(cfg.gains.beta) << "\n";
    out << "kappa = " << fmt(cfg.gains.kappa) << "\n";
  }
  out << "\n[feedback]\n";
  out << "mode = \""
      << (cfg.feedback_mode == FeedbackMode::DiscreteConsistent ? "discrete-consistent"
                                                                : "continuous-form")
      << "\"\n";
  out << "load = \""
      << (cfg.load_mode == LoadMode::Consistent ? "consistent" : "exact-quadrature")
      << "\"\n\n";
  out << "[sim]\n";
  out << "dt = " << fmt(cfg.dt) << "\n";
  out << "T = " << fmt(cfg.T) << "\n";
  out << "x0 = \"" << cfg.x0 << "\"\n\n";
  out << "[rng]\n";
  out << "seed = " << cfg.seed << "\n\n";
  out << "[output]\n";
  out << "dir = \"" << cfg.out_dir << "\"\n";
  return out.str();
}

}  // namespace beamstab
