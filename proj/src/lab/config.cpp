#include "silab/lab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "silab/lab/io.hpp"

namespace silab::lab {

using nlohmann::json;

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Ergodic: return "ergodic";
    case ScenarioKind::Localization: return "localization";
    case ScenarioKind::Metastability: return "metastability";
    case ScenarioKind::PdmpVsDiffusion: return "pdmp-vs-diffusion";
    case ScenarioKind::Drift: return "drift";
    case ScenarioKind::Doeblin: return "doeblin";
    case ScenarioKind::Hitting: return "hitting";
  }
  return "?";
}

const char* process_choice_name(ProcessChoice p) {
  switch (p) {
    case ProcessChoice::Diffusion: return "diffusion";
    case ProcessChoice::Pdmp: return "pdmp";
    case ProcessChoice::Both: return "both";
  }
  return "?";
}

namespace {

enum class Type { String, Number, Count, Integer, NumberList, Harmonics, XInit, YInit };

struct Field {
  const char* key;
  Type type;
  const char* help;
};

// clang-format off
constexpr Field kFields[] = {
    {"name", Type::String, "label used in file names (default scenario)"},
    {"kind", Type::String, "ergodic | localization | metastability | pdmp-vs-diffusion | drift | doeblin | hitting (required)"},
    {"potential", Type::String, "object {a0, harmonics: [[k, a, b], ...]}; key-value form potential.a0 / potential.harmonics"},
    {"process", Type::String, "diffusion | pdmp | both (default both)"},
    {"lambda", Type::Number, "constant jump rate of the PDMP, > 0 (default 1)"},
    {"dt", Type::Number, "Euler step of the diffusion, > 0 (default 1e-3)"},
    {"horizon", Type::Number, "simulated time per replica, > 0 (required)"},
    {"replicas", Type::Count, "replicas (or trials per grid point), >= 1 (required)"},
    {"x0", Type::XInit, "initial position or \"uniform\" (default uniform)"},
    {"u0", Type::Number, "initial u (default 0)"},
    {"y0", Type::YInit, "initial velocity 1, -1 or \"random\" (default random)"},
    {"seed", Type::Count, "root seed (default 0)"},
    {"output", Type::String, "output directory (the CLI --out flag overrides)"},
    {"record_every", Type::Integer, "diffusion recording stride in steps (default 100)"},
    {"paths_written", Type::Count, "replicas whose trajectory / event files are written (default 8)"},
    {"burn_in", Type::Number, "time discarded before occupation histograms (default 0)"},
    {"eta", Type::Number, "level eta for escape and hitting, 0 means delta (default 0)"},
    {"M_grid", Type::NumberList, "frozen levels M for metastability (default 4, 8, 12, 16)"},
    {"escape_cap", Type::Number, "time cap of one escape trial (default 1000)"},
    {"lambda_grid", Type::NumberList, "jump rates compared with the diffusion (default 1, 10, 100)"},
    {"kappa", Type::Number, "exponent of the drift check (default 0.05)"},
    {"t_grid", Type::NumberList, "times scanned by the drift check (default 50, 100, 200)"},
    {"u0_grid", Type::NumberList, "initial u values of the drift check (default 20, 40, 60)"},
    {"eps", Type::Number, "convergence radius around a trap (default 0.15)"},
    {"window", Type::Number, "trailing window of the convergence test, 0 means horizon / 10"},
    {"starts_x", Type::Integer, "Doeblin start grid size along x (default 4)"},
    {"starts_u", Type::Integer, "Doeblin start grid size along u (default 4)"},
    {"start_u_lo", Type::Number, "Doeblin start grid lower u (default -2)"},
    {"start_u_hi", Type::Number, "Doeblin start grid upper u (default 2)"},
    {"box_x_lo", Type::Number, "Doeblin target arc start (default 0)"},
    {"box_x_length", Type::Number, "Doeblin target arc length (default pi)"},
    {"box_u_lo", Type::Number, "Doeblin target lower u (default -4)"},
    {"box_u_hi", Type::Number, "Doeblin target upper u (default 4)"},
    {"theta_grid", Type::NumberList, "exponents for the hitting-time moment scan (default 0.1, 0.5, 1)"},
};
// clang-format on

const Field* find_field(const std::string& key) {
  for (const auto& f : kFields)
    if (key == f.key) return &f;
  return nullptr;
}

std::string trim(const std::string& s) {
  auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return b < e ? std::string(b, e) : std::string();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

json parse_scalar(const std::string& key, Type type, const std::string& text) {
  switch (type) {
    case Type::String: return text;
    case Type::Number: return parse_number(key, text);
    case Type::Count: {
      std::uint64_t v = 0;
      const char* end = text.data() + text.size();
      auto res = std::from_chars(text.data(), end, v);
      if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
      return v;
    }
    case Type::Integer: {
      long long v = 0;
      const char* end = text.data() + text.size();
      auto res = std::from_chars(text.data(), end, v);
      if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw ConfigError(key, "expected an integer, got '" + text + "'");
      return v;
    }
    case Type::NumberList: {
      json arr = json::array();
      for (const auto& item : split(text, ',')) arr.push_back(parse_number(key, item));
      return arr;
    }
    case Type::Harmonics: {
      json arr = json::array();
      for (const auto& item : split(text, ';')) {
        if (item.empty()) continue;
        std::istringstream in(item);
        std::string a, b, c, extra;
        if (!(in >> a >> b >> c) || (in >> extra)) throw ConfigError(key, "each harmonic is 'k a b', got '" + item + "'");
        arr.push_back({parse_number(key, a), parse_number(key, b), parse_number(key, c)});
      }
      return arr;
    }
    case Type::XInit:
      if (text == "uniform") return text;
      return parse_number(key, text);
    case Type::YInit:
      if (text == "random") return text;
      return parse_number(key, text);
  }
  return nullptr;
}

// `key = value` lines into a JSON object; `handle(key, value, line)` places them.
template <class Handle>
void scan_key_values(const std::string& text, Handle&& handle) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value', got '" + line + "'");
    handle(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

std::uint64_t get_count(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(key, "expected a nonnegative integer");
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_list(const json& j, const char* key, const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a nonempty list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key, "expected a nonempty list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

PeriodicPotential potential_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("potential", "expected an object {a0, harmonics}");
  for (const auto& [k, v] : j.items())
    if (k != "a0" && k != "harmonics") throw ConfigError("potential." + k, "unknown key");
  double a0 = 0.0;
  if (j.contains("a0")) {
    if (!j["a0"].is_number()) throw ConfigError("potential.a0", "expected a number");
    a0 = j["a0"].get<double>();
  }
  if (!j.contains("harmonics") || !j["harmonics"].is_array())
    throw ConfigError("potential.harmonics", "expected a list of [k, a, b]");
  std::vector<Harmonic> hs;
  for (const auto& h : j["harmonics"]) {
    if (!h.is_array() || h.size() != 3 || !h[0].is_number() || !h[1].is_number() || !h[2].is_number())
      throw ConfigError("potential.harmonics", "each harmonic is [k, a, b]");
    const double k = h[0].get<double>();
    if (k != std::floor(k) || k < 1.0) throw ConfigError("potential.harmonics", "k must be a positive integer");
    hs.push_back({static_cast<int>(k), h[1].get<double>(), h[2].get<double>()});
  }
  try {
    return PeriodicPotential(a0, hs);
  } catch (const PotentialError& e) {
    throw ConfigError("potential", e.what());
  }
}

json potential_to_json(const PeriodicPotential& f) {
  json hs = json::array();
  for (const auto& h : f.harmonics()) hs.push_back({h.k, h.a, h.b});
  return {{"a0", f.a0()}, {"harmonics", hs}};
}

PeriodicPotential parse_potential(const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    json j;
    try {
      j = json::parse(t);
    } catch (const json::parse_error& e) {
      throw ConfigError("potential", std::string("invalid JSON: ") + e.what());
    }
    return potential_from_json(j);
  }
  json j = json::object();
  scan_key_values(text, [&](const std::string& key, const std::string& value) {
    if (key == "a0") j["a0"] = parse_number("potential.a0", value);
    else if (key == "harmonics") j["harmonics"] = parse_scalar("potential.harmonics", Type::Harmonics, value);
    else throw ConfigError("potential." + key, "unknown key");
  });
  return potential_from_json(j);
}

PeriodicPotential load_potential(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError("potential", e.what());
  }
  return parse_potential(text);
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  for (const auto& [k, v] : j.items())
    if (!find_field(k)) throw ConfigError(k, "unknown key");

  ScenarioConfig c;
  c.name = get_string(j, "name", c.name);
  require(!c.name.empty() && c.name.find('/') == std::string::npos, "name", "must be a nonempty plain label");

  if (!j.contains("kind")) throw ConfigError("kind", "missing required field");
  const std::string kind = get_string(j, "kind", "");
  bool known = false;
  for (auto k : {ScenarioKind::Ergodic, ScenarioKind::Localization, ScenarioKind::Metastability,
                 ScenarioKind::PdmpVsDiffusion, ScenarioKind::Drift, ScenarioKind::Doeblin, ScenarioKind::Hitting})
    if (kind == kind_name(k)) {
      c.kind = k;
      known = true;
    }
  require(known, "kind", "unknown scenario kind '" + kind + "'");

  if (j.contains("potential")) c.potential = potential_from_json(j["potential"]);
  const std::string process = get_string(j, "process", "both");
  if (process == "diffusion") c.process = ProcessChoice::Diffusion;
  else if (process == "pdmp") c.process = ProcessChoice::Pdmp;
  else if (process == "both") c.process = ProcessChoice::Both;
  else throw ConfigError("process", "expected diffusion, pdmp or both");

  c.lambda = get_number(j, "lambda", c.lambda);
  c.dt = get_number(j, "dt", c.dt);
  if (!j.contains("horizon")) throw ConfigError("horizon", "missing required field");
  c.horizon = get_number(j, "horizon", 0.0);
  if (!j.contains("replicas")) throw ConfigError("replicas", "missing required field");
  c.replicas = get_count(j, "replicas", 0);

  if (j.contains("x0")) {
    const json& v = j["x0"];
    if (v.is_string() && v.get<std::string>() == "uniform") c.x0.reset();
    else if (v.is_number()) c.x0 = v.get<double>();
    else throw ConfigError("x0", "expected a number or \"uniform\"");
  }
  c.u0 = get_number(j, "u0", c.u0);
  if (j.contains("y0")) {
    const json& v = j["y0"];
    if (v.is_string() && v.get<std::string>() == "random") c.y0 = 0;
    else if (v.is_number() && (v.get<double>() == 1.0 || v.get<double>() == -1.0)) c.y0 = static_cast<int>(v.get<double>());
    else throw ConfigError("y0", "expected 1, -1 or \"random\"");
  }
  c.seed = get_count(j, "seed", c.seed);
  c.output = get_string(j, "output", c.output);
  c.record_every = get_int(j, "record_every", c.record_every);
  c.paths_written = get_count(j, "paths_written", c.paths_written);
  c.burn_in = get_number(j, "burn_in", c.burn_in);
  c.eta = get_number(j, "eta", c.eta);
  c.M_grid = get_list(j, "M_grid", c.M_grid);
  c.escape_cap = get_number(j, "escape_cap", c.escape_cap);
  c.lambda_grid = get_list(j, "lambda_grid", c.lambda_grid);
  c.kappa = get_number(j, "kappa", c.kappa);
  c.t_grid = get_list(j, "t_grid", c.t_grid);
  c.u0_grid = get_list(j, "u0_grid", c.u0_grid);
  c.eps = get_number(j, "eps", c.eps);
  c.window = get_number(j, "window", c.window);
  c.starts_x = get_int(j, "starts_x", c.starts_x);
  c.starts_u = get_int(j, "starts_u", c.starts_u);
  c.start_u_lo = get_number(j, "start_u_lo", c.start_u_lo);
  c.start_u_hi = get_number(j, "start_u_hi", c.start_u_hi);
  c.box_x_lo = get_number(j, "box_x_lo", c.box_x_lo);
  c.box_x_length = get_number(j, "box_x_length", c.box_x_length);
  c.box_u_lo = get_number(j, "box_u_lo", c.box_u_lo);
  c.box_u_hi = get_number(j, "box_u_hi", c.box_u_hi);
  c.theta_grid = get_list(j, "theta_grid", c.theta_grid);

  require(c.replicas >= 1, "replicas", "must be >= 1");
  require(c.horizon > 0.0, "horizon", "must be > 0");
  if (c.runs_diffusion()) require(c.dt > 0.0 && c.dt <= c.horizon, "dt", "must satisfy 0 < dt <= horizon");
  if (c.runs_pdmp()) require(c.lambda > 0.0, "lambda", "must be > 0");
  require(c.record_every >= 1, "record_every", "must be >= 1");
  require(c.burn_in >= 0.0 && c.burn_in < c.horizon, "burn_in", "must lie in [0, horizon)");
  require(c.eta >= 0.0, "eta", "must be >= 0");
  require(c.escape_cap > 0.0, "escape_cap", "must be > 0");
  require(std::all_of(c.M_grid.begin(), c.M_grid.end(), [](double m) { return m >= 0.0; }), "M_grid", "entries must be >= 0");
  require(std::all_of(c.lambda_grid.begin(), c.lambda_grid.end(), [](double l) { return l > 0.0; }), "lambda_grid",
          "entries must be > 0");
  require(c.kappa > 0.0, "kappa", "must be > 0");
  require(std::all_of(c.t_grid.begin(), c.t_grid.end(), [](double t) { return t > 0.0; }), "t_grid", "entries must be > 0");
  require(c.eps > 0.0, "eps", "must be > 0");
  require(c.window >= 0.0 && c.window <= c.horizon, "window", "must lie in [0, horizon]");
  require(c.starts_x >= 1 && c.starts_u >= 1, "starts_x", "start grid sizes must be >= 1");
  require(c.start_u_lo <= c.start_u_hi, "start_u_lo", "must not exceed start_u_hi");
  require(c.box_x_length > 0.0 && c.box_u_hi > c.box_u_lo, "box_x_length", "target box must have positive volume");
  return c;
}

ScenarioConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

ScenarioConfig parse_config_text(const std::string& text) {
  json j = json::object();
  scan_key_values(text, [&](const std::string& key, const std::string& value) {
    if (key == "potential.a0") {
      j["potential"]["a0"] = parse_number(key, value);
      return;
    }
    if (key == "potential.harmonics") {
      j["potential"]["harmonics"] = parse_scalar(key, Type::Harmonics, value);
      return;
    }
    const Field* f = find_field(key);
    if (!f || key == "potential") throw ConfigError(key, "unknown key");
    if (j.contains(key)) throw ConfigError(key, "given twice");
    j[key] = parse_scalar(key, f->type, value);
  });
  return config_from_json(j);
}

ScenarioConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

ScenarioConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = kind_name(c.kind);
  j["potential"] = potential_to_json(c.potential);
  j["process"] = process_choice_name(c.process);
  j["lambda"] = c.lambda;
  j["dt"] = c.dt;
  j["horizon"] = c.horizon;
  j["replicas"] = c.replicas;
  j["x0"] = c.x0 ? json(*c.x0) : json("uniform");
  j["u0"] = c.u0;
  j["y0"] = c.y0 == 0 ? json("random") : json(c.y0);
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["record_every"] = c.record_every;
  j["paths_written"] = c.paths_written;
  j["burn_in"] = c.burn_in;
  j["eta"] = c.eta;
  j["M_grid"] = c.M_grid;
  j["escape_cap"] = c.escape_cap;
  j["lambda_grid"] = c.lambda_grid;
  j["kappa"] = c.kappa;
  j["t_grid"] = c.t_grid;
  j["u0_grid"] = c.u0_grid;
  j["eps"] = c.eps;
  j["window"] = c.window;
  j["starts_x"] = c.starts_x;
  j["starts_u"] = c.starts_u;
  j["start_u_lo"] = c.start_u_lo;
  j["start_u_hi"] = c.start_u_hi;
  j["box_x_lo"] = c.box_x_lo;
  j["box_x_length"] = c.box_x_length;
  j["box_u_lo"] = c.box_u_lo;
  j["box_u_hi"] = c.box_u_hi;
  j["theta_grid"] = c.theta_grid;
  return j;
}

std::string config_hash(const ScenarioConfig& c) {
  json j = config_to_json(c);
  j.erase("output");
  return sha256_hex(j.dump());
}

std::string config_schema_summary() {
  std::string out = "scenario keys (key = value text, or the same keys in a JSON object):\n";
  for (const auto& f : kFields) {
    out += "  ";
    out += f.key;
    out += std::string(std::max<std::size_t>(1, 16 - std::string(f.key).size()), ' ');
    out += f.help;
    out += '\n';
  }
  return out;
}

}  // namespace silab::lab
