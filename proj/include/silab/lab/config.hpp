#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "silab/potential.hpp"

namespace silab::lab {

enum class ScenarioKind { Ergodic, Localization, Metastability, PdmpVsDiffusion, Drift, Doeblin, Hitting };
enum class ProcessChoice { Diffusion, Pdmp, Both };

const char* kind_name(ScenarioKind k);
const char* process_choice_name(ProcessChoice p);

/// Raised for malformed or invalid configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::Ergodic;
  PeriodicPotential potential = PeriodicPotential::cosine();
  ProcessChoice process = ProcessChoice::Both;
  double lambda = 1.0;
  double dt = 1e-3;
  double horizon = 0.0;
  std::uint64_t replicas = 0;
  /// initial law: x0 fixed or uniform, u0 fixed, y0 fixed or a fair coin
  std::optional<double> x0;
  double u0 = 0.0;
  int y0 = 0;  // 0 = random
  std::uint64_t seed = 0;
  std::string output;

  int record_every = 100;
  std::uint64_t paths_written = 8;
  double burn_in = 0.0;

  // kind-specific knobs
  double eta = 0.0;  // 0 = use δ
  std::vector<double> M_grid{4, 8, 12, 16};
  double escape_cap = 1e3;
  std::vector<double> lambda_grid{1, 10, 100};
  double kappa = 0.05;
  std::vector<double> t_grid{50, 100, 200};
  std::vector<double> u0_grid{20, 40, 60};
  double eps = 0.15;
  double window = 0.0;  // 0 = horizon / 10
  int starts_x = 4;
  int starts_u = 4;
  double start_u_lo = -2.0;
  double start_u_hi = 2.0;
  double box_x_lo = 0.0;
  double box_x_length = 3.141592653589793;
  double box_u_lo = -4.0;
  double box_u_hi = 4.0;
  std::vector<double> theta_grid{0.1, 0.5, 1.0};

  bool runs_diffusion() const { return process != ProcessChoice::Pdmp; }
  bool runs_pdmp() const { return process != ProcessChoice::Diffusion; }
};

/// Flat `key = value` text; '#' starts a comment. Lists are comma separated,
/// harmonics are `k a b` triples separated by ';'.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_json(const std::string& text);
/// JSON when the first non-blank character is '{', key-value text otherwise.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const nlohmann::json& j);

/// Canonical echo with every default filled in.
nlohmann::json config_to_json(const ScenarioConfig& c);
/// SHA-256 of the canonical echo without the output directory.
std::string config_hash(const ScenarioConfig& c);

/// {"a0": .., "harmonics": [[k, a, b], ...]} or the key-value form
/// `a0 = ..` / `harmonics = k a b; k a b`.
PeriodicPotential potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PeriodicPotential& f);
PeriodicPotential parse_potential(const std::string& text);
PeriodicPotential load_potential(const std::string& path);

/// Human-readable list of the accepted keys, printed on usage errors.
std::string config_schema_summary();

}  // namespace silab::lab
