#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "silab/lab/config.hpp"

namespace silab::lab {

inline constexpr const char* kToolName = "silab";
inline constexpr const char* kToolVersion = "0.1.0";

/// Failure while executing or persisting a scenario (exit code 1 territory).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a scenario produces before it touches the disk.
struct ScenarioOutput {
  std::map<std::string, std::string> files;  // name -> content, estimates.json excluded
  nlohmann::json estimates = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::uint64_t tasks = 0;
  std::vector<std::string> failures;  // "replica i: message"
};

/// Runs the scenario in memory. Aggregation is an ordered fold over replica
/// indices, so the result does not depend on `workers`.
ScenarioOutput execute_scenario(const ScenarioConfig& config, int workers);

struct RunOptions {
  std::string out_dir;  // empty: config.output
  int workers = 0;      // 0: default_workers()
};

/// Executes and writes trajectory_<i>.csv, events_<i>.csv, plotdata_<name>.csv,
/// estimates.json and manifest.json. A nonempty directory is only reused when
/// its manifest carries the same config hash. Throws RunError when more than
/// 1% of the replicas fail (the manifest is still written, status "failed").
nlohmann::json run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct ReplayReport {
  nlohmann::json manifest;
  std::vector<std::string> mismatches;  // files whose hash differs or that are missing
  bool identical() const { return mismatches.empty(); }
};

/// Re-runs the configuration stored in a manifest into `out_dir` and compares
/// the content hash of every inventoried file.
ReplayReport replay(const std::string& manifest_path, const std::string& out_dir, int workers = 0);

/// name -> sha256 of the manifest's file inventory.
std::map<std::string, std::string> inventory_hashes(const nlohmann::json& manifest);

}  // namespace silab::lab
