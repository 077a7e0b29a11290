#include "silab/lab/runner.hpp"

#include <chrono>
#include <filesystem>

#include "silab/lab/io.hpp"
#include "silab/parallel.hpp"

namespace silab::lab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kFailureMessagesKept = 100;

void check_output_dir(const fs::path& dir, const std::string& hash) {
  if (!fs::exists(dir)) return;
  if (!fs::is_directory(dir)) throw RunError("output path " + dir.string() + " is not a directory");
  if (fs::is_empty(dir)) return;
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest))
    throw RunError("refusing to write into nonempty directory " + dir.string() + " without a manifest");
  json previous;
  try {
    previous = json::parse(read_file(manifest.string()));
  } catch (const std::exception& e) {
    throw RunError("unreadable manifest in " + dir.string() + ": " + e.what());
  }
  if (previous.value("config_hash", "") != hash)
    throw RunError("refusing to write into " + dir.string() + ": it holds a run with a different config hash");
}

}  // namespace

json run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const std::string out = options.out_dir.empty() ? config.output : options.out_dir;
  if (out.empty()) throw RunError("no output directory given");
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const std::string hash = config_hash(config);
  const fs::path dir(out);
  check_output_dir(dir, hash);
  fs::create_directories(dir);

  const auto start = std::chrono::steady_clock::now();
  ScenarioOutput result = execute_scenario(config, workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  result.estimates["config_hash"] = hash;
  result.files["estimates.json"] = result.estimates.dump(2) + "\n";

  json inventory = json::array();
  for (const auto& [name, content] : result.files) {
    write_file((dir / name).string(), content);
    inventory.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  const std::uint64_t failed = result.failures.size();
  const bool ok = failed * 100 <= result.tasks;
  json messages = json::array();
  for (std::size_t i = 0; i < std::min(kFailureMessagesKept, result.failures.size()); ++i)
    messages.push_back(result.failures[i]);

  json manifest = {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"config", config_to_json(config)},
      {"config_hash", hash},
      {"seeds", result.seeds},
      {"workers", workers},
      {"wall_clock_seconds", wall},
      {"failures", {{"count", failed}, {"tasks", result.tasks}, {"messages", messages}}},
      {"files", inventory},
      {"status", ok ? "ok" : "failed"},
  };
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  if (!ok)
    throw RunError(std::to_string(failed) + " of " + std::to_string(result.tasks) +
                   " replica tasks failed; first: " + result.failures.front());
  return manifest;
}

std::map<std::string, std::string> inventory_hashes(const json& manifest) {
  std::map<std::string, std::string> out;
  for (const auto& entry : manifest.at("files")) out[entry.at("name").get<std::string>()] = entry.at("sha256");
  return out;
}

ReplayReport replay(const std::string& manifest_path, const std::string& out_dir, int workers) {
  json recorded;
  try {
    recorded = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest", std::string("invalid JSON: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError("manifest", e.what());
  }
  if (!recorded.contains("config") || !recorded.contains("files"))
    throw ConfigError("manifest", "missing config or file inventory");
  const ScenarioConfig config = config_from_json(recorded["config"]);
  if (recorded.value("config_hash", "") != config_hash(config))
    throw ConfigError("config_hash", "manifest config does not match its recorded hash");

  ReplayReport report;
  report.manifest = run_scenario(config, {out_dir, workers});
  const auto expected = inventory_hashes(recorded);
  const auto actual = inventory_hashes(report.manifest);
  for (const auto& [name, hash] : expected) {
    auto it = actual.find(name);
    if (it == actual.end()) report.mismatches.push_back(name + " (missing)");
    else if (it->second != hash) report.mismatches.push_back(name);
  }
  for (const auto& [name, hash] : actual)
    if (!expected.count(name)) report.mismatches.push_back(name + " (unexpected)");
  return report;
}

}  // namespace silab::lab
