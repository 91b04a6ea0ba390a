#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cqed {

/// Scenario tags accepted by run_scenario.
const std::vector<std::string> &scenario_tags();

/// One experiment: a tag, a master seed, an output directory and the
/// parameter blocks. `params` holds the block named after the scenario plus
/// the shared "fort", "cavity" and "heating" blocks; unspecified fields take
/// their documented defaults.
struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  std::optional<std::filesystem::path> atom_data;
  nlohmann::json params = nlohmann::json::object();

  /// Parses {"scenario", "seed", "output_dir", "atom_data", <blocks>}.
  /// Throws ConfigError listing every offending field.
  static ScenarioConfig from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
};

struct ScenarioOutput {
  std::vector<std::filesystem::path> files;
  std::string summary; // short human-readable line(s) for stdout
  std::string config_hash;
};

/// Validates the whole configuration (including defaults and referenced files)
/// and returns the effective parameter tree. Throws ConfigError.
nlohmann::json validate_scenario(const ScenarioConfig &config);

/// Runs the scenario and writes its CSVs into config.output_dir. Nothing is
/// written unless validation and the computation both succeed.
ScenarioOutput run_scenario(const ScenarioConfig &config);

/// FNV-1a 64 of the canonical effective configuration (output_dir excluded).
std::string config_hash(const ScenarioConfig &config);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Library version string.
const char *version();

} // namespace cqed
