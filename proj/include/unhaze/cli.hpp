#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unhaze/config.hpp"

namespace unhaze::cli {

enum class Provenance { Default, File, Override };
std::string to_string(Provenance p);

struct ParsedConfig {
  trainer::TrainConfig config;
  std::map<std::string, Provenance> provenance;

  Provenance provenance_of(const std::string& key) const;
};

using Override = std::pair<std::string, std::string>;

/// Splits "key=value". Throws ConfigError when '=' is missing.
Override parse_override(const std::string& text);

/// Reads a flat `key = value` file (blank lines and `#` comments allowed),
/// then applies overrides. Unknown or repeated keys are rejected. With
/// `require_data`, both data directories must be set.
ParsedConfig parse_config(const std::optional<std::filesystem::path>& path, const std::vector<Override>& overrides,
                          bool require_data = true);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;

/// Runs one subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args);

}  // namespace unhaze::cli
