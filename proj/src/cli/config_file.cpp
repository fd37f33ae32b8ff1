#include <fstream>
#include <set>

#include "unhaze/cli.hpp"
#include "unhaze/errors.hpp"

namespace unhaze::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Default: return "default";
    case Provenance::File: return "file";
    case Provenance::Override: return "override";
  }
  return "default";
}

Provenance ParsedConfig::provenance_of(const std::string& key) const {
  auto it = provenance.find(key);
  if (it == provenance.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + text + "' is not of the form key=value");
  const std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError("override '" + text + "' has an empty key");
  return {key, trim(text.substr(eq + 1))};
}

ParsedConfig parse_config(const std::optional<std::filesystem::path>& path, const std::vector<Override>& overrides,
                          bool require_data) {
  ParsedConfig out;
  for (const auto& key : trainer::config_keys()) out.provenance[key] = Provenance::Default;

  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + path->string());
    std::set<std::string> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path->string() + ":" + std::to_string(number) + ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      if (!seen.insert(key).second) {
        throw ConfigError(path->string() + ":" + std::to_string(number) + ": key '" + key + "' set twice");
      }
      try {
        trainer::set_config_value(out.config, key, trim(line.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError(path->string() + ":" + std::to_string(number) + ": " + e.what());
      }
      out.provenance[key] = Provenance::File;
    }
  }

  for (const auto& [key, value] : overrides) {
    trainer::set_config_value(out.config, key, value);
    out.provenance[key] = Provenance::Override;
  }

  out.config.validate();
  if (require_data && (out.config.hazy_dir.empty() || out.config.clean_dir.empty())) {
    throw ConfigError("data.hazy_dir and data.clean_dir are required");
  }
  return out;
}

}  // namespace unhaze::cli
