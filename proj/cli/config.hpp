#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

/// Flat key = value configuration files and the environment seed override.
/// Precedence, lowest to highest: built-in defaults, config file, command
/// line flags, GPSL_SEED (seed only).

namespace gpsl::cli {

std::string trim(const std::string& s);

/// Parse a flat config file: one `key = value` per line, '#' starts a
/// comment, blank lines ignored. Throws ConfigError on a line without '=',
/// an empty key, or a duplicate key.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Throw ConfigError naming the first key in `cfg` that is not in `known`.
void reject_unknown_keys(const std::map<std::string, std::string>& cfg,
                         const std::vector<std::string>& known);

/// Value of GPSL_SEED when the variable is set; throws ConfigError when it
/// is set but not a plain unsigned integer.
std::optional<std::uint64_t> env_seed_override();

}  // namespace gpsl::cli
