#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "gpsl/errors.hpp"

namespace gpsl::cli {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, value).second)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
    }
    return out;
}

void reject_unknown_keys(const std::map<std::string, std::string>& cfg,
                         const std::vector<std::string>& known) {
    for (const auto& [key, value] : cfg) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key '" + key + "'");
    }
}

std::optional<std::uint64_t> env_seed_override() {
    const char* raw = std::getenv("GPSL_SEED");
    if (raw == nullptr) return std::nullopt;
    const std::string s = trim(raw);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("GPSL_SEED must be an unsigned integer, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError("GPSL_SEED out of range: '" + s + "'");
    }
}

}  // namespace gpsl::cli
