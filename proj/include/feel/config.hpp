#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "feel/simulator.hpp"

namespace feel {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Raw `key = value` pairs from a flat config file with dotted sections
/// (sim.*, scheduler.*, radio.*, device.*, diversity.*, fl.*, data.*).
/// '#' starts a comment; blank lines are ignored.
struct ConfigFile {
  std::map<std::string, std::string> values;
  std::map<std::string, int> line_of;
};

ConfigFile parse_config_text(const std::string &text);
ConfigFile load_config_file(const std::string &path);

/// Applies defaults, type-checks every key, and rejects unknown keys with
/// their line numbers. `seed_override` substitutes for sim.seed; without
/// either, resolution fails (the seed is the one required key).
SimConfig resolve_config(const ConfigFile &file,
                         std::optional<std::uint64_t> seed_override = {});

/// Full key set with the resolved values, one `key = value` per line in a
/// fixed order. Parsing the echo reproduces the identical configuration
/// (doubles are printed with round-trip precision).
std::string echo_config(const SimConfig &cfg);

} // namespace feel
