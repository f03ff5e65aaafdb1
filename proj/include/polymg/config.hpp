// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_CONFIG_HPP
#define POLYMG_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include "polymg/timeloop.hpp"

namespace polymg
{

class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Plain-text settings: one "section.key = value" per line, '#' starts a comment. A
// "[section]" line prefixes the keys that follow it. Later assignments win.
std::map<std::string, std::string> ParseIni(std::istream &in);

// Builds a configuration. The optional key "run.preset" (fhn2d | bo3d) selects the
// starting defaults; every other key overrides one field. Unknown keys and malformed
// values raise ConfigError.
SimulationConfig ConfigFromSettings(const std::map<std::string, std::string> &settings);

SimulationConfig LoadConfig(const std::string &path);

// Every field in the settings format; parsing the echo reproduces the configuration.
std::string EchoConfig(const SimulationConfig &config);

}  // namespace polymg

#endif  // POLYMG_CONFIG_HPP
