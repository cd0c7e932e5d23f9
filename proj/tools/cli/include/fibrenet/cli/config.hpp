#pragma once

#include <optional>
#include <string>

#include "fibrenet/scenarios.hpp"

namespace fibrenet::cli {

/// Parses a YAML scenario document. Keys are strict; a top-level `preset`
/// key (or `preset_override`) selects the base scenario the document
/// overrides. Throws ConfigError with the offending key path.
Scenario parse_config(const std::string& text, const std::optional<std::string>& preset_override = std::nullopt);

Scenario load_config(const std::string& path, const std::optional<std::string>& preset_override = std::nullopt);

/// Canonical YAML with every field spelled out; parse_config(serialize_config(s)) == s.
std::string serialize_config(const Scenario& s);

}  // namespace fibrenet::cli
