#pragma once

#include <optional>
#include <string_view>
#include <vector>

// Bundled data files (default domain, action library, prompt templates),
// compiled into the library from data/ at build time.
namespace llcoach::data {

/// Contents of `data/<name>`, e.g. "domain.txt" or "prompts/coach.txt".
std::optional<std::string_view> find(std::string_view name);
/// Throws Error(Io) when the file was not bundled.
std::string_view get(std::string_view name);
std::vector<std::string_view> names();

}  // namespace llcoach::data
