#pragma once

#include <string>

#include <json.hpp>

namespace kh {

/// Serializes a JSON document with a fixed, platform-independent byte
/// layout: keys in insertion order (use nlohmann::ordered_json), two-space
/// indentation, and every finite double printed with 17 significant
/// digits (lossless for IEEE binary64). Non-finite numbers are rejected.
std::string dump_deterministic(const nlohmann::ordered_json& j);

/// Formats one double with 17 significant digits.
std::string format_double(double x);

} // namespace kh
