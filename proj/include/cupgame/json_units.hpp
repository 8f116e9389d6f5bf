#pragma once

#include "cupgame/core.hpp"

#include <json.hpp>

namespace cupgame {

/// Unit counts travel as JSON integers when they fit in 64 bits and as
/// decimal strings otherwise.
inline nlohmann::ordered_json units_to_json(const BigInt& units) {
  if (units >= 0 && units <= std::numeric_limits<std::int64_t>::max()) return static_cast<std::int64_t>(units);
  return units.str();
}

inline BigInt units_from_json(const nlohmann::ordered_json& j) {
  if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return BigInt(j.get<std::uint64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("expected a unit count, got \"" + s + "\"");
    return BigInt(s);
  }
  throw ConfigError("expected a unit count, got " + j.dump());
}

}  // namespace cupgame
