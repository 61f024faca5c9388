#pragma once

#include <string>

namespace valab {

/// %.17g: enough digits for an exact double round-trip.
std::string format_double(double value);

/// Shortest representation that round-trips (used in identifiers).
std::string format_short(double value);

}  // namespace valab
