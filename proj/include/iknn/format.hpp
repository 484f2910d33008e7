#pragma once

#include <string>
#include <string_view>

namespace iknn {

// Shortest-safe text form of a double: 17 significant digits, "%.17g".
std::string format_full(double value);

// Fixed 4-decimal form used in human-readable tables.
std::string format_fixed4(double value);

// Strict whole-field numeric parse; returns false on trailing garbage.
bool parse_double(std::string_view text, double& out);

} // namespace iknn
