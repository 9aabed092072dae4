#pragma once

#include <string>

namespace linsync {

/// Shortest round-trippable form with 17 significant digits; NaN prints as
/// an empty field (CSV convention used throughout).
std::string format_double(double v);

} // namespace linsync
