#include "linsync/format.hpp"

#include <cmath>
#include <cstdio>

namespace linsync {

std::string format_double(double v) {
    if (std::isnan(v)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace linsync
