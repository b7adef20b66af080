#ifndef SPECLAB_FORMAT_HPP
#define SPECLAB_FORMAT_HPP

#include <cstdio>
#include <string>

namespace speclab {

/// Shortest-faithful float text: 17 significant digits round-trip any
/// IEEE-754 double exactly, and the fixed format keeps file emissions
/// byte-stable across reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace speclab

#endif
