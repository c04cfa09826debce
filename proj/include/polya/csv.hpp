#pragma once

#include <string>

namespace polya {

// Shortest decimal string that round-trips to the same double. Byte-stable
// across runs and platforms, and lossless.
std::string format_double(double value);

}  // namespace polya
