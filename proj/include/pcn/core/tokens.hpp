#pragma once

#include <cmath>

namespace pcn {

// Token amounts are doubles restricted to multiples of a dyadic quantum, so
// additions and subtractions of balances are exact and conservation can be
// checked with ==.
using Tokens = double;

inline constexpr double kTokenQuantum = 1.0 / 1024.0;

inline Tokens quantize(double x) { return std::round(x / kTokenQuantum) * kTokenQuantum; }

inline bool is_quantized(Tokens x) { return quantize(x) == x; }

}  // namespace pcn
