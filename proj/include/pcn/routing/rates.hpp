#pragma once

#include <algorithm>
#include <span>

#include "pcn/core/error.hpp"

namespace pcn {

inline constexpr double kRateFloor = 1e-6;

// Derivative of log utility in the pair's total rate.
inline double marginal_utility(double pair_total_rate, double floor = kRateFloor) {
    return 1.0 / std::max(pair_total_rate, floor);
}

// r <- max(0, r + alpha (U'(R) - price))
inline double update_rate(double rate, double alpha, double pair_total_rate, double path_price,
                          double floor = kRateFloor) {
    require(alpha > 0, "rate step alpha must be positive");
    return std::max(0.0, rate + alpha * (marginal_utility(pair_total_rate, floor) - path_price));
}

// Demand constraint: sum_p r_p * delta <= outstanding. Scales rates down in proportion.
inline void cap_to_demand(std::span<double> rates, double outstanding, double delta) {
    require(delta > 0, "lockup delay must be positive");
    double total = 0;
    for (double r : rates) total += r;
    const double limit = std::max(0.0, outstanding) / delta;
    if (total <= limit || total <= 0) return;
    const double scale = limit / total;
    for (double& r : rates) r *= scale;
}

}  // namespace pcn
