#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/core/tokens.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn {

using TxId = std::uint64_t;
using TuId = std::uint64_t;

struct Demand {
    TxId tid = 0;
    NodeId source{};
    NodeId dest{};
    Tokens amount = 0;
    double arrival = 0;
    double deadline = 0;

    void validate() const {
        require(amount > 0, "demand amount must be positive");
        require(source != dest, "demand source equals destination");
        require(deadline >= arrival, "demand deadline precedes arrival");
    }
};

enum class TuStatus { Pending, InFlight, Completed, Aborted };

inline std::string_view to_string(TuStatus s) {
    switch (s) {
        case TuStatus::Pending: return "pending";
        case TuStatus::InFlight: return "in_flight";
        case TuStatus::Completed: return "completed";
        case TuStatus::Aborted: return "aborted";
    }
    return "?";
}

struct TransactionUnit {
    TuId tuid = 0;
    TxId parent = 0;
    Tokens amount = 0;
    std::size_t path = 0;  // index into the pair's candidate path list
    bool marked = false;
    TuStatus status = TuStatus::Pending;
};

// Largest-first split. At most one unit falls below min_tu, and only when the
// amount cannot be written as a sum of in-range units.
inline std::vector<Tokens> split_amounts(Tokens amount, Tokens min_tu, Tokens max_tu) {
    require(min_tu > 0 && max_tu >= min_tu, "need 0 < min_tu <= max_tu");
    require(amount > 0, "cannot split a non-positive amount");
    std::vector<Tokens> out;
    Tokens rest = amount;
    while (rest > max_tu) {
        out.push_back(max_tu);
        rest = quantize(rest - max_tu);
    }
    if (rest >= min_tu || out.empty()) {
        out.push_back(rest);
        return out;
    }
    // rest < min_tu: borrow from the last full unit when that keeps both in range.
    const Tokens merged = quantize(out.back() + rest);
    if (merged - min_tu >= min_tu) {
        out.back() = quantize(merged - min_tu);
        out.push_back(min_tu);
    } else {
        out.push_back(rest);
    }
    return out;
}

// Smooth weighted round-robin over path rates; equal shares when all rates are zero.
inline std::vector<std::size_t> weighted_round_robin(std::span<const double> weights, std::size_t count) {
    require(!weights.empty(), "no paths to assign units to");
    std::vector<double> w(weights.begin(), weights.end());
    double total = 0;
    for (double x : w) total += std::max(0.0, x);
    if (total <= 0) {
        std::fill(w.begin(), w.end(), 1.0);
        total = static_cast<double>(w.size());
    }
    std::vector<double> current(w.size(), 0.0);
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t pick = 0;
        for (std::size_t p = 0; p < w.size(); ++p) {
            current[p] += std::max(0.0, w[p]);
            if (current[p] > current[pick]) pick = p;
        }
        current[pick] -= total;
        out.push_back(pick);
    }
    return out;
}

inline std::vector<TransactionUnit> split_demand(const Demand& d, Tokens min_tu, Tokens max_tu,
                                                 std::span<const double> path_rates, TuId first_tuid = 0) {
    require(!path_rates.empty(), "split_demand needs at least one path");
    const auto amounts = split_amounts(d.amount, min_tu, max_tu);
    const auto paths = weighted_round_robin(path_rates, amounts.size());
    std::vector<TransactionUnit> out;
    for (std::size_t i = 0; i < amounts.size(); ++i) {
        TransactionUnit tu;
        tu.tuid = first_tuid + i;
        tu.parent = d.tid;
        tu.amount = amounts[i];
        tu.path = paths[i];
        out.push_back(tu);
    }
    return out;
}

}  // namespace pcn
