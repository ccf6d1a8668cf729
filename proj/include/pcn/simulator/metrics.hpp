#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/routing/demand.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn {

// Completed over generated; an empty workload counts as fully successful.
inline double compute_tsr(std::size_t completed, std::size_t generated) {
    require(completed <= generated, "completed transactions exceed generated");
    return generated == 0 ? 1.0 : static_cast<double>(completed) / static_cast<double>(generated);
}

inline double compute_ntp(Tokens completed_value, Tokens generated_value) {
    require(completed_value >= 0 && generated_value >= 0, "negative payment value");
    require(completed_value <= generated_value, "completed value exceeds generated");
    return generated_value == 0 ? 1.0 : completed_value / generated_value;
}

struct LatencySummary {
    std::size_t count = 0;
    double mean = 0;
    double p50 = 0;
    double p95 = 0;
};

// Nearest-rank percentiles.
inline LatencySummary summarize_latency(std::vector<double> xs) {
    LatencySummary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    std::sort(xs.begin(), xs.end());
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    auto rank = [&](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
        return xs[std::max<std::size_t>(r, 1) - 1];
    };
    s.p50 = rank(0.5);
    s.p95 = rank(0.95);
    return s;
}

enum class TxStatus { Pending, Completed, Aborted };

inline std::string_view to_string(TxStatus s) {
    switch (s) {
        case TxStatus::Pending: return "pending";
        case TxStatus::Completed: return "completed";
        case TxStatus::Aborted: return "aborted";
    }
    return "?";
}

struct TxRecord {
    Demand demand;
    TxStatus status = TxStatus::Pending;
    std::size_t units = 0;
    double commit_time = -1;  // all units reached the recipient
    double ack_time = -1;     // last acknowledgement back at the sender
    std::string reason;       // abort cause
};

// One channel at the end of one price period.
struct ChannelSample {
    double time = 0;
    ChannelIdx channel = 0;
    double lambda = 0, mu_ab = 0, mu_ba = 0, xi_ab = 0, xi_ba = 0;
    double rate_ab = 0, rate_ba = 0;        // controller rates summed over paths using each direction
    double arrival_ab = 0, arrival_ba = 0;  // value offered to each direction per second
    double delta = 0;
    Tokens capacity = 0;
    Tokens queue_ab = 0, queue_ba = 0;
    Tokens balance_ab = 0, balance_ba = 0;
};

struct PathSample {
    double time = 0;
    NodeId source{}, dest{};
    std::size_t path = 0;
    double rate = 0, window = 0, price = 0;
    Tokens outstanding = 0;
};

struct SimOutcome {
    std::size_t generated = 0, completed = 0, aborted = 0;
    Tokens generated_value = 0, completed_value = 0;
    double tsr = 1, ntp = 1;
    LatencySummary latency;
    bool deadlock = false;
    double fees = 0;
    std::uint64_t events = 0;
    std::size_t epochs = 0;
    std::vector<TxRecord> transactions;
    std::vector<ChannelSample> channel_trace;
    std::vector<PathSample> path_trace;
    std::vector<std::string> event_log;
    std::vector<Tokens> final_balances;  // [2c] ab, [2c+1] ba

    // Value committed from s to e per second over [t0, t1).
    double delivered_rate(NodeId s, NodeId e, double t0, double t1) const {
        Tokens v = 0;
        for (const auto& t : transactions)
            if (t.status == TxStatus::Completed && t.demand.source == s && t.demand.dest == e && t.commit_time >= t0 &&
                t.commit_time < t1)
                v += t.demand.amount;
        return v / (t1 - t0);
    }
};

}  // namespace pcn
