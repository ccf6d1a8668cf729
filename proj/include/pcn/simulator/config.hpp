#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pcn/allocation/solver.hpp"
#include "pcn/core/error.hpp"
#include "pcn/routing/congestion.hpp"
#include "pcn/routing/prices.hpp"
#include "pcn/topology/generators.hpp"
#include "pcn/topology/paths.hpp"

namespace pcn {

enum class GraphKind { SmallWorld, MultiStar, Explicit };

inline std::string_view to_string(GraphKind k) {
    switch (k) {
        case GraphKind::SmallWorld: return "small_world";
        case GraphKind::MultiStar: return "multi_star";
        case GraphKind::Explicit: return "explicit";
    }
    return "?";
}

inline GraphKind parse_graph_kind(std::string_view s) {
    if (s == "small_world") return GraphKind::SmallWorld;
    if (s == "multi_star") return GraphKind::MultiStar;
    if (s == "explicit") return GraphKind::Explicit;
    throw ConfigError("unknown graph kind '" + std::string(s) + "'");
}

struct ChannelSpec {
    std::size_t a = 0;
    std::size_t b = 0;
    Tokens balance_ab = 0;
    Tokens balance_ba = 0;
};

struct GraphSpec {
    GraphKind kind = GraphKind::SmallWorld;
    // small world
    std::size_t nodes = 100;
    std::size_t ring_degree = 6;
    double rewire_p = 0.2;
    Tokens min_capacity = 10;
    Tokens mean_capacity = 403;
    Tokens median_capacity = 152;
    // explicit
    std::vector<NodeRole> roles;
    std::vector<ChannelSpec> channels;
    // multi star: a small-world universe of clients + candidates, costs from
    // hop distance, hubs picked by the allocation solver
    std::size_t clients = 40;
    std::size_t candidates = 8;
    double omega = 1.0;
    bool approx = false;
    Tokens spoke_balance = 100;
    Tokens hub_balance = 1000;
    int n_cc = 5;
    int max_htlc = kDefaultMaxHtlc;
};

enum class ControlMode { Share, Off };

inline std::string_view to_string(ControlMode c) { return c == ControlMode::Share ? "share" : "off"; }

inline ControlMode parse_control(std::string_view s) {
    if (s == "share") return ControlMode::Share;
    if (s == "off") return ControlMode::Off;
    throw ConfigError("unknown control mode '" + std::string(s) + "' (expected share or off)");
}

struct RoutingSpec {
    PriceParams prices{};
    double alpha = 0.1;
    double initial_rate = 1.0;     // tokens/s per path
    double utility_floor = 0.05;   // pair rate below which marginal utility stops growing
    double tau = 0.2;              // probe and price period, seconds
    Tokens min_tu = 1;
    Tokens max_tu = 4;
    std::size_t k = 5;
    PathKind path_kind = PathKind::EDW;
    QueuePolicy policy = QueuePolicy::LIFO;
    CongestionParams congestion{};
    double hop_latency = 0.05;     // one-way, seconds per channel
    double initial_delta = 0.2;    // seed of the per-channel confirmation delay estimate
    bool pin_delta = false;        // keep delta at initial_delta instead of measuring
    double delta_smoothing = 0.1;  // EWMA weight of a new delay sample
};

struct AmountSpec {
    // Fixed when median == mean, otherwise log-normal with that median and mean.
    Tokens median = 1;
    Tokens mean = 1;
    Tokens min = kTokenQuantum;
    double whale_fraction = 0;
    double whale_factor = 1.5;  // whales are this multiple of the largest channel capacity
};

struct StreamSpec {
    std::size_t source = 0;
    std::size_t dest = 0;
    double rate = 1;  // transactions per second
    bool periodic = false;
    double phase = 0;
    AmountSpec amount{};
};

struct WorkloadSpec {
    std::vector<StreamSpec> streams;
    // Random streams on top of the explicit ones.
    std::size_t random_pairs = 0;
    double pair_rate = 1;     // transactions per second per stream
    bool circulation = true;  // every random stream gets a mirrored reverse stream
    AmountSpec amount{};
    double deadline = 3.0;
};

// Hub processing model used by concurrency sweeps. Off by default. Each
// batch window a hub spends coherence * n_cc seconds keeping its parallel
// channels in sync, then forwards TUs at service_time * (1 + contention *
// (n_cc - 1)) / n_cc seconds each.
struct ProcessingSpec {
    bool enabled = false;
    double batch_window = 0.1;  // seconds
    double service_time = 0.02;
    double contention = 0.1;
    double coherence = 0.006;
};

struct SimConfig {
    GraphSpec graph{};
    RoutingSpec routing{};
    WorkloadSpec workload{};
    ProcessingSpec processing{};
    ControlMode control = ControlMode::Share;
    double epoch = 1.0;
    double duration = 60;
    double warmup = 2.0;  // 10 price periods at the default tau
    std::uint64_t seed = 1;
    bool log_events = false;

    void validate() const {
        const auto& r = routing;
        r.prices.validate();
        r.congestion.validate();
        require(r.alpha > 0, "alpha must be positive");
        require(r.initial_rate >= 0, "initial rate must be >= 0");
        require(r.utility_floor > 0, "utility floor must be positive");
        require(r.tau > 0, "tau must be positive");
        require(r.tau <= epoch, "tau must not exceed the epoch length");
        require(r.min_tu > 0 && r.max_tu >= r.min_tu, "need 0 < min_tu <= max_tu");
        require(r.k >= 1, "k must be >= 1");
        require(r.hop_latency > 0, "hop latency must be positive");
        require(r.initial_delta > 0, "initial delta must be positive");
        require(r.delta_smoothing > 0 && r.delta_smoothing <= 1, "delta smoothing must be in (0, 1]");
        require(epoch > 0, "epoch must be positive");
        require(duration > warmup && warmup >= 0, "duration must exceed warm-up");
        require(workload.deadline > 0, "deadline must be positive");
        require(graph.n_cc >= 1, "n_cc must be >= 1");
        if (processing.enabled) {
            require(processing.batch_window > 0, "batch window must be positive");
            require(processing.service_time > 0, "service time must be positive");
            require(processing.contention >= 0 && processing.contention < 1, "contention must be in [0, 1)");
            require(processing.coherence >= 0, "coherence must be >= 0");
        }
        for (const auto& s : workload.streams) {
            require(s.source != s.dest, "stream source equals destination");
            require(s.rate > 0, "stream rate must be positive");
        }
        for (const auto* a : {&workload.amount}) {
            require(a->median > 0 && a->mean >= a->median, "amount needs 0 < median <= mean");
            require(a->whale_fraction >= 0 && a->whale_fraction <= 1, "whale fraction must be in [0, 1]");
        }
    }
};

}  // namespace pcn
