#pragma once

#include "pcn/simulator/config.hpp"

namespace pcn {

// Three clients A=0, B=1, C=2 on the line A - C - B, 10 tokens per side.
// Periodic unit payments A->B at 1/s, C->B at 2/s, B->A at 2/s. Without
// imbalance pricing the C->B stream drains C's side of C-B and every A<->B
// payment stalls.
inline SimConfig deadlock_scenario(ControlMode control, double duration = 120) {
    SimConfig c;
    c.control = control;
    c.duration = duration;
    c.warmup = 30;
    c.graph.kind = GraphKind::Explicit;
    c.graph.roles = {NodeRole::Client, NodeRole::Client, NodeRole::Client};
    c.graph.channels = {{0, 2, 10, 10}, {2, 1, 10, 10}};
    c.routing.k = 1;
    c.routing.min_tu = 1;
    c.routing.max_tu = 1;
    auto stream = [](std::size_t s, std::size_t e, double rate) {
        StreamSpec st;
        st.source = s;
        st.dest = e;
        st.rate = rate;
        st.periodic = true;
        return st;
    };
    c.workload.streams = {stream(0, 1, 1), stream(2, 1, 2), stream(1, 0, 2)};
    return c;
}

inline constexpr NodeId kDeadlockA = node(0), kDeadlockB = node(1), kDeadlockC = node(2);

// One channel of capacity 10, saturating demand in both directions, single
// path per pair, confirmation delay pinned at 1 s (two 0.5 s hops).
inline SimConfig convergence_scenario(double demand_rate = 8, double duration = 120) {
    SimConfig c;
    c.duration = duration;
    c.warmup = 60;
    c.graph.kind = GraphKind::Explicit;
    c.graph.roles = {NodeRole::Client, NodeRole::Client};
    c.graph.channels = {{0, 1, 5, 5}};
    c.routing.k = 1;
    c.routing.min_tu = 1;
    c.routing.max_tu = 1;
    c.routing.hop_latency = 0.5;
    c.routing.initial_delta = 1;
    c.routing.pin_delta = true;
    // Demand exceeds what the channel sustains. A deadline as long as the run
    // keeps timeouts, and the window cuts they cause, out of the rate dynamics.
    c.workload.deadline = duration;
    for (std::size_t d = 0; d < 2; ++d) {
        StreamSpec st;
        st.source = d;
        st.dest = 1 - d;
        st.rate = demand_rate;
        st.periodic = true;
        c.workload.streams.push_back(st);
    }
    return c;
}

// 100-node small world at default parameters: 50 random pairs and their
// mirrors, one payment per second each, heavy-tailed amounts.
inline SimConfig small_world_scenario(std::uint64_t seed = 1, double duration = 60) {
    SimConfig c;
    c.seed = seed;
    c.duration = duration;
    c.workload.random_pairs = 50;
    c.workload.pair_rate = 1;
    c.workload.amount.median = 2;
    c.workload.amount.mean = 4;
    return c;
}

}  // namespace pcn
