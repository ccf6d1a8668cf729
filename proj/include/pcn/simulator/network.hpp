#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "pcn/allocation/solver.hpp"
#include "pcn/core/random.hpp"
#include "pcn/simulator/config.hpp"
#include "pcn/topology/generators.hpp"

namespace pcn {

struct Network {
    PcnGraph graph;
    std::vector<NodeId> endpoints;  // nodes that send and receive payments
    std::optional<AllocationResult> allocation;
};

inline Network build_network(const GraphSpec& s, std::uint64_t seed) {
    Network net;
    switch (s.kind) {
        case GraphKind::SmallWorld: {
            auto g = generate_small_world(s.nodes, s.ring_degree, s.rewire_p, mix_seed(seed, 1));
            net.graph = assign_capacities(g, s.min_capacity, s.mean_capacity, s.median_capacity, mix_seed(seed, 2));
            for (std::size_t i = 0; i < s.nodes; ++i) net.endpoints.push_back(node(i));
            break;
        }
        case GraphKind::Explicit: {
            require(!s.roles.empty(), "explicit graph needs at least one node");
            net.graph = PcnGraph(0);
            for (auto r : s.roles) net.graph.add_node(r);
            int parallel = 1;
            for (const auto& c : s.channels) {
                require(c.a < s.roles.size() && c.b < s.roles.size(), "explicit channel endpoint out of range");
                int count = 0;
                for (const auto& d : s.channels) count += (d.a == c.a && d.b == c.b) || (d.a == c.b && d.b == c.a);
                parallel = std::max(parallel, count);
            }
            net.graph.set_max_parallel(parallel);
            for (const auto& c : s.channels)
                net.graph.add_channel(node(c.a), node(c.b), c.balance_ab, c.balance_ba, s.max_htlc);
            for (std::size_t i = 0; i < s.roles.size(); ++i) net.endpoints.push_back(node(i));
            break;
        }
        case GraphKind::MultiStar: {
            require(s.candidates >= 1 && s.clients >= 1, "multi-star needs clients and candidates");
            const std::size_t n = s.clients + s.candidates;
            const std::size_t degree = std::min(s.ring_degree, (n - 1) / 2 * 2);
            const auto universe = generate_small_world(n, std::max<std::size_t>(degree, 2), s.rewire_p, mix_seed(seed, 1));
            std::vector<std::size_t> ids(n);
            for (std::size_t i = 0; i < n; ++i) ids[i] = i;
            Rng rng(mix_seed(seed, 3));
            for (std::size_t i = n - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
            std::vector<NodeId> cands, clients;
            for (std::size_t i = 0; i < n; ++i) (i < s.candidates ? cands : clients).push_back(node(ids[i]));
            std::sort(cands.begin(), cands.end());
            std::sort(clients.begin(), clients.end());
            const auto inst = build_hop_instance(universe, clients, cands, s.omega);
            ExactOptions opt;
            if (!s.approx && inst.N() > opt.max_candidates)
                throw Infeasible("multi-star allocation has " + std::to_string(inst.N()) +
                                 " candidates; enable approx to use double greedy");
            auto alloc = solve(inst, s.approx ? SolverChoice::Approx : SolverChoice::Exact, mix_seed(seed, 4), opt);
            MultiStarSpec ms;
            ms.clients = clients;
            ms.candidates = cands;
            ms.deployment = alloc.x;
            ms.assignment = alloc.y;
            ms.spoke_balance = s.spoke_balance;
            ms.hub_balance = s.hub_balance;
            ms.n_cc = s.n_cc;
            ms.max_htlc = s.max_htlc;
            net.graph = build_multi_star(ms);
            net.endpoints = clients;
            net.allocation = std::move(alloc);
            break;
        }
    }
    return net;
}

}  // namespace pcn
