#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pcn/allocation/plan.hpp"
#include "pcn/core/random.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn {

namespace detail {

inline bool is_connected(std::size_t n, const std::vector<std::set<std::size_t>>& adj) {
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
    }
    return count == n;
}

inline std::vector<std::set<std::size_t>> watts_strogatz_once(std::size_t n, std::size_t ring_degree,
                                                              double rewire_p, Rng& rng) {
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t j = 1; j <= ring_degree / 2; ++j) {
            auto v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    // Rewire the far end of each lattice edge (u, u+j) with probability p,
    // keeping the edge count fixed.
    for (std::size_t j = 1; j <= ring_degree / 2; ++j)
        for (std::size_t u = 0; u < n; ++u) {
            if (!rng.bernoulli(rewire_p)) continue;
            const auto v = (u + j) % n;
            if (!adj[u].count(v) || adj[u].size() >= n - 1) continue;
            std::size_t w;
            do {
                w = rng.below(n);
            } while (w == u || adj[u].count(w));
            adj[u].erase(v);
            adj[v].erase(u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    return adj;
}

}  // namespace detail

inline constexpr int kSmallWorldRetries = 64;

// Watts-Strogatz small-world graph with zero balances; pair it with
// assign_capacities. Disconnected draws are retried with derived sub-seeds.
inline PcnGraph generate_small_world(std::size_t n, std::size_t ring_degree, double rewire_p, std::uint64_t seed,
                                     NodeRole role = NodeRole::Client) {
    require(n >= 3, "small world needs n >= 3");
    require(ring_degree % 2 == 0 && ring_degree >= 2 && ring_degree < n, "ring_degree must be even, >= 2 and < n");
    require(rewire_p >= 0.0 && rewire_p <= 1.0, "rewire probability must be in [0, 1]");
    for (int attempt = 0; attempt < kSmallWorldRetries; ++attempt) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        auto adj = detail::watts_strogatz_once(n, ring_degree, rewire_p, rng);
        if (!detail::is_connected(n, adj)) continue;
        PcnGraph g(n, role);
        for (std::size_t u = 0; u < n; ++u)
            for (auto v : adj[u])
                if (u < v) g.add_channel(node(u), node(v), 0, 0);
        return g;
    }
    throw InvalidArgument("could not draw a connected small-world graph");
}

struct LogNormalFit {
    double mu = 0;
    double sigma = 0;
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mean of max(floor, X) for X ~ LogNormal(mu, sigma).
inline double clamped_lognormal_mean(double floor, double mu, double sigma) {
    const double z = (std::log(floor) - mu) / sigma;
    return floor * standard_normal_cdf(z) + std::exp(mu + sigma * sigma / 2) * standard_normal_cdf(sigma - z);
}

// Fit a log-normal whose floor-clamped version has the requested median and mean.
inline LogNormalFit fit_capacity_distribution(double min_cap, double mean_cap, double median_cap) {
    require(min_cap > 0 && min_cap < median_cap && median_cap < mean_cap,
            "capacity triple must satisfy 0 < min < median < mean");
    const double mu = std::log(median_cap);
    double lo = 1e-9, hi = 20.0;
    if (clamped_lognormal_mean(min_cap, mu, lo) > mean_cap || clamped_lognormal_mean(min_cap, mu, hi) < mean_cap)
        throw InvalidArgument("capacity triple cannot be fitted");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (clamped_lognormal_mean(min_cap, mu, mid) < mean_cap ? lo : hi) = mid;
    }
    return {mu, 0.5 * (lo + hi)};
}

// Heavy-tailed whole-token capacities, floor-clamped at min_cap. Each channel
// starts with split_ab of its capacity spendable in the a->b direction.
inline PcnGraph assign_capacities(const PcnGraph& g, double min_cap, double mean_cap, double median_cap,
                                  std::uint64_t seed, double split_ab = 0.5) {
    require(split_ab >= 0 && split_ab <= 1, "split must be in [0, 1]");
    const auto fit = fit_capacity_distribution(min_cap, mean_cap, median_cap);
    Rng rng(seed);
    PcnGraph out;
    for (std::size_t i = 0; i < g.node_count(); ++i) out.add_node(g.role(node(i)));
    out.set_max_parallel(g.max_parallel());
    for (const auto& c : g.channels()) {
        const double cap = std::max(min_cap, std::round(rng.lognormal(fit.mu, fit.sigma)));
        const Tokens ab = quantize(cap * split_ab);
        out.add_channel(c.a, c.b, ab, cap - ab, c.max_htlc);
    }
    return out;
}

struct MultiStarSpec {
    std::vector<NodeId> clients;
    std::vector<NodeId> candidates;
    DeploymentPlan deployment;
    AssignmentPlan assignment;
    // Hub pairs to connect; empty means a complete mesh over deployed hubs.
    std::vector<std::pair<NodeId, NodeId>> hub_mesh;
    Tokens spoke_balance = 100;  // per direction, client <-> hub
    Tokens hub_balance = 1000;   // per direction, summed over parallel channels
    int n_cc = 1;                // parallel channels per hub pair
    int max_htlc = kDefaultMaxHtlc;
};

// Clients hang off their assigned hub; deployed hubs are meshed with n_cc
// parallel channels per pair, each carrying an even share of hub_balance.
// Node ids are kept from the graph config, undeployed candidates stay isolated.
inline PcnGraph build_multi_star(const MultiStarSpec& s) {
    require(s.deployment.size() == s.candidates.size(), "deployment size mismatch");
    require(s.assignment.clients() == s.clients.size(), "assignment size mismatch");
    require(s.n_cc >= 1, "n_cc must be >= 1");
    std::size_t n = 0;
    for (auto v : s.clients) n = std::max(n, index(v) + 1);
    for (auto v : s.candidates) n = std::max(n, index(v) + 1);
    PcnGraph g(n, NodeRole::Client);
    g.set_max_parallel(s.n_cc);
    for (std::size_t i = 0; i < s.candidates.size(); ++i)
        g.set_role(s.candidates[i], s.deployment[i] ? NodeRole::ActiveHub : NodeRole::HubCandidate);

    for (std::size_t m = 0; m < s.clients.size(); ++m) {
        const int h = s.assignment.hub_of[m];
        if (h < 0 || static_cast<std::size_t>(h) >= s.candidates.size() || !s.deployment[h])
            throw InvalidArgument("client assigned to an undeployed hub");
        g.add_channel(s.clients[m], s.candidates[h], s.spoke_balance, s.spoke_balance, s.max_htlc);
    }

    std::vector<std::pair<NodeId, NodeId>> mesh = s.hub_mesh;
    if (mesh.empty()) {
        const auto hubs = s.deployment.members();
        for (std::size_t i = 0; i < hubs.size(); ++i)
            for (std::size_t j = i + 1; j < hubs.size(); ++j)
                mesh.emplace_back(s.candidates[hubs[i]], s.candidates[hubs[j]]);
    }
    // Round shares down to the token quantum; the last channel takes the rest so
    // the pair total is exactly hub_balance for every n_cc.
    const Tokens share = std::floor(s.hub_balance / s.n_cc / kTokenQuantum) * kTokenQuantum;
    const Tokens last = s.hub_balance - share * (s.n_cc - 1);
    for (auto [u, v] : mesh) {
        require(g.role(u) == NodeRole::ActiveHub && g.role(v) == NodeRole::ActiveHub,
                "hub mesh references an undeployed node");
        for (int k = 0; k < s.n_cc; ++k) {
            const Tokens b = k + 1 == s.n_cc ? last : share;
            g.add_channel(u, v, b, b, s.max_htlc);
        }
    }
    return g;
}

}  // namespace pcn
