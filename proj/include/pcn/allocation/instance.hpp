#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/topology/graph.hpp"
#include "pcn/topology/hops.hpp"

namespace pcn {

// Dense cost tables over client/candidate positions. zeta is |M| x |N|,
// delta and eps are |N| x |N|, all row-major.
struct AllocationInstance {
    std::vector<NodeId> clients;
    std::vector<NodeId> candidates;
    std::vector<double> zeta;
    std::vector<double> delta;
    std::vector<double> eps;
    double omega = 1.0;
    // Sync cost over unordered hub pairs instead of ordered ones (halves C_S).
    bool unordered_pairs = false;

    std::size_t M() const { return clients.size(); }
    std::size_t N() const { return candidates.size(); }
    double z(std::size_t m, std::size_t n) const { return zeta[m * N() + n]; }
    double d(std::size_t n, std::size_t l) const { return delta[n * N() + l]; }
    double e(std::size_t n, std::size_t l) const { return eps[n * N() + l]; }
    double pair_factor() const { return unordered_pairs ? 0.5 : 1.0; }

    void validate() const {
        const auto n = N();
        require(n > 0, "allocation instance has no candidates");
        require(zeta.size() == M() * n, "zeta must have |clients| x |candidates| entries");
        require(delta.size() == n * n && eps.size() == n * n, "delta and eps must be |candidates| x |candidates|");
        require(std::isfinite(omega) && omega >= 0, "omega must be finite and >= 0");
        for (double v : zeta) require(std::isfinite(v) && v >= 0, "zeta entries must be finite and >= 0");
        for (std::size_t a = 0; a < n; ++a) {
            require(d(a, a) == 0 && e(a, a) == 0, "delta and eps need a zero diagonal");
            for (std::size_t b = 0; b < n; ++b) {
                require(std::isfinite(d(a, b)) && d(a, b) >= 0, "delta entries must be finite and >= 0");
                require(std::isfinite(e(a, b)) && e(a, b) >= 0, "eps entries must be finite and >= 0");
                require(d(a, b) == d(b, a) && e(a, b) == e(b, a), "delta and eps must be symmetric");
            }
        }
    }
};

struct HopCostRule {
    double zeta_per_hop = 0.02;
    double delta_per_hop = 0.01;
    double eps_per_hop = 0.05;
};

// Costs proportional to hop distance in g.
inline AllocationInstance build_hop_instance(const PcnGraph& g, std::vector<NodeId> clients,
                                             std::vector<NodeId> candidates, double omega, HopCostRule rule = {}) {
    const auto hops = hop_matrix(g);
    AllocationInstance inst;
    inst.clients = std::move(clients);
    inst.candidates = std::move(candidates);
    inst.omega = omega;
    const auto n = inst.N();
    inst.zeta.resize(inst.M() * n);
    inst.delta.resize(n * n);
    inst.eps.resize(n * n);
    for (std::size_t m = 0; m < inst.M(); ++m)
        for (std::size_t c = 0; c < n; ++c)
            inst.zeta[m * n + c] = rule.zeta_per_hop * hops(index(inst.clients[m]), index(inst.candidates[c]));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const int h = hops(index(inst.candidates[a]), index(inst.candidates[b]));
            inst.delta[a * n + b] = rule.delta_per_hop * h;
            inst.eps[a * n + b] = rule.eps_per_hop * h;
        }
    inst.validate();
    return inst;
}

}  // namespace pcn
