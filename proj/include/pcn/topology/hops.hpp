#pragma once

#include <deque>
#include <string>
#include <vector>

#include "pcn/topology/graph.hpp"

namespace pcn {

// All-pairs hop counts of a connected graph, n x n row-major.
class HopMatrix {
public:
    HopMatrix() = default;
    explicit HopMatrix(std::size_t n) : n_(n), d_(n * n, 0) {}

    std::size_t size() const { return n_; }
    int operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    int& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<int> d_;
};

inline std::vector<int> bfs_hops(const PcnGraph& g, NodeId source) {
    std::vector<int> dist(g.node_count(), -1);
    std::deque<NodeId> frontier{source};
    dist[index(source)] = 0;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        for (const auto& e : g.neighbors(u))
            if (dist[index(e.neighbor)] < 0) {
                dist[index(e.neighbor)] = dist[index(u)] + 1;
                frontier.push_back(e.neighbor);
            }
    }
    return dist;
}

inline HopMatrix hop_matrix(const PcnGraph& g) {
    const auto n = g.node_count();
    HopMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto dist = bfs_hops(g, node(i));
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[j] < 0)
                throw InvalidArgument("graph is disconnected: no path between " + std::to_string(i) + " and " +
                                      std::to_string(j));
            m.at(i, j) = dist[j];
        }
    }
    return m;
}

}  // namespace pcn
