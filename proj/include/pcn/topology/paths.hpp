#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pcn/topology/graph.hpp"

namespace pcn {

enum class PathKind { KSP, Heuristic, EDW, EDS };

inline std::string_view to_string(PathKind k) {
    switch (k) {
        case PathKind::KSP: return "KSP";
        case PathKind::Heuristic: return "Heuristic";
        case PathKind::EDW: return "EDW";
        case PathKind::EDS: return "EDS";
    }
    return "?";
}

inline PathKind parse_path_kind(std::string_view s) {
    if (s == "KSP" || s == "ksp") return PathKind::KSP;
    if (s == "Heuristic" || s == "heuristic") return PathKind::Heuristic;
    if (s == "EDW" || s == "edw") return PathKind::EDW;
    if (s == "EDS" || s == "eds") return PathKind::EDS;
    throw ConfigError("unknown path kind '" + std::string(s) + "'");
}

// Edges and nodes a search may not use.
struct SearchMask {
    std::vector<char> channel_blocked;
    std::vector<char> node_blocked;
    Tokens min_width = 0;  // directional spendable balance a hop needs

    explicit SearchMask(const PcnGraph& g) : channel_blocked(g.channel_count(), 0), node_blocked(g.node_count(), 0) {}
};

// BFS shortest path by hop count. Neighbors are expanded in adjacency order,
// so the result is deterministic.
inline std::optional<std::vector<Hop>> shortest_hops(const PcnGraph& g, NodeId s, NodeId e, const SearchMask& mask) {
    const auto n = g.node_count();
    std::vector<std::optional<Hop>> via(n);
    std::vector<char> seen(n, 0);
    std::deque<NodeId> frontier{s};
    seen[index(s)] = 1;
    while (!frontier.empty() && !seen[index(e)]) {
        const auto u = frontier.front();
        frontier.pop_front();
        for (const auto& adj : g.neighbors(u)) {
            const auto v = adj.neighbor;
            if (seen[index(v)] || mask.channel_blocked[adj.channel] || mask.node_blocked[index(v)]) continue;
            const Hop h{adj.channel, g.channel(adj.channel).dir_from(u)};
            if (g.spendable(h) < mask.min_width) continue;
            seen[index(v)] = 1;
            via[index(v)] = h;
            frontier.push_back(v);
        }
    }
    if (!seen[index(e)] || s == e) return std::nullopt;
    std::vector<Hop> hops;
    for (NodeId at = e; at != s;) {
        const auto h = *via[index(at)];
        hops.push_back(h);
        at = g.hop_from(h);
    }
    std::reverse(hops.begin(), hops.end());
    return hops;
}

// Largest bottleneck of directional spendable balance over all s->e paths.
inline std::optional<Tokens> widest_width(const PcnGraph& g, NodeId s, NodeId e, const SearchMask& mask) {
    const auto n = g.node_count();
    std::vector<Tokens> best(n, -1);
    std::priority_queue<std::pair<Tokens, std::size_t>> pq;
    best[index(s)] = std::numeric_limits<Tokens>::infinity();
    pq.push({best[index(s)], index(s)});
    while (!pq.empty()) {
        auto [w, u] = pq.top();
        pq.pop();
        if (w < best[u]) continue;
        if (u == index(e)) return w;
        for (const auto& adj : g.neighbors(node(u))) {
            const auto v = index(adj.neighbor);
            if (mask.channel_blocked[adj.channel] || mask.node_blocked[v]) continue;
            const Hop h{adj.channel, g.channel(adj.channel).dir_from(node(u))};
            const Tokens nw = std::min(w, g.spendable(h));
            if (nw > best[v]) {
                best[v] = nw;
                pq.push({nw, v});
            }
        }
    }
    return std::nullopt;
}

// Widest path, ties broken by fewest hops.
inline std::optional<std::vector<Hop>> widest_hops(const PcnGraph& g, NodeId s, NodeId e, const SearchMask& mask) {
    const auto w = widest_width(g, s, e, mask);
    if (!w) return std::nullopt;
    SearchMask m = mask;
    m.min_width = *w;
    return shortest_hops(g, s, e, m);
}

// Yen's k shortest loopless paths under hop count.
inline std::vector<Path> yen_k_shortest(const PcnGraph& g, NodeId s, NodeId e, std::size_t k) {
    std::vector<Path> found;
    const SearchMask base(g);
    auto first = shortest_hops(g, s, e, base);
    if (!first) return found;
    found.push_back(make_path(g, s, *first));

    auto path_less = [&](const Path& x, const Path& y) {
        if (x.length() != y.length()) return x.length() < y.length();
        if (x.nodes != y.nodes) return x.nodes < y.nodes;
        return std::lexicographical_compare(x.hops.begin(), x.hops.end(), y.hops.begin(), y.hops.end(),
                                            [](Hop a, Hop b) { return a.channel < b.channel; });
    };
    std::vector<Path> pool;
    while (found.size() < k) {
        const Path& last = found.back();
        for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i) {
            const NodeId spur = last.nodes[i];
            SearchMask mask(g);
            for (const auto& p : found)
                if (p.nodes.size() > i && std::equal(p.nodes.begin(), p.nodes.begin() + i + 1, last.nodes.begin()))
                    mask.channel_blocked[p.hops[i].channel] = 1;
            for (std::size_t j = 0; j < i; ++j) mask.node_blocked[index(last.nodes[j])] = 1;
            auto tail = shortest_hops(g, spur, e, mask);
            if (!tail) continue;
            std::vector<Hop> hops(last.hops.begin(), last.hops.begin() + i);
            hops.insert(hops.end(), tail->begin(), tail->end());
            Path cand = make_path(g, s, std::move(hops));
            const bool dup = std::find(found.begin(), found.end(), cand) != found.end() ||
                             std::find(pool.begin(), pool.end(), cand) != pool.end();
            // Spur paths can revisit a root node; Yen blocks those via node masks,
            // but parallel channels can still produce a repeated node.
            std::set<NodeId> uniq(cand.nodes.begin(), cand.nodes.end());
            if (!dup && uniq.size() == cand.nodes.size()) pool.push_back(std::move(cand));
        }
        if (pool.empty()) break;
        auto it = std::min_element(pool.begin(), pool.end(), path_less);
        found.push_back(*it);
        pool.erase(it);
    }
    return found;
}

inline Tokens path_funds(const PcnGraph& g, const Path& p) {
    Tokens t = 0;
    for (const auto& h : p.hops) t += g.spendable(h);
    return t;
}

inline constexpr std::size_t kHeuristicPoolFactor = 4;
inline constexpr std::size_t kHeuristicPoolMin = 20;

// Up to k candidate paths from s to e. Returns an empty list when e is
// unreachable.
//   KSP       Yen k shortest.
//   Heuristic among a pool of short paths, the k with the most spendable
//             funds summed over their hops.
//   EDW       repeated widest path, removing used channels.
//   EDS       repeated shortest path, removing used channels.
inline std::vector<Path> candidate_paths(const PcnGraph& g, NodeId s, NodeId e, std::size_t k, PathKind kind) {
    require(s != e, "candidate_paths needs distinct endpoints");
    require(k >= 1, "candidate_paths needs k >= 1");
    switch (kind) {
        case PathKind::KSP: return yen_k_shortest(g, s, e, k);
        case PathKind::Heuristic: {
            auto pool = yen_k_shortest(g, s, e, std::max(kHeuristicPoolMin, kHeuristicPoolFactor * k));
            std::stable_sort(pool.begin(), pool.end(),
                             [&](const Path& x, const Path& y) { return path_funds(g, x) > path_funds(g, y); });
            if (pool.size() > k) pool.resize(k);
            return pool;
        }
        case PathKind::EDW:
        case PathKind::EDS: {
            std::vector<Path> out;
            SearchMask mask(g);
            while (out.size() < k) {
                auto hops = kind == PathKind::EDW ? widest_hops(g, s, e, mask) : shortest_hops(g, s, e, mask);
                if (!hops) break;
                for (const auto& h : *hops) mask.channel_blocked[h.channel] = 1;
                out.push_back(make_path(g, s, std::move(*hops)));
            }
            if (kind == PathKind::EDS)
                std::stable_sort(out.begin(), out.end(),
                                 [](const Path& x, const Path& y) { return x.length() < y.length(); });
            else
                std::stable_sort(out.begin(), out.end(), [](const Path& x, const Path& y) { return x.width > y.width; });
            return out;
        }
    }
    return {};
}

}  // namespace pcn
