#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/core/tokens.hpp"

namespace pcn {

enum class NodeId : std::uint32_t {};

constexpr std::size_t index(NodeId n) { return static_cast<std::size_t>(n); }
constexpr NodeId node(std::size_t i) { return static_cast<NodeId>(i); }

enum class NodeRole { Client, HubCandidate, ActiveHub };

inline std::string_view to_string(NodeRole r) {
    switch (r) {
        case NodeRole::Client: return "client";
        case NodeRole::HubCandidate: return "candidate";
        case NodeRole::ActiveHub: return "hub";
    }
    return "?";
}

inline NodeRole parse_role(std::string_view s) {
    if (s == "client") return NodeRole::Client;
    if (s == "candidate") return NodeRole::HubCandidate;
    if (s == "hub") return NodeRole::ActiveHub;
    throw ConfigError("unknown node role '" + std::string(s) + "'");
}

inline bool is_hub_role(NodeRole r) { return r != NodeRole::Client; }

using ChannelIdx = std::uint32_t;

inline constexpr int kDefaultMaxHtlc = 483;

// One direction of one channel. dir 0 moves funds a->b, dir 1 moves b->a.
struct Hop {
    ChannelIdx channel = 0;
    int dir = 0;

    friend bool operator==(const Hop&, const Hop&) = default;
};

// Bidirectional payment channel. Value is either spendable in one direction
// or locked by an in-flight HTLC, so
//   balance[0] + balance[1] + locked[0] + locked[1] == capacity
// holds after every operation.
struct Channel {
    NodeId a{};
    NodeId b{};
    Tokens capacity = 0;
    std::array<Tokens, 2> balance{};
    std::array<Tokens, 2> locked{};
    std::array<int, 2> htlcs{};
    int max_htlc = kDefaultMaxHtlc;

    NodeId from(int dir) const { return dir == 0 ? a : b; }
    NodeId to(int dir) const { return dir == 0 ? b : a; }
    int dir_from(NodeId n) const { return n == a ? 0 : 1; }
    NodeId other(NodeId n) const { return n == a ? b : a; }
    bool conserved() const { return balance[0] + balance[1] + locked[0] + locked[1] == capacity; }
};

struct Adjacent {
    NodeId neighbor;
    ChannelIdx channel;
};

class PcnGraph {
public:
    PcnGraph() = default;
    explicit PcnGraph(std::size_t n, NodeRole role = NodeRole::Client) : roles_(n, role), adj_(n) {}

    NodeId add_node(NodeRole role) {
        roles_.push_back(role);
        adj_.emplace_back();
        return node(roles_.size() - 1);
    }

    std::size_t node_count() const { return roles_.size(); }
    std::size_t channel_count() const { return channels_.size(); }

    NodeRole role(NodeId n) const { return roles_.at(index(n)); }
    void set_role(NodeId n, NodeRole r) { roles_.at(index(n)) = r; }

    // Upper bound on parallel channels between two hub-role nodes. Client
    // endpoints always get at most one channel per pair.
    int max_parallel() const { return max_parallel_; }
    void set_max_parallel(int k) {
        require(k >= 1, "max_parallel must be >= 1");
        max_parallel_ = k;
    }

    ChannelIdx add_channel(NodeId a, NodeId b, Tokens balance_ab, Tokens balance_ba,
                           int max_htlc = kDefaultMaxHtlc) {
        require(index(a) < node_count() && index(b) < node_count(), "channel endpoint out of range");
        require(a != b, "self-channel");
        require(balance_ab >= 0 && balance_ba >= 0, "negative channel balance");
        const auto existing = channels_between(a, b).size();
        const int allowed = (is_hub_role(role(a)) && is_hub_role(role(b))) ? max_parallel_ : 1;
        require(static_cast<int>(existing) < allowed, "too many parallel channels between nodes");
        Channel c;
        c.a = a;
        c.b = b;
        c.balance = {balance_ab, balance_ba};
        c.capacity = balance_ab + balance_ba;
        c.max_htlc = max_htlc;
        channels_.push_back(c);
        const auto idx = static_cast<ChannelIdx>(channels_.size() - 1);
        adj_[index(a)].push_back({b, idx});
        adj_[index(b)].push_back({a, idx});
        return idx;
    }

    const Channel& channel(ChannelIdx c) const { return channels_.at(c); }
    Channel& channel(ChannelIdx c) { return channels_.at(c); }
    std::span<const Channel> channels() const { return channels_; }
    std::span<const Adjacent> neighbors(NodeId n) const { return adj_.at(index(n)); }
    std::size_t degree(NodeId n) const { return adj_.at(index(n)).size(); }

    std::vector<ChannelIdx> channels_between(NodeId a, NodeId b) const {
        std::vector<ChannelIdx> out;
        for (const auto& e : adj_.at(index(a)))
            if (e.neighbor == b) out.push_back(e.channel);
        return out;
    }

    NodeId hop_from(Hop h) const { return channels_[h.channel].from(h.dir); }
    NodeId hop_to(Hop h) const { return channels_[h.channel].to(h.dir); }
    Tokens spendable(Hop h) const { return channels_[h.channel].balance[h.dir]; }

    bool can_lock(Hop h, Tokens amount) const {
        const auto& c = channels_[h.channel];
        return c.balance[h.dir] >= amount && c.htlcs[h.dir] < c.max_htlc;
    }

    // Reserve funds for an HTLC in direction h.
    void lock(Hop h, Tokens amount) {
        auto& c = channels_[h.channel];
        ensure(c.balance[h.dir] >= amount, "lock exceeds spendable balance");
        ensure(c.htlcs[h.dir] < c.max_htlc, "HTLC slot limit exceeded");
        c.balance[h.dir] -= amount;
        c.locked[h.dir] += amount;
        ++c.htlcs[h.dir];
    }

    // HTLC fulfilled: locked value moves to the receiving side.
    void settle(Hop h, Tokens amount) {
        auto& c = channels_[h.channel];
        ensure(c.locked[h.dir] >= amount && c.htlcs[h.dir] > 0, "settle without lock");
        c.locked[h.dir] -= amount;
        c.balance[1 - h.dir] += amount;
        --c.htlcs[h.dir];
    }

    // HTLC cancelled: locked value returns to the sending side.
    void release(Hop h, Tokens amount) {
        auto& c = channels_[h.channel];
        ensure(c.locked[h.dir] >= amount && c.htlcs[h.dir] > 0, "release without lock");
        c.locked[h.dir] -= amount;
        c.balance[h.dir] += amount;
        --c.htlcs[h.dir];
    }

    // Direct transfer without an HTLC (consolidated payouts, test fixtures).
    void transfer(Hop h, Tokens amount) {
        auto& c = channels_[h.channel];
        ensure(c.balance[h.dir] >= amount, "transfer exceeds spendable balance");
        c.balance[h.dir] -= amount;
        c.balance[1 - h.dir] += amount;
    }

    bool all_conserved() const {
        for (const auto& c : channels_)
            if (!c.conserved() || c.balance[0] < 0 || c.balance[1] < 0) return false;
        return true;
    }

    Tokens total_capacity() const {
        Tokens t = 0;
        for (const auto& c : channels_) t += c.capacity;
        return t;
    }

private:
    std::vector<NodeRole> roles_;
    std::vector<std::vector<Adjacent>> adj_;
    std::vector<Channel> channels_;
    int max_parallel_ = 1;
};

// Hop sequence through the graph. width is the smallest spendable balance
// along the hops at the time the path was built.
struct Path {
    std::vector<NodeId> nodes;
    std::vector<Hop> hops;
    Tokens width = 0;

    std::size_t length() const { return hops.size(); }
    bool empty() const { return hops.empty(); }
    NodeId source() const { return nodes.front(); }
    NodeId dest() const { return nodes.back(); }
    friend bool operator==(const Path& x, const Path& y) { return x.hops == y.hops; }
};

inline Tokens path_width(const PcnGraph& g, std::span<const Hop> hops) {
    if (hops.empty()) return 0;
    Tokens w = g.spendable(hops.front());
    for (const auto& h : hops) w = std::min(w, g.spendable(h));
    return w;
}

inline Path make_path(const PcnGraph& g, NodeId source, std::vector<Hop> hops) {
    Path p;
    p.nodes.push_back(source);
    NodeId at = source;
    for (const auto& h : hops) {
        require(g.hop_from(h) == at, "path hops are not contiguous");
        at = g.hop_to(h);
        p.nodes.push_back(at);
    }
    p.hops = std::move(hops);
    p.width = path_width(g, p.hops);
    return p;
}

// Consecutive hops share a node and no channel is used twice.
inline bool is_valid_path(const PcnGraph& g, const Path& p) {
    if (p.hops.empty() || p.nodes.size() != p.hops.size() + 1) return false;
    std::vector<ChannelIdx> used;
    for (std::size_t i = 0; i < p.hops.size(); ++i) {
        const auto& h = p.hops[i];
        if (h.channel >= g.channel_count()) return false;
        if (g.hop_from(h) != p.nodes[i] || g.hop_to(h) != p.nodes[i + 1]) return false;
        for (auto u : used)
            if (u == h.channel) return false;
        used.push_back(h.channel);
    }
    return true;
}

}  // namespace pcn
