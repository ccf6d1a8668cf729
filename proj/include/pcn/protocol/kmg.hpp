#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "pcn/protocol/crypto.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn::proto {

struct KeyGrant {
    MockKeypair keys;
    NodeId member{};      // KMG member that answered
    bool forwarded = false;  // requester was not a member itself
};

// Key management group: iota designated hubs that issue per-tid and per-tuid
// key pairs. Repeated requests for one id return the cached pair. The
// distributed key generation itself is not modeled.
class Kmg {
public:
    Kmg(std::vector<NodeId> members, std::set<NodeId> hubs, std::uint64_t seed)
        : members_(std::move(members)), hubs_(std::move(hubs)), seed_(seed) {
        require(!members_.empty(), "KMG needs at least one member");
        for (auto m : members_) require(hubs_.contains(m), "KMG member must be a hub");
    }

    bool is_member(NodeId n) const { return std::find(members_.begin(), members_.end(), n) != members_.end(); }
    const std::vector<NodeId>& members() const { return members_; }

    // Member that serves a given id when the requester is not a member.
    NodeId serving_member(const Digest& id) const { return members_[id[0] % members_.size()]; }

    KeyGrant keygen(NodeId requester, const Digest& id, KeyScope scope) {
        require(hubs_.contains(requester), "key request from a non-hub node");
        KeyGrant g;
        g.forwarded = !is_member(requester);
        g.member = g.forwarded ? serving_member(id) : requester;
        auto it = cache_.find(id);
        if (it == cache_.end()) {
            const std::uint64_t nonce = mix(id) ^ seed_;
            it = cache_.emplace(id, mock_keygen(nonce + issued_++, scope)).first;
        }
        g.keys = it->second;
        return g;
    }

    std::size_t issued() const { return issued_; }

private:
    static std::uint64_t mix(const Digest& d) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
        return v;
    }
    std::vector<NodeId> members_;
    std::set<NodeId> hubs_;
    std::uint64_t seed_;
    std::map<Digest, MockKeypair> cache_;
    std::uint64_t issued_ = 0;
};

}  // namespace pcn::proto
