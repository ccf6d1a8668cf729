#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn::proto {

// Hardware-style counter: strictly increasing, with a cap on increments per
// second of simulated time.
class MonotonicCounter {
public:
    explicit MonotonicCounter(double max_per_second = 20) : cap_(max_per_second) {
        require(max_per_second > 0, "counter rate cap must be positive");
    }

    std::uint64_t value() const { return value_; }

    // false when the rate cap would be exceeded; the value is unchanged then.
    bool try_increment(double now) {
        while (!recent_.empty() && recent_.front() <= now - 1.0) recent_.pop_front();
        if (static_cast<double>(recent_.size()) + 1 > cap_) return false;
        recent_.push_back(now);
        ++value_;
        return true;
    }

private:
    double cap_;
    std::uint64_t value_ = 0;
    std::deque<double> recent_;
};

struct StateUpdate {
    std::string key;
    std::string value;
};

struct Batch {
    NodeId hub{};
    std::uint64_t counter = 0;
    double time = 0;
    std::vector<StateUpdate> updates;
};

inline constexpr double kDefaultBatchWindow = 0.1;

// Collects state updates and seals them into one counter-stamped batch per
// window. Sealed batches are applied by a BatchVerifier that rejects stale
// counters, which blocks rollback by replaying an older sealed state.
class BatchCommitter {
public:
    BatchCommitter(NodeId hub, double window = kDefaultBatchWindow, double counter_cap = 20)
        : hub_(hub), window_(window), counter_(counter_cap) {
        require(window > 0, "batch window must be positive");
    }

    void add(StateUpdate u) { pending_.push_back(std::move(u)); }
    std::size_t pending() const { return pending_.size(); }
    double window() const { return window_; }
    std::uint64_t counter() const { return counter_.value(); }

    // Seal at the end of a window. Empty windows and rate-capped windows
    // produce nothing and leave the updates pending.
    std::optional<Batch> seal(double now) {
        if (pending_.empty()) return std::nullopt;
        if (!counter_.try_increment(now)) return std::nullopt;
        Batch b{hub_, counter_.value(), now, std::move(pending_)};
        pending_.clear();
        return b;
    }

private:
    NodeId hub_;
    double window_;
    MonotonicCounter counter_;
    std::vector<StateUpdate> pending_;
};

class BatchVerifier {
public:
    bool apply(const Batch& b) {
        auto& last = last_[b.hub];
        if (b.counter <= last) return false;
        last = b.counter;
        applied_ += b.updates.size();
        return true;
    }
    std::size_t applied_updates() const { return applied_; }

private:
    std::map<NodeId, std::uint64_t> last_;
    std::size_t applied_ = 0;
};

}  // namespace pcn::proto
