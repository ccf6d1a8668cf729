#pragma once

#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

#include "pcn/core/error.hpp"

namespace pcn {

// Deterministic priority queue of timed events. Ties at equal time are broken
// by a caller-supplied rank and then by insertion order, so two runs that
// schedule the same events pop them in the same order.
template <typename Payload>
class EventQueue {
public:
    struct Entry {
        double time;
        int rank;
        std::uint64_t seq;
        Payload payload;
    };

    void push(double time, int rank, Payload payload) {
        ensure(time >= now_, "event scheduled in the past");
        heap_.push(Entry{time, rank, next_seq_++, std::move(payload)});
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    double now() const { return now_; }
    double next_time() const { return heap_.top().time; }

    Entry pop() {
        Entry e = heap_.top();
        heap_.pop();
        now_ = e.time;
        return e;
    }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.rank != b.rank) return a.rank > b.rank;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
};

}  // namespace pcn
