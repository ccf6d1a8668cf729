#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/core/tokens.hpp"
#include "pcn/routing/demand.hpp"

namespace pcn {

enum class QueuePolicy { FIFO, LIFO, SPF, EDF };

inline std::string_view to_string(QueuePolicy p) {
    switch (p) {
        case QueuePolicy::FIFO: return "FIFO";
        case QueuePolicy::LIFO: return "LIFO";
        case QueuePolicy::SPF: return "SPF";
        case QueuePolicy::EDF: return "EDF";
    }
    return "?";
}

inline QueuePolicy parse_queue_policy(std::string_view s) {
    if (s == "FIFO" || s == "fifo") return QueuePolicy::FIFO;
    if (s == "LIFO" || s == "lifo") return QueuePolicy::LIFO;
    if (s == "SPF" || s == "spf") return QueuePolicy::SPF;
    if (s == "EDF" || s == "edf") return QueuePolicy::EDF;
    throw ConfigError("unknown queue policy '" + std::string(s) + "'");
}

struct QueuedTu {
    TuId tuid = 0;
    Tokens amount = 0;
    double enqueued = 0;
    double deadline = 0;
};

// Waiting TUs of one channel direction, ordered by the scheduling policy.
class ChannelQueue {
public:
    explicit ChannelQueue(QueuePolicy p = QueuePolicy::FIFO) : policy_(p) {}

    QueuePolicy policy() const { return policy_; }
    bool empty() const { return order_.empty(); }
    std::size_t size() const { return order_.size(); }
    Tokens amount() const { return amount_; }

    void push(const QueuedTu& tu) {
        const Key k = key(tu, seq_++);
        order_.insert(k);
        items_.emplace(tu.tuid, std::make_pair(k, tu));
        amount_ += tu.amount;
    }

    const QueuedTu& front() const {
        if (order_.empty()) throw InvalidArgument("front() on empty queue");
        return items_.at(std::get<2>(*order_.begin())).second;
    }

    QueuedTu pop() {
        auto tu = front();
        erase(tu.tuid);
        return tu;
    }

    bool contains(TuId id) const { return items_.count(id) != 0; }

    bool erase(TuId id) {
        auto it = items_.find(id);
        if (it == items_.end()) return false;
        order_.erase(it->second.first);
        amount_ -= it->second.second.amount;
        items_.erase(it);
        if (order_.empty()) amount_ = 0;
        return true;
    }

    // Entries waiting longer than threshold at time now.
    std::vector<TuId> stale(double now, double threshold) const {
        std::vector<TuId> out;
        for (const auto& k : order_) {
            const auto& tu = items_.at(std::get<2>(k)).second;
            if (now - tu.enqueued > threshold) out.push_back(tu.tuid);
        }
        return out;
    }

private:
    // (policy key, insertion seq, tuid). LIFO negates seq; ties fall to seq, so tuid is payload only.
    using Key = std::tuple<double, std::int64_t, TuId>;

    Key key(const QueuedTu& tu, std::int64_t seq) const {
        switch (policy_) {
            case QueuePolicy::FIFO: return {0.0, seq, tu.tuid};
            case QueuePolicy::LIFO: return {0.0, -seq, tu.tuid};
            case QueuePolicy::SPF: return {tu.amount, seq, tu.tuid};
            case QueuePolicy::EDF: return {tu.deadline, seq, tu.tuid};
        }
        return {0.0, seq, tu.tuid};
    }

    QueuePolicy policy_;
    std::set<Key> order_;
    std::unordered_map<TuId, std::pair<Key, QueuedTu>> items_;
    Tokens amount_ = 0;
    std::int64_t seq_ = 0;
};

struct CongestionParams {
    double delay_threshold = 0.4;  // T, seconds
    double beta = 10;
    double gamma = 0.1;
    Tokens queue_cap = 8000;
    Tokens initial_window = 40;
    double process_rate = std::numeric_limits<double>::infinity();  // r^process per channel

    void validate() const {
        require(delay_threshold > 0, "delay threshold must be positive");
        require(beta > 0 && gamma > 0, "window steps must be positive");
        require(queue_cap > 0, "queue cap must be positive");
        require(initial_window >= 0, "initial window must be >= 0");
        require(process_rate > 0, "process rate must be positive");
    }
};

enum class Admission { Admitted, Queued, Rejected };

inline std::string_view to_string(Admission a) {
    switch (a) {
        case Admission::Admitted: return "admitted";
        case Admission::Queued: return "queued";
        case Admission::Rejected: return "rejected";
    }
    return "?";
}

// Per-hop admission. A TU goes straight through only when the path rate is
// within the channel's processing rate, funds cover it, and nobody is ahead of
// it in the queue; otherwise it waits unless the queue is full.
inline Admission admit_tu(const CongestionParams& p, const ChannelQueue& q, bool funds_ok, double path_rate,
                          Tokens amount) {
    if (path_rate <= p.process_rate && funds_ok && q.empty()) return Admission::Admitted;
    if (q.amount() + amount > p.queue_cap) return Admission::Rejected;
    return Admission::Queued;
}

// Source-side window gate. An idle path may always carry one unit, so a
// window driven to zero cannot starve the path forever.
inline bool window_allows(Tokens window, Tokens outstanding, Tokens amount) {
    return outstanding == 0 || outstanding + amount <= window;
}

inline double window_after_marked_abort(double w, double beta) { return std::max(0.0, w - beta); }

// Increase only when the queue seen by the unit was below the window. The sum
// is floored at one token so a collapsed window set cannot explode.
inline double window_after_success(double w, double sum_windows, double gamma, Tokens queue_amount) {
    if (queue_amount >= w) return w;
    return w + gamma / std::max(sum_windows, 1.0);
}

}  // namespace pcn
