#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcn/protocol/crypto.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn::proto {

struct LedgerEntry {
    Digest tid{};
    Bytes inp;
    NodeId appender{};
    std::uint64_t seq = 0;
};

enum class AppendResult { Success, Failure };

// Append-only store parameterized by a successor relation. succ receives the
// current value (nullopt when absent) and the candidate.
class Ledger {
public:
    using Succ = std::function<bool(const std::optional<Bytes>& current, const Bytes& next)>;

    explicit Ledger(Succ succ) : succ_(std::move(succ)) {}

    AppendResult append(const Digest& tid, const Bytes& inp, NodeId party) {
        const auto it = storage_.find(tid);
        std::optional<Bytes> current;
        if (it != storage_.end()) current = it->second.inp;
        if (!succ_(current, inp)) return AppendResult::Failure;
        LedgerEntry e{tid, inp, party, ++seq_};
        history_.push_back(e);
        storage_[tid] = std::move(e);
        return AppendResult::Success;
    }

    std::optional<LedgerEntry> read(const Digest& tid) const {
        const auto it = storage_.find(tid);
        if (it == storage_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<LedgerEntry>& history() const { return history_; }
    std::uint64_t seq() const { return seq_; }

private:
    Succ succ_;
    std::map<Digest, LedgerEntry> storage_;
    std::vector<LedgerEntry> history_;
    std::uint64_t seq_ = 0;
};

// Payment outcomes: a tid may be decided once, as either commit or abort.
inline const Bytes& kCommit() {
    static const Bytes b = to_bytes("commit");
    return b;
}
inline const Bytes& kAbort() {
    static const Bytes b = to_bytes("abort");
    return b;
}

inline bool decide_once(const std::optional<Bytes>& current, const Bytes& next) {
    return !current && (next == kCommit() || next == kAbort());
}

}  // namespace pcn::proto
