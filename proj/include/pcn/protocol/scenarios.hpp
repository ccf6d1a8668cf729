#pragma once

#include <string>
#include <vector>

#include "pcn/protocol/share.hpp"

namespace pcn::proto {

// Two hubs, one client each, three payments from P0 to P1 with no adversary.
inline ProtocolConfig two_hub_scenario() {
    ProtocolConfig c;
    c.hubs = 2;
    c.clients_per_hub = 1;
    c.payments = {{0, 1, 5, 0.0}, {0, 1, 2.5, 0.5}, {1, 0, 3, 1.0}};
    return c;
}

// Random topology and workload. With adversarial set, a random schedule of
// drops, delays and replays is attached as well.
inline ProtocolConfig random_protocol_config(std::uint64_t seed, bool adversarial) {
    Rng rng(mix_seed(seed, 41));
    ProtocolConfig c;
    c.seed = seed;
    c.hubs = 2 + rng.below(3);
    c.clients_per_hub = 1 + rng.below(2);
    c.kmg_size = 1 + rng.below(c.hubs);
    c.k_paths = 1 + rng.below(3);
    c.client_balance = static_cast<double>(5 + rng.below(20));
    c.hub_balance = static_cast<double>(5 + rng.below(40));
    c.min_tu = 1;
    c.max_tu = static_cast<double>(1 + rng.below(4));
    c.timeout = 1.0 + 2.0 * rng.uniform();
    const auto clients = c.hubs * c.clients_per_hub;
    const auto n = 3 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
        PaymentSpec p;
        p.source = rng.below(clients);
        do p.dest = rng.below(clients);
        while (p.dest % c.hubs == p.source % c.hubs);
        p.amount = quantize(0.5 + 9.5 * rng.uniform());
        p.time = quantize(3.0 * rng.uniform());
        c.payments.push_back(p);
    }
    if (adversarial) {
        const auto actions = 1 + rng.below(6);
        for (std::size_t i = 0; i < actions; ++i) {
            AdversaryAction a;
            a.kind = static_cast<AdversaryKind>(rng.below(3));
            a.type = kMsgTypes[rng.below(kMsgTypes.size())];
            a.nth = rng.below(n);
            a.dt = a.kind == AdversaryKind::Drop ? 0.0 : 4.0 * rng.uniform();
            c.adversary.push_back(a);
        }
    }
    return c;
}

struct ProtocolAudit {
    std::size_t conservation_violations = 0;
    std::size_t wealth_mismatches = 0;  // nodes whose funds disagree with the decided payments
    std::size_t other_violations = 0;
    std::size_t completed = 0;
    std::size_t attestations = 0;
    std::size_t attestations_valid = 0;
};

// Checks a finished run against its ledger: every node's final funds must
// equal its start plus completed receipts minus completed payments.
inline ProtocolAudit audit(const ProtocolOutcome& o) {
    ProtocolAudit a;
    for (const auto& v : o.violations) {
        if (v.find("conservation") != std::string::npos || v.find("sum to capacity") != std::string::npos ||
            v.find("capacity changed") != std::string::npos)
            ++a.conservation_violations;
        else
            ++a.other_violations;
    }
    auto expected = o.initial_wealth;
    for (const auto& p : o.payments) {
        if (p.status != PaymentStatus::Completed) continue;
        ++a.completed;
        expected[index(p.source)] -= p.amount;
        expected[index(p.dest)] += p.amount;
    }
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (expected[i] != o.final_wealth.at(i)) ++a.wealth_mismatches;
    for (const auto& p : o.payments) {
        if (!p.attestation) continue;
        ++a.attestations;
        if (p.proof && p.proof->valid && verify_attestation(o.hub_mpk.at(p.sender_hub), *p.attestation)) ++a.attestations_valid;
    }
    return a;
}

inline std::string protocol_trace(const ProtocolOutcome& o) {
    std::string s;
    for (const auto& l : o.trace) s += l + "\n";
    return s;
}

inline std::string protocol_csv(const ProtocolOutcome& o) {
    std::string s = "tid,source,dest,amount,status,acked,attested\n";
    for (const auto& p : o.payments)
        s += hex(p.tid, 8) + "," + std::to_string(index(p.source)) + "," + std::to_string(index(p.dest)) + "," +
             format_double(p.amount) + "," + (p.status == PaymentStatus::Completed ? "completed" : "aborted") + "," +
             (p.acked ? "1" : "0") + "," + (p.proof && p.proof->valid ? "1" : "0") + "\n";
    return s;
}

}  // namespace pcn::proto
