#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pcn/protocol/scenarios.hpp"

using namespace pcn;
using namespace pcn::proto;

namespace {

bool contains(const Bytes& hay, const Bytes& needle) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::vector<Tokens> sides(const PcnGraph& g) {
    std::vector<Tokens> out;
    for (const auto& c : g.channels()) {
        out.push_back(c.balance[0]);
        out.push_back(c.balance[1]);
    }
    return out;
}

ProtocolConfig one_payment(Tokens amount = 6) {
    ProtocolConfig c;
    c.payments = {{0, 1, amount, 0.0}};
    return c;
}

struct Run {
    ProtocolOutcome out;
    std::vector<Tokens> before, after;
};

Run run_with_balances(const ProtocolConfig& c) {
    ShareNetwork net(c);
    Run r;
    r.before = sides(net.graph());
    r.out = net.run();
    r.after = sides(net.graph());
    return r;
}

}  // namespace

TEST(MockCrypto, SignVerifyRoundTrip) {
    const auto kp = mock_keygen(5, KeyScope::Processor);
    const auto msg = to_bytes("state");
    const auto sigma = mock_sign(kp.sk, msg);
    EXPECT_TRUE(mock_verify(kp.pk, sigma, msg));
    EXPECT_FALSE(mock_verify(mock_keygen(6, KeyScope::Processor).pk, sigma, msg));
}

TEST(MockCrypto, EverySingleBitFlipIsRejected) {
    const auto kp = mock_keygen(9, KeyScope::Processor);
    const auto msg = to_bytes("pay_t state 0123456789");
    const auto sigma = mock_sign(kp.sk, msg);
    for (std::size_t bit = 0; bit < msg.size() * 8; ++bit) {
        auto bad = msg;
        bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_FALSE(mock_verify(kp.pk, sigma, bad)) << bit;
    }
    for (std::size_t bit = 0; bit < sigma.size() * 8; ++bit) {
        auto bad = sigma;
        bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_FALSE(mock_verify(kp.pk, bad, msg)) << bit;
    }
}

TEST(MockCrypto, EncryptDecrypt) {
    const auto kp = mock_keygen(1, KeyScope::Transaction);
    Bytes plain;
    for (int i = 0; i < 100; ++i) plain.push_back(static_cast<std::uint8_t>(i));
    const auto ct = mock_encrypt(kp.pk, plain);
    EXPECT_NE(ct.payload, plain);
    EXPECT_EQ(ct.leak_len(), plain.size());
    EXPECT_EQ(mock_decrypt(kp.sk, ct), plain);
    EXPECT_FALSE(mock_decrypt(mock_keygen(2, KeyScope::Transaction).sk, ct).has_value());
    auto tampered = ct;
    tampered.payload[3] ^= 1;
    EXPECT_FALSE(mock_decrypt(kp.sk, tampered).has_value());
}

TEST(AttestedExecution, InstallGivesFreshEnclaves) {
    AttestedExecution g(7, 1);
    g.register_party(node(0));
    const auto a = g.install(node(0), 7, pay_t_program());
    const auto b = g.install(node(0), 7, pay_t_program());
    EXPECT_NE(a, b);
    EXPECT_THROW(g.install(node(0), 8, pay_t_program()), InvalidArgument);
    EXPECT_THROW(g.install(node(1), 7, pay_t_program()), InvalidArgument);
    g.register_party(node(2), false);
    EXPECT_NO_THROW(g.install(node(2), 99, pay_t_program()));
}

TEST(AttestedExecution, ResumeSignsAndKeepsMemory) {
    AttestedExecution g(1, 2);
    g.register_party(node(0));
    const auto eid = g.install(node(0), 1, pay_t_program());
    const auto [out1, att1] = g.resume(node(0), eid, to_bytes("s1"));
    EXPECT_TRUE(verify_attestation(g.getpk(), att1));
    auto tampered = att1;
    tampered.outp.back() ^= 0x10;
    EXPECT_FALSE(verify_attestation(g.getpk(), tampered));
    // The program counts invocations in enclave memory.
    const auto [out2, att2] = g.resume(node(0), eid, to_bytes("s1"));
    EXPECT_EQ(out1, out2);
    EXPECT_TRUE(verify_attestation(g.getpk(), att2));
    Program counter{"count", [](const Bytes&, const Bytes& mem) {
                        const std::uint64_t n = mem.empty() ? 0 : Decoder(mem).u64();
                        const auto m = Encoder().put(n + 1).bytes();
                        return std::pair{m, m};
                    }};
    const auto ce = g.install(node(0), 1, counter);
    g.resume(node(0), ce, {});
    const auto second = g.resume(node(0), ce, {}).first;
    EXPECT_EQ(Decoder(second).u64(), 2u);
    EXPECT_THROW(g.resume(node(0), Digest{}, {}), InvalidArgument);
    EXPECT_THROW(g.resume(node(1), eid, {}), InvalidArgument);
}

TEST(AttestedExecution, IasProof) {
    AttestedExecution g(1, 3);
    g.register_party(node(0));
    const auto eid = g.install(node(0), 1, pay_t_program());
    const auto att = g.resume(node(0), eid, to_bytes("x")).second;
    MockIas ias;
    const auto pi = ias.verify(g.getpk(), att);
    EXPECT_TRUE(pi.valid);
    EXPECT_TRUE(ias.check(pi));
    auto bad = att;
    bad.idx ^= 1;
    const auto pi2 = ias.verify(g.getpk(), bad);
    EXPECT_FALSE(pi2.valid);
    EXPECT_TRUE(ias.check(pi2));
    auto forged = pi2;
    forged.valid = true;
    EXPECT_FALSE(ias.check(forged));
}

TEST(Ledger, AppendAndRead) {
    Ledger l(decide_once);
    const auto tid = sha256(to_bytes("t"));
    EXPECT_FALSE(l.read(tid).has_value());
    EXPECT_EQ(l.append(tid, kCommit(), node(1)), AppendResult::Success);
    EXPECT_EQ(l.read(tid)->inp, kCommit());
    EXPECT_EQ(l.read(tid)->appender, node(1));
    EXPECT_EQ(l.append(tid, kAbort(), node(2)), AppendResult::Failure);
    EXPECT_EQ(l.read(tid)->inp, kCommit());
    EXPECT_EQ(l.history().size(), 1u);
}

TEST(Ledger, SequenceStrictlyIncreases) {
    Ledger l([](const std::optional<Bytes>&, const Bytes&) { return true; });
    Rng rng(4);
    std::uint64_t last = 0;
    for (int i = 0; i < 200; ++i) {
        const auto tid = sha256(Encoder().put(rng.below(20)).bytes());
        const auto v = Encoder().put(rng.next_u64()).bytes();
        ASSERT_EQ(l.append(tid, v, node(0)), AppendResult::Success);
        EXPECT_GT(l.read(tid)->seq, last);
        last = l.read(tid)->seq;
        EXPECT_EQ(l.read(tid)->inp, v);
    }
}

TEST(Batching, OneIncrementPerWindow) {
    BatchCommitter b(node(0));
    EXPECT_FALSE(b.seal(0.1).has_value());
    EXPECT_EQ(b.counter(), 0u);
    for (int i = 0; i < 10; ++i) b.add({"k" + std::to_string(i), "v"});
    const auto batch = b.seal(0.2);
    ASSERT_TRUE(batch.has_value());
    EXPECT_EQ(batch->updates.size(), 10u);
    EXPECT_EQ(b.counter(), 1u);
    EXPECT_EQ(b.pending(), 0u);

    BatchVerifier v;
    EXPECT_TRUE(v.apply(*batch));
    EXPECT_FALSE(v.apply(*batch));  // replay
    b.add({"k", "v"});
    const auto next = b.seal(0.3);
    EXPECT_TRUE(v.apply(*next));
    EXPECT_FALSE(v.apply(*batch));  // rollback to the older state
}

TEST(Batching, CounterRateCap) {
    MonotonicCounter c(3);
    EXPECT_TRUE(c.try_increment(0.0));
    EXPECT_TRUE(c.try_increment(0.1));
    EXPECT_TRUE(c.try_increment(0.2));
    EXPECT_FALSE(c.try_increment(0.3));
    EXPECT_EQ(c.value(), 3u);
    EXPECT_TRUE(c.try_increment(1.05));
    EXPECT_EQ(c.value(), 4u);
}

TEST(Kmg, KeysAndForwarding) {
    Kmg k({node(0)}, {node(0), node(1)}, 11);
    const auto a = sha256(to_bytes("a"));
    const auto b = sha256(to_bytes("b"));
    const auto ka = k.keygen(node(0), a, KeyScope::Transaction);
    EXPECT_FALSE(ka.forwarded);
    EXPECT_EQ(mock_decrypt(ka.keys.sk, mock_encrypt(ka.keys.pk, to_bytes("D"))), to_bytes("D"));
    EXPECT_NE(k.keygen(node(0), b, KeyScope::Transaction).keys.pk, ka.keys.pk);
    const auto via = k.keygen(node(1), a, KeyScope::Transaction);
    EXPECT_TRUE(via.forwarded);
    EXPECT_EQ(via.member, node(0));
    EXPECT_EQ(via.keys.pk, ka.keys.pk);
    EXPECT_THROW(k.keygen(node(5), a, KeyScope::Transaction), InvalidArgument);
    EXPECT_THROW(Kmg({node(3)}, {node(0)}, 1), InvalidArgument);
}

TEST(ShareProtocol, HonestRunCompletesAndAttests) {
    const auto r = run_with_balances(two_hub_scenario());
    ASSERT_TRUE(r.out.violations.empty());
    ASSERT_EQ(r.out.payments.size(), 3u);
    for (const auto& p : r.out.payments) {
        EXPECT_EQ(p.status, PaymentStatus::Completed);
        ASSERT_TRUE(p.acked);
        EXPECT_TRUE(verify_attestation(r.out.hub_mpk.at(p.sender_hub), *p.attestation));
        ASSERT_TRUE(p.proof.has_value());
        EXPECT_TRUE(p.proof->valid);
        // sigma covers state (tid, theta = true)
        Decoder d(p.attestation->outp);
        EXPECT_EQ(d.str(), "pay_t");
        EXPECT_EQ(d.bytes(), Encoder().put(p.tid).put(std::uint64_t{1}).bytes());
    }
    // P0 paid 7.5 and received 3.
    EXPECT_EQ(r.out.final_wealth[2], r.out.initial_wealth[2] - 4.5);
    EXPECT_EQ(r.out.final_wealth[3], r.out.initial_wealth[3] + 4.5);
    EXPECT_EQ(r.out.final_wealth[0], r.out.initial_wealth[0]);
    EXPECT_EQ(r.out.final_wealth[1], r.out.initial_wealth[1]);
    EXPECT_GT(r.out.batches, 0u);
    EXPECT_EQ(r.out.expelled_hubs, 0u);
}

TEST(ShareProtocol, GoldenTraceTwoHubs) {
    const auto trace = protocol_trace(run_protocol(two_hub_scenario()));
    std::ifstream in(std::string(PCN_GOLDEN_DIR) + "/protocol_two_hub.log");
    ASSERT_TRUE(in.good());
    std::stringstream want;
    want << in.rdbuf();
    EXPECT_EQ(trace, want.str());
}

TEST(ShareProtocol, DroppedUnitAckRollsBack) {
    auto c = one_payment();
    c.adversary = {{AdversaryKind::Drop, MsgType::AckTu, 0, 0}};
    const auto r = run_with_balances(c);
    EXPECT_TRUE(r.out.violations.empty());
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Aborted);
    EXPECT_FALSE(r.out.payments[0].acked);
    EXPECT_EQ(r.after, r.before);
}

TEST(ShareProtocol, ReplayedUnitIsRejected) {
    auto c = one_payment();
    c.adversary = {{AdversaryKind::Replay, MsgType::PayTu, 0, 0.01}};
    const auto r = run_with_balances(c);
    EXPECT_EQ(r.out.replayed, 1u);
    EXPECT_GE(r.out.rejected, 1u);
    EXPECT_TRUE(std::any_of(r.out.trace.begin(), r.out.trace.end(),
                            [](const std::string& l) { return l.find("rejected replayed tuid") != std::string::npos; }));
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Completed);
    EXPECT_EQ(r.out.final_wealth[3], r.out.initial_wealth[3] + 6);
}

TEST(ShareProtocol, ReplayedInitIsDuplicate) {
    auto c = one_payment();
    c.adversary = {{AdversaryKind::Replay, MsgType::Init, 0, 0.01}};
    const auto r = run_with_balances(c);
    EXPECT_TRUE(std::any_of(r.out.trace.begin(), r.out.trace.end(),
                            [](const std::string& l) { return l.find("rejected duplicate tid") != std::string::npos; }));
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Completed);
}

TEST(ShareProtocol, DelayWithinDeadlineStillCompletes) {
    auto c = one_payment();
    c.adversary = {{AdversaryKind::Delay, MsgType::AckTu, 0, 1.0}};
    EXPECT_EQ(run_protocol(c).payments[0].status, PaymentStatus::Completed);
    c.adversary = {{AdversaryKind::Delay, MsgType::AckTu, 0, 10.0}};
    const auto r = run_with_balances(c);
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Aborted);
    EXPECT_EQ(r.after, r.before);
}

TEST(ShareProtocol, DroppedFinalAckKeepsCommit) {
    auto c = one_payment();
    c.adversary = {{AdversaryKind::Drop, MsgType::AckTid, 0, 0}};
    const auto r = run_with_balances(c);
    EXPECT_TRUE(r.out.violations.empty());
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Completed);
    EXPECT_FALSE(r.out.payments[0].acked);
    EXPECT_EQ(r.out.final_wealth[3], r.out.initial_wealth[3] + 6);
}

TEST(ShareProtocol, UnfundedUnitsRollBack) {
    auto c = one_payment(15);
    c.hub_balance = 10;
    const auto r = run_with_balances(c);
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Aborted);
    EXPECT_EQ(r.after, r.before);
    EXPECT_TRUE(r.out.violations.empty());
}

TEST(ShareProtocol, RecipientHubWithoutFundsRollsBack) {
    auto c = one_payment(8);
    c.hubs = 3;
    c.payments = {{0, 1, 8, 0.0}};
    c.client_balance = 5;  // S1 can forward at most 5 to P1
    const auto r = run_with_balances(c);
    EXPECT_EQ(r.out.payments[0].status, PaymentStatus::Aborted);
    EXPECT_EQ(r.after, r.before);
}

TEST(ShareProtocol, ObserverSeesNoPlaintextLinks) {
    auto c = two_hub_scenario();
    c.hubs = 3;
    c.clients_per_hub = 2;
    c.payments = {{0, 1, 9, 0}, {3, 2, 4, 0.2}, {4, 0, 7, 0.4}};
    const auto o = run_protocol(c);
    ASSERT_FALSE(o.observations.empty());
    std::set<Digest> seen;
    for (const auto& ob : o.observations) {
        EXPECT_TRUE(seen.insert(ob.tuid).second) << "tuid reused";
        EXPECT_EQ(ob.ciphertext_len, ob.ciphertext.size());
        for (const auto& p : o.payments) {
            EXPECT_NE(ob.tuid, p.tid);
            const Bytes tid(p.tid.begin(), p.tid.end());
            EXPECT_FALSE(contains(ob.ciphertext, tid));
            const Bytes tuid(ob.tuid.begin(), ob.tuid.end());
            EXPECT_FALSE(contains(tid, Bytes(tuid.begin(), tuid.begin() + 8)));
            for (auto n : {p.source, p.dest})
                EXPECT_FALSE(contains(ob.ciphertext, Encoder().put(static_cast<std::uint64_t>(index(n))).bytes()));
        }
    }
}

TEST(ShareProtocol, DistinctRequestsDistinctTids) {
    auto c = two_hub_scenario();
    c.payments.push_back(c.payments[0]);  // same amounts and endpoints, fresh nonce
    const auto o = run_protocol(c);
    std::set<Digest> tids;
    for (const auto& p : o.payments) EXPECT_TRUE(tids.insert(p.tid).second);
}

TEST(ShareProtocol, SameSeedSameTrace) {
    const auto c = random_protocol_config(77, true);
    const auto a = run_protocol(c);
    const auto b = run_protocol(c);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(protocol_csv(a), protocol_csv(b));
}

TEST(ShareProtocol, RejectsBadConfig) {
    auto c = one_payment();
    c.hubs = 1;
    EXPECT_THROW(ShareNetwork{c}, InvalidArgument);
    c = one_payment();
    c.payments = {{0, 0, 1, 0}};
    EXPECT_THROW(ShareNetwork{c}, InvalidArgument);
    c = one_payment();
    c.kmg_size = 3;
    EXPECT_THROW(ShareNetwork{c}, InvalidArgument);
}

// Oracle: each node's final funds equal its start plus received minus paid
// over payments the ledger records as committed. Checked on random honest and
// adversarial runs.
TEST(ShareProtocol, RandomRunsConserveAndStayAtomic) {
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        const bool adversarial = seed % 3 != 0;
        ShareNetwork net(random_protocol_config(seed, adversarial));
        const auto o = net.run();
        ASSERT_TRUE(o.violations.empty()) << seed << ": " << o.violations.front();
        auto expected = o.initial_wealth;
        for (const auto& p : o.payments) {
            const auto entry = net.ledger().read(p.tid);
            ASSERT_TRUE(entry.has_value()) << seed;
            if (entry->inp == kCommit()) {
                expected[index(p.source)] -= p.amount;
                expected[index(p.dest)] += p.amount;
            } else {
                EXPECT_FALSE(p.acked) << seed;
            }
            if (p.acked) {
                EXPECT_TRUE(verify_attestation(o.hub_mpk.at(p.sender_hub), *p.attestation)) << seed;
            }
        }
        EXPECT_EQ(o.final_wealth, expected) << seed;
        for (const auto& ch : net.graph().channels()) {
            EXPECT_TRUE(ch.conserved());
            EXPECT_EQ(ch.locked[0] + ch.locked[1], 0);
        }
        if (!adversarial) {
            for (const auto& p : o.payments) {
                if (p.status == PaymentStatus::Completed) {
                    EXPECT_TRUE(p.acked) << seed;
                }
            }
        }
    }
}
