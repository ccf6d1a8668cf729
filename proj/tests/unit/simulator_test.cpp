#include <gtest/gtest.h>

#include <map>
#include <regex>
#include <sstream>

#include "pcn/core/format.hpp"
#include "pcn/simulator/ccbt.hpp"
#include "pcn/simulator/engine.hpp"
#include "pcn/simulator/export.hpp"
#include "pcn/simulator/scenarios.hpp"
#include "pcn/simulator/studies.hpp"

using namespace pcn;

namespace {

SimConfig two_node(Tokens side = 50) {
    SimConfig c;
    c.duration = 10;
    c.warmup = 1;
    c.graph.kind = GraphKind::Explicit;
    c.graph.roles = {NodeRole::Client, NodeRole::Client};
    c.graph.channels = {{0, 1, side, side}};
    c.routing.k = 1;
    return c;
}

StreamSpec one_payment(std::size_t s, std::size_t e, Tokens amount, double at) {
    StreamSpec st;
    st.source = s;
    st.dest = e;
    st.rate = 1.0 / 1000;  // one arrival inside any short run
    st.periodic = true;
    st.phase = at;
    st.amount.median = st.amount.mean = amount;
    return st;
}

// Each node's funds: its own side of every channel plus what it has locked.
std::vector<Tokens> wealth(const PcnGraph& g, const std::vector<Tokens>& balances) {
    std::vector<Tokens> w(g.node_count(), 0);
    for (ChannelIdx c = 0; c < g.channel_count(); ++c) {
        w[index(g.channel(c).a)] += balances[2 * c];
        w[index(g.channel(c).b)] += balances[2 * c + 1];
    }
    return w;
}

std::vector<Tokens> initial_balances(const PcnGraph& g) {
    std::vector<Tokens> b;
    for (const auto& c : g.channels()) {
        b.push_back(c.balance[0]);
        b.push_back(c.balance[1]);
    }
    return b;
}

}  // namespace

TEST(Metrics, SuccessRatioExamples) {
    EXPECT_DOUBLE_EQ(compute_tsr(91, 100), 0.91);
    EXPECT_EQ(compute_tsr(0, 100), 0.0);
    EXPECT_EQ(compute_tsr(0, 0), 1.0);
    EXPECT_THROW(compute_tsr(5, 4), InvalidArgument);
}

TEST(Metrics, ThroughputExamples) {
    EXPECT_EQ(compute_ntp(500, 1000), 0.5);
    EXPECT_EQ(compute_ntp(1000, 1000), 1.0);
    EXPECT_EQ(compute_ntp(0, 0), 1.0);
    EXPECT_THROW(compute_ntp(2, 1), InvalidArgument);
}

TEST(Metrics, LatencyNearestRank) {
    std::vector<double> xs;
    for (int i = 100; i >= 1; --i) xs.push_back(i);
    const auto s = summarize_latency(xs);
    EXPECT_EQ(s.count, 100u);
    EXPECT_DOUBLE_EQ(s.mean, 50.5);
    EXPECT_EQ(s.p50, 50);
    EXPECT_EQ(s.p95, 95);
    EXPECT_EQ(summarize_latency({}).count, 0u);
}

TEST(Simulator, ZeroWorkloadLeavesBalances) {
    auto c = small_world_scenario(3, 5);
    c.warmup = 1;
    c.workload.random_pairs = 0;
    Simulator sim(c);
    const auto before = initial_balances(sim.graph());
    const auto o = sim.run();
    EXPECT_EQ(o.generated, 0u);
    EXPECT_EQ(o.tsr, 1.0);
    EXPECT_EQ(o.ntp, 1.0);
    EXPECT_EQ(o.final_balances, before);
}

TEST(Simulator, SinglePaymentTakesOneRoundTrip) {
    for (auto mode : {ControlMode::Share, ControlMode::Off}) {
        auto c = two_node();
        c.control = mode;
        c.workload.streams = {one_payment(0, 1, 1, 0.5)};
        const auto o = run(c);
        ASSERT_EQ(o.generated, 1u);
        EXPECT_EQ(o.completed, 1u);
        const auto& t = o.transactions.front();
        EXPECT_NEAR(t.commit_time - t.demand.arrival, c.routing.hop_latency, 1e-12);
        EXPECT_NEAR(o.latency.mean, 2 * c.routing.hop_latency, 1e-12);
        EXPECT_EQ(o.final_balances, (std::vector<Tokens>{49, 51}));
    }
}

TEST(Simulator, PaymentLargerThanChannelAborts) {
    auto c = two_node(5);
    c.workload.streams = {one_payment(0, 1, 8, 0.5)};
    const auto o = run(c);
    EXPECT_EQ(o.completed, 0u);
    EXPECT_EQ(o.aborted, 1u);
    EXPECT_EQ(o.final_balances, (std::vector<Tokens>{5, 5}));
}

TEST(Simulator, SameSeedSameOutputs) {
    auto c = small_world_scenario(7, 10);
    c.log_events = true;
    const auto a = run(c);
    const auto b = run(c);
    EXPECT_EQ(outcome_csv(a), outcome_csv(b));
    EXPECT_EQ(trace_csv(a), trace_csv(b));
    EXPECT_EQ(transactions_csv(a), transactions_csv(b));
    EXPECT_EQ(a.event_log, b.event_log);
    c.seed = 8;
    EXPECT_NE(transactions_csv(a), transactions_csv(run(c)));
}

// Oracle: every node ends with its starting funds plus value received minus
// value sent over completed payments.
TEST(Simulator, WealthMatchesCompletedPayments) {
    for (auto mode : {ControlMode::Share, ControlMode::Off}) {
        auto c = small_world_scenario(11, 15);
        c.control = mode;
        Simulator sim(c);
        const auto& g = sim.graph();
        auto expected = wealth(g, initial_balances(g));
        const auto capacity = g.total_capacity();
        const auto o = sim.run();
        for (const auto& t : o.transactions)
            if (t.status == TxStatus::Completed) {
                expected[index(t.demand.source)] -= t.demand.amount;
                expected[index(t.demand.dest)] += t.demand.amount;
            }
        EXPECT_EQ(wealth(g, o.final_balances), expected);
        Tokens total = 0;
        for (auto b : o.final_balances) total += b;
        EXPECT_EQ(total, capacity);
    }
}

TEST(Simulator, NtpMatchesEventLogReplay) {
    auto c = small_world_scenario(5, 10);
    c.log_events = true;
    const auto o = run(c);
    const std::regex arrive(R"(^\S+ arrive tid=(\d+) \d+->\d+ amount=(\S+)$)");
    const std::regex commit(R"(^\S+ commit tid=(\d+)$)");
    std::map<std::string, double> amount;
    double generated = 0, completed = 0;
    std::size_t commits = 0;
    std::smatch m;
    for (const auto& line : o.event_log) {
        if (std::regex_match(line, m, arrive)) {
            amount[m[1]] = parse_double(m[2].str());
            generated += amount[m[1]];
        } else if (std::regex_match(line, m, commit)) {
            completed += amount.at(m[1]);
            ++commits;
        }
    }
    ASSERT_GT(generated, 0);
    EXPECT_EQ(commits, o.completed);
    EXPECT_NEAR(completed / generated, o.ntp, 1e-12);
}

TEST(Simulator, TimeoutDiscipline) {
    auto c = choice_scenario(2);
    c.duration = 10;
    const auto o = run(c);
    ASSERT_GT(o.aborted, 0u);
    EXPECT_EQ(o.completed + o.aborted, o.generated);
    for (const auto& t : o.transactions) {
        ASSERT_NE(t.status, TxStatus::Pending);
        if (t.status == TxStatus::Completed) {
            EXPECT_LE(t.commit_time, t.demand.deadline);
            EXPECT_GE(t.ack_time, t.commit_time);
        }
    }
}

TEST(Simulator, EpochSnapshotReadsAreTagged) {
    PcnGraph g(2);
    g.add_channel(node(0), node(1), 1, 1);
    const EpochSnapshot snap(4, g);
    EXPECT_EQ(snap.view(5).channel_count(), 1u);
    EXPECT_THROW(snap.view(4), InvariantViolation);
    EXPECT_THROW(snap.view(6), InvariantViolation);
}

TEST(Simulator, EpochCountFollowsHorizon) {
    auto c = two_node();
    const auto o = run(c);
    EXPECT_EQ(o.epochs, 10u);
}

TEST(Simulator, InvalidConfigRejected) {
    auto c = two_node();
    c.routing.tau = 2;  // longer than the epoch
    EXPECT_THROW(run(c), InvalidArgument);
    c = two_node();
    c.warmup = c.duration;
    EXPECT_THROW(run(c), InvalidArgument);
}

TEST(Deadlock, ScenarioShape) {
    const auto c = deadlock_scenario(ControlMode::Off);
    ASSERT_EQ(c.graph.channels.size(), 2u);
    for (const auto& ch : c.graph.channels) {
        EXPECT_EQ(ch.balance_ab, 10);
        EXPECT_EQ(ch.balance_ba, 10);
    }
    ASSERT_EQ(c.workload.streams.size(), 3u);
    EXPECT_EQ(c.workload.streams[0].rate, 1);
    EXPECT_EQ(c.workload.streams[1].rate, 2);
    EXPECT_EQ(c.workload.streams[2].rate, 2);
}

TEST(Deadlock, FixedRatesDrainC) {
    const auto o = run(deadlock_scenario(ControlMode::Off));
    EXPECT_TRUE(o.deadlock);
    // channel 1 is C-B; direction 0 is C's side
    bool drained = false;
    for (const auto& s : o.channel_trace)
        if (s.channel == 1 && s.time < 60 && s.balance_ab == 0) drained = true;
    EXPECT_TRUE(drained);
    EXPECT_EQ(o.delivered_rate(kDeadlockA, kDeadlockB, 50, 120), 0);
    EXPECT_EQ(o.delivered_rate(kDeadlockB, kDeadlockA, 50, 120), 0);
}

TEST(Deadlock, PriceControlKeepsFlowing) {
    const auto o = run(deadlock_scenario(ControlMode::Share));
    EXPECT_FALSE(o.deadlock);
    EXPECT_GT(o.delivered_rate(kDeadlockA, kDeadlockB, 100, 120), 0);
    EXPECT_GT(o.delivered_rate(kDeadlockB, kDeadlockA, 100, 120), 0);
}

TEST(Export, PlotDataHasCommentHeader) {
    const auto s = plot_data("time", "rate", {{1, 2.5}, {2, 0}});
    EXPECT_EQ(s, "# time rate\n1 2.5\n2 0\n");
}

TEST(Ccbt, HandValues) {
    const CcbtParams p{4, 0.1, 0.02};
    EXPECT_EQ(ccbt_throughput(1, p), 4);
    EXPECT_DOUBLE_EQ(ccbt_throughput(2, p), 8 / (1 + 0.1 + 0.04));
    const CcbtParams lin{2.5, 0, 0};
    for (int n = 1; n <= 20; ++n) EXPECT_EQ(ccbt_throughput(n, lin), 2.5 * n);
    EXPECT_THROW(ccbt_throughput(0, p), InvalidArgument);
    EXPECT_THROW(ccbt_throughput(1, CcbtParams{1, 1, 0}), InvalidArgument);
}

// Continuous optimum sqrt((1 - sigma) / varpi); the integer argmax sits at a
// neighbouring integer.
TEST(Ccbt, ArgmaxNearContinuousPeak) {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const CcbtParams p{1 + rng.uniform(), 0.5 * rng.uniform(), 0.0005 + 0.05 * rng.uniform()};
        const double peak = std::sqrt((1 - p.sigma) / p.varpi);
        const int best = ccbt_argmax(p, 100);
        EXPECT_TRUE(best == static_cast<int>(std::floor(peak)) || best == static_cast<int>(std::ceil(peak)))
            << best << " vs " << peak;
    }
}

TEST(Ccbt, ShapeProperties) {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const CcbtParams p{1 + rng.uniform(), 0.9 * rng.uniform(), 0.001 + 0.2 * rng.uniform()};
        std::vector<double> y;
        for (int n = 1; n <= 60; ++n) y.push_back(ccbt_throughput(n, p));
        EXPECT_TRUE(is_unimodal(y));
        const CcbtParams flat{p.epsilon, 0, 0};
        for (int n = 2; n <= 60; ++n) EXPECT_GT(ccbt_throughput(n, flat), ccbt_throughput(n - 1, flat));
    }
}

TEST(Ccbt, FitRecoversNoiseFreeParameters) {
    Rng rng(29);
    for (int i = 0; i < 50; ++i) {
        const CcbtParams p{0.5 + 5 * rng.uniform(), 0.4 * rng.uniform(), 0.05 * rng.uniform()};
        std::vector<double> n, y;
        for (int k = 1; k <= 10; ++k) {
            n.push_back(k);
            y.push_back(ccbt_throughput(k, p));
        }
        const auto f = ccbt_fit(n, y);
        EXPECT_NEAR(f.params.epsilon, p.epsilon, 1e-6);
        EXPECT_NEAR(f.params.sigma, p.sigma, 1e-6);
        EXPECT_NEAR(f.params.varpi, p.varpi, 1e-6);
        EXPECT_LT(f.rms, 1e-9);
    }
}

TEST(Ccbt, FitRejectsDegenerateInput) {
    EXPECT_THROW(ccbt_fit({1, 2}, {1, 2}), InvalidArgument);
    EXPECT_THROW(ccbt_fit({3, 3, 3, 3}, {1, 1, 1, 1}), InvalidArgument);
    EXPECT_THROW(ccbt_fit({1, 2, 3}, {1, 2}), InvalidArgument);
    EXPECT_NO_THROW(ccbt_fit({1, 2, 3}, {1, 1.8, 2.4}));
}

TEST(Ccbt, UnimodalCheck) {
    EXPECT_TRUE(is_unimodal({1, 2, 3, 3, 2, 1}));
    EXPECT_TRUE(is_unimodal({3, 2, 1}));
    EXPECT_FALSE(is_unimodal({1, 3, 2, 3}));
    EXPECT_FALSE(is_unimodal({2, 1, 2}));
}

TEST(Ccbt, SweepKeepsHubPairCapacity) {
    auto c = ccbt_scenario(1);
    for (int n : {1, 3, 7}) {
        c.graph.n_cc = n;
        const auto net = build_network(c.graph, c.seed);
        const auto& g = net.graph;
        std::map<std::pair<std::size_t, std::size_t>, std::pair<int, Tokens>> pairs;
        for (const auto& ch : g.channels())
            if (is_hub_role(g.role(ch.a)) && is_hub_role(g.role(ch.b))) {
                auto& e = pairs[{std::min(index(ch.a), index(ch.b)), std::max(index(ch.a), index(ch.b))}];
                ++e.first;
                e.second += ch.capacity;
            }
        ASSERT_FALSE(pairs.empty());
        for (const auto& [k, v] : pairs) {
            EXPECT_EQ(v.first, n);
            EXPECT_EQ(v.second, 2 * c.graph.hub_balance);
        }
    }
}

TEST(Ccbt, SingleChannelSweepPointMatchesDirectRun) {
    auto c = ccbt_scenario(2);
    c.duration = 10;
    const auto rows = concurrent_channel_sweep(c, 1, 1);
    c.graph.n_cc = 1;
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].ntp, run(c).ntp);
}

TEST(Studies, ParallelRunsKeepInputOrder) {
    std::vector<SimConfig> cfgs;
    for (std::uint64_t s = 1; s <= 4; ++s) cfgs.push_back(small_world_scenario(s, 4));
    for (auto& c : cfgs) c.warmup = 1;
    const auto par = run_parallel(cfgs, 4);
    for (std::size_t i = 0; i < cfgs.size(); ++i) EXPECT_EQ(outcome_csv(par[i]), outcome_csv(run(cfgs[i])));
}
