#include <gtest/gtest.h>

#include <sstream>

#include "pcn/allocation/solver.hpp"
#include "pcn/topology/generators.hpp"

using namespace pcn;

namespace {

struct InstanceGen {
    std::size_t max_clients = 8;
    std::size_t max_candidates = 5;
    bool uniform = false;
};

AllocationInstance random_instance(Rng& rng, const InstanceGen& gen) {
    AllocationInstance inst;
    const auto M = 1 + rng.below(gen.max_clients);
    const auto N = 1 + rng.below(gen.max_candidates);
    for (std::size_t m = 0; m < M; ++m) inst.clients.push_back(node(N + m));
    for (std::size_t n = 0; n < N; ++n) inst.candidates.push_back(node(n));
    inst.zeta.resize(M * N);
    for (auto& z : inst.zeta) z = std::round(rng.uniform() * 100) / 50;
    inst.delta.assign(N * N, 0);
    inst.eps.assign(N * N, 0);
    const double ud = rng.uniform() * 0.1, ue = rng.uniform() * 0.3;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
            const double d = gen.uniform ? ud : rng.uniform() * 0.1;
            const double e = gen.uniform ? ue : rng.uniform() * 0.3;
            inst.delta[a * N + b] = inst.delta[b * N + a] = d;
            inst.eps[a * N + b] = inst.eps[b * N + a] = e;
        }
    inst.omega = rng.uniform() * 3;
    return inst;
}

// Balanced cost written straight from the definitions, independent of cost.hpp.
double oracle_cost(const AllocationInstance& inst, const std::vector<bool>& x, const std::vector<int>& hub) {
    double cm = 0;
    for (std::size_t m = 0; m < inst.M(); ++m) cm += inst.zeta[m * inst.N() + static_cast<std::size_t>(hub[m])];
    double cs = 0;
    for (std::size_t n = 0; n < inst.N(); ++n)
        for (std::size_t l = 0; l < inst.N(); ++l) {
            if (n == l || !x[n] || !x[l]) continue;
            double served = 0;
            for (std::size_t m = 0; m < inst.M(); ++m) served += hub[m] == static_cast<int>(n);
            cs += inst.delta[n * inst.N() + l] * served + inst.eps[n * inst.N() + l];
        }
    if (inst.unordered_pairs) cs /= 2;
    return cm + inst.omega * cs;
}

// Minimum over every nonempty x and every client-to-deployed assignment.
double oracle_optimum(const AllocationInstance& inst) {
    double best = 1e300;
    const auto N = inst.N(), M = inst.M();
    for (unsigned mask = 1; mask < (1u << N); ++mask) {
        std::vector<bool> x(N);
        std::vector<int> open;
        for (std::size_t n = 0; n < N; ++n)
            if ((x[n] = (mask >> n) & 1)) open.push_back(static_cast<int>(n));
        std::vector<std::size_t> digit(M, 0);
        while (true) {
            std::vector<int> hub(M);
            for (std::size_t m = 0; m < M; ++m) hub[m] = open[digit[m]];
            best = std::min(best, oracle_cost(inst, x, hub));
            std::size_t m = 0;
            while (m < M && ++digit[m] == open.size()) digit[m++] = 0;
            if (m == M) break;
        }
    }
    return best;
}

DeploymentPlan random_subset(Rng& rng, std::size_t n) {
    auto x = DeploymentPlan::none(n);
    for (std::size_t c = 0; c < n; ++c) x.deployed[c] = rng.bernoulli(0.5);
    return x;
}

AllocationInstance two_hub_example() {
    AllocationInstance inst;
    inst.clients = {node(2), node(3)};
    inst.candidates = {node(0), node(1)};
    inst.zeta = {0.1, 0.2, 0.3, 0.4};
    inst.delta = {0, 0.01, 0.01, 0};
    inst.eps = {0, 0.05, 0.05, 0};
    inst.omega = 1;
    return inst;
}

}  // namespace

TEST(Costs, ManagementSingleTerm) {
    AllocationInstance inst;
    inst.clients = {node(1)};
    inst.candidates = {node(0)};
    inst.zeta = {0.5};
    inst.delta = {0};
    inst.eps = {0};
    EXPECT_EQ(management_cost(inst, AssignmentPlan{{0}}), 0.5);
    EXPECT_THROW(management_cost(inst, AssignmentPlan{{-1}}), Infeasible);
}

TEST(Costs, ManagementMatchesHandSum) {
    Rng rng(11);
    AllocationInstance inst;
    inst.clients = {node(2), node(3), node(4)};
    inst.candidates = {node(0), node(1)};
    inst.zeta.resize(6);
    for (auto& z : inst.zeta) z = rng.uniform();
    inst.delta.assign(4, 0);
    inst.eps.assign(4, 0);
    AssignmentPlan y{{1, 0, 1}};
    EXPECT_DOUBLE_EQ(management_cost(inst, y), inst.zeta[1] + inst.zeta[2] + inst.zeta[5]);
}

TEST(Costs, SyncTwoHubExample) {
    auto inst = two_hub_example();
    const auto x = DeploymentPlan::all(2);
    EXPECT_NEAR(synchronization_cost(inst, x, AssignmentPlan{{0, 0}}), 0.12, 1e-12);
    DeploymentPlan solo{{true, false}};
    EXPECT_EQ(synchronization_cost(inst, solo, AssignmentPlan{{0, 0}}), 0);
    EXPECT_THROW(synchronization_cost(inst, solo, AssignmentPlan{{0, 1}}), Infeasible);
    inst.unordered_pairs = true;
    EXPECT_NEAR(synchronization_cost(inst, x, AssignmentPlan{{0, 0}}), 0.06, 1e-12);
}

TEST(Costs, BalancedIsAdditive) {
    auto inst = two_hub_example();
    const auto x = DeploymentPlan::all(2);
    const AssignmentPlan y{{0, 1}};
    inst.omega = 0;
    EXPECT_EQ(balanced_cost(inst, x, y), management_cost(inst, y));
    inst.omega = 1;
    EXPECT_DOUBLE_EQ(balanced_cost(inst, x, y), management_cost(inst, y) + synchronization_cost(inst, x, y));
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        auto r = random_instance(rng, {});
        auto dx = random_subset(rng, r.N());
        dx.deployed[rng.below(r.N())] = true;
        const auto open = dx.members();
        AssignmentPlan a;
        for (std::size_t m = 0; m < r.M(); ++m) a.hub_of.push_back(static_cast<int>(open[rng.below(open.size())]));
        EXPECT_NEAR(balanced_cost(r, dx, a), oracle_cost(r, dx.deployed, a.hub_of), 1e-9);
    }
}

TEST(Assignment, SingleHubTakesEveryone) {
    auto inst = two_hub_example();
    auto y = optimal_assignment(inst, DeploymentPlan{{false, true}});
    EXPECT_EQ(y.hub_of, (std::vector<int>{1, 1}));
    EXPECT_THROW(optimal_assignment(inst, DeploymentPlan::none(2)), Infeasible);
}

TEST(Assignment, UniformDeltaFollowsZeta) {
    auto inst = two_hub_example();
    auto y = optimal_assignment(inst, DeploymentPlan::all(2));
    EXPECT_EQ(y.hub_of, (std::vector<int>{0, 0}));
}

TEST(Assignment, BeatsEveryAlternativeAssignment) {
    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        auto inst = random_instance(rng, {5, 4, false});
        inst.unordered_pairs = rng.bernoulli(0.3);
        auto x = random_subset(rng, inst.N());
        x.deployed[rng.below(inst.N())] = true;
        const auto y = optimal_assignment(inst, x);
        const double mine = balanced_cost(inst, x, y);
        const auto open = x.members();
        std::vector<std::size_t> digit(inst.M(), 0);
        while (true) {
            std::vector<int> hub(inst.M());
            for (std::size_t m = 0; m < inst.M(); ++m) hub[m] = static_cast<int>(open[digit[m]]);
            ASSERT_LE(mine, oracle_cost(inst, x.deployed, hub) + 1e-9);
            std::size_t m = 0;
            while (m < inst.M() && ++digit[m] == open.size()) digit[m++] = 0;
            if (m == inst.M()) break;
        }
    }
}

TEST(Exact, SingleCandidate) {
    AllocationInstance inst;
    inst.clients = {node(1), node(2)};
    inst.candidates = {node(0)};
    inst.zeta = {0.3, 0.4};
    inst.delta = {0};
    inst.eps = {0};
    auto r = solve_exact(inst);
    EXPECT_EQ(r.x.count(), 1u);
    EXPECT_DOUBLE_EQ(r.cost, 0.7);
}

TEST(Exact, MatchesIndependentOracle) {
    Rng rng(23);
    for (int t = 0; t < 150; ++t) {
        auto inst = random_instance(rng, {5, 3, false});
        const auto r = solve_exact(inst);
        EXPECT_NEAR(r.cost, oracle_optimum(inst), 1e-9);
    }
}

TEST(Exact, MatchesFullEnumerationUpToTenCandidates) {
    Rng rng(29);
    for (int t = 0; t < 60; ++t) {
        auto inst = random_instance(rng, {20, 10, rng.bernoulli(0.5)});
        const auto bb = solve_exact(inst);
        const auto en = solve_enumerate(inst);
        ASSERT_EQ(bb.cost, en.cost);
        ASSERT_EQ(bb.x, en.x);
        ASSERT_EQ(bb.y, en.y);
    }
}

TEST(Exact, PrunesOnLargerInstances) {
    Rng rng(31);
    auto inst = random_instance(rng, {40, 14, true});
    inst.omega = 2;
    const auto r = solve_exact(inst);
    EXPECT_LT(r.nodes_explored, (std::uint64_t{1} << 15));
    EXPECT_EQ(r.cost, solve_enumerate(inst).cost);
}

TEST(Exact, HeavySyncWeightDeploysOneHub) {
    Rng rng(37);
    for (int t = 0; t < 30; ++t) {
        auto inst = random_instance(rng, {10, 6, true});
        if (inst.N() < 2) continue;
        for (std::size_t a = 0; a < inst.N(); ++a)
            for (std::size_t b = 0; b < inst.N(); ++b)
                if (a != b) inst.delta[a * inst.N() + b] = 0.01;
        inst.omega = 1e4;
        EXPECT_EQ(solve_exact(inst).x.count(), 1u);
    }
}

TEST(Exact, RejectsOversizedInstance) {
    Rng rng(1);
    auto inst = random_instance(rng, {3, 1, false});
    ExactOptions opt;
    opt.max_candidates = 0;
    EXPECT_THROW(solve_exact(inst, opt), Infeasible);
}

TEST(Witness, LinearizationConsistentForAnyFeasiblePlan) {
    Rng rng(41);
    for (int t = 0; t < 300; ++t) {
        auto inst = random_instance(rng, {6, 5, false});
        auto x = random_subset(rng, inst.N());
        x.deployed[rng.below(inst.N())] = true;
        const auto open = x.members();
        AssignmentPlan y;
        for (std::size_t m = 0; m < inst.M(); ++m) y.hub_of.push_back(static_cast<int>(open[rng.below(open.size())]));
        const auto w = build_witness(inst, x, y);
        ASSERT_TRUE(witness_satisfies_constraints(w, x, y));
        ASSERT_TRUE(costs_agree(linearized_sync_cost(inst, w), synchronization_cost(inst, x, y)));
    }
}

TEST(Witness, DetectsBrokenProducts) {
    auto inst = two_hub_example();
    const auto x = DeploymentPlan::all(2);
    const AssignmentPlan y{{0, 1}};
    auto w = build_witness(inst, x, y);
    w.theta[1] = 0;  // x_0 = x_1 = 1 forces theta_01 = 1
    EXPECT_FALSE(witness_satisfies_constraints(w, x, y));
}

TEST(SetFunction, SingletonIsManagementOnly) {
    Rng rng(43);
    auto inst = random_instance(rng, {6, 4, false});
    for (std::size_t n = 0; n < inst.N(); ++n) {
        auto x = DeploymentPlan::none(inst.N());
        x.deployed[n] = true;
        double sum = 0;
        for (std::size_t m = 0; m < inst.M(); ++m) sum += inst.z(m, n);
        EXPECT_DOUBLE_EQ(set_function_f(inst, x), sum);
    }
    EXPECT_EQ(set_function_f(inst, DeploymentPlan::none(inst.N())), f_upper_bound(inst));
}

TEST(SetFunction, UpperBoundDominatesSamples) {
    Rng rng(47);
    for (int t = 0; t < 1000; ++t) {
        auto inst = random_instance(rng, {8, 6, false});
        auto x = random_subset(rng, inst.N());
        EXPECT_LE(set_function_f(inst, x), f_upper_bound(inst) + 1e-12);
    }
    AllocationInstance zero;
    zero.clients = {node(1)};
    zero.candidates = {node(0)};
    zero.zeta = {0};
    zero.delta = {0};
    zero.eps = {0};
    EXPECT_EQ(f_upper_bound(zero), 0);
}

TEST(SetFunction, SupermodularUnderUniformDelta) {
    Rng rng(53);
    for (int t = 0; t < 20; ++t) {
        auto inst = random_instance(rng, {10, 8, true});
        const auto rep = check_supermodularity(inst, 500, rng.next_u64());
        EXPECT_EQ(rep.samples, 500u);
        EXPECT_EQ(rep.violations, 0u) << "worst gap " << rep.worst_gap;
    }
}

TEST(DoubleGreedy, SingleCandidate) {
    Rng rng(59);
    auto inst = random_instance(rng, {4, 1, false});
    auto r = double_greedy(inst, 1);
    EXPECT_EQ(r.x.count(), 1u);
}

TEST(DoubleGreedy, TakesEveryElementWhenAddingAlwaysHelps) {
    // Zero sync cost and each client strictly closest to its own candidate.
    AllocationInstance inst;
    const std::size_t N = 4;
    for (std::size_t n = 0; n < N; ++n) {
        inst.candidates.push_back(node(n));
        inst.clients.push_back(node(N + n));
    }
    inst.zeta.assign(N * N, 1.0);
    for (std::size_t n = 0; n < N; ++n) inst.zeta[n * N + n] = 0;
    inst.delta.assign(N * N, 0);
    inst.eps.assign(N * N, 0);
    for (std::uint64_t s = 0; s < 10; ++s) EXPECT_EQ(double_greedy(inst, s).x, DeploymentPlan::all(N));
}

TEST(DoubleGreedy, DeterministicSubsetPerSeed) {
    Rng rng(61);
    for (int t = 0; t < 30; ++t) {
        auto inst = random_instance(rng, {10, 8, false});
        const auto a = double_greedy(inst, 99), b = double_greedy(inst, 99);
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.y, b.y);
        EXPECT_EQ(a.x.size(), inst.N());
        EXPECT_GE(a.x.count(), 1u);
    }
}

TEST(DoubleGreedy, HalfApproximationInExpectation) {
    Rng rng(67);
    for (int t = 0; t < 100; ++t) {
        auto inst = random_instance(rng, {12, 10, false});
        const double ub = f_upper_bound(inst);
        const double opt = ub - solve_exact(inst).cost;
        double mean = 0;
        for (std::uint64_t s = 0; s < 50; ++s) mean += ub - double_greedy(inst, s).cost;
        mean /= 50;
        EXPECT_GE(mean, 0.5 * opt - 1e-12);
    }
}

TEST(OmegaSweep, ZeroWeightIgnoresSync) {
    Rng rng(71);
    auto inst = random_instance(rng, {10, 6, true});
    const auto rows = omega_sweep(inst, {0.0});
    double best = 0;
    for (std::size_t m = 0; m < inst.M(); ++m) {
        double low = 1e300;
        for (std::size_t n = 0; n < inst.N(); ++n) low = std::min(low, inst.z(m, n));
        best += low;
    }
    EXPECT_DOUBLE_EQ(rows[0].management, best);
}

TEST(OmegaSweep, HubCountNonincreasingUnderUniformDelta) {
    Rng rng(73);
    for (int t = 0; t < 40; ++t) {
        auto inst = random_instance(rng, {15, 8, true});
        const auto rows = omega_sweep(inst, {0, 0.1, 0.3, 1, 3, 10, 30, 100});
        for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].hub_count, rows[i - 1].hub_count);
        for (const auto& r : rows) {
            inst.omega = r.omega;
            EXPECT_DOUBLE_EQ(r.management, management_cost(inst, r.result.y));
            EXPECT_DOUBLE_EQ(r.sync, synchronization_cost(inst, r.result.x, r.result.y));
        }
    }
}

TEST(OmegaSweep, CsvHasOneRowPerWeight) {
    Rng rng(79);
    auto inst = random_instance(rng, {5, 3, false});
    std::ostringstream out;
    write_sweep_csv(out, omega_sweep(inst, {0, 1, 2}, SolverChoice::Approx, 4));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "omega,hub_count,C_M,C_S,C_B,solver,wall_time");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find("double_greedy"), std::string::npos);
    }
    EXPECT_EQ(rows, 3);
}

TEST(HopInstance, CostsScaleWithDistance) {
    PcnGraph g(6);
    for (std::size_t i = 0; i < 6; ++i) g.add_channel(node(i), node((i + 1) % 6), 1, 1);
    auto inst = build_hop_instance(g, {node(1), node(2)}, {node(0), node(3)}, 1);
    EXPECT_DOUBLE_EQ(inst.z(0, 0), 0.02);
    EXPECT_DOUBLE_EQ(inst.z(1, 0), 0.04);
    EXPECT_DOUBLE_EQ(inst.d(0, 1), 0.03);
    EXPECT_DOUBLE_EQ(inst.e(1, 0), 0.15);
}
