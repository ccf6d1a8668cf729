#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pcn/allocation/cost.hpp"
#include "pcn/core/format.hpp"
#include "pcn/core/random.hpp"

namespace pcn {

struct AllocationResult {
    DeploymentPlan x;
    AssignmentPlan y;
    double management = 0;
    double sync = 0;
    double cost = 0;
    std::string solver;
    std::uint64_t nodes_explored = 0;
};

// Optimal assignment for a fixed deployment: every client goes to the deployed candidate minimizing
// zeta_mn + omega * sum_l delta_nl. Ties go to the lowest position.
inline AssignmentPlan optimal_assignment(const AllocationInstance& inst, const DeploymentPlan& x) {
    if (x.size() != inst.N()) throw InvalidArgument("deployment plan size does not match candidate count");
    const auto hubs = x.members();
    if (hubs.empty()) throw Infeasible("no candidate is deployed");
    const double w = inst.omega * inst.pair_factor();
    std::vector<double> pull(inst.N(), 0);
    for (auto n : hubs)
        for (auto l : hubs)
            if (l != n) pull[n] += inst.d(n, l);
    AssignmentPlan y;
    y.hub_of.resize(inst.M());
    for (std::size_t m = 0; m < inst.M(); ++m) {
        double best = std::numeric_limits<double>::infinity();
        for (auto n : hubs) {
            const double c = inst.z(m, n) + w * pull[n];
            if (c < best) {
                best = c;
                y.hub_of[m] = static_cast<int>(n);
            }
        }
    }
    return y;
}

inline AllocationResult evaluate_deployment(const AllocationInstance& inst, const DeploymentPlan& x) {
    AllocationResult r;
    r.x = x;
    r.y = optimal_assignment(inst, x);
    r.management = management_cost(inst, r.y);
    r.sync = synchronization_cost(inst, x, r.y);
    r.cost = r.management + inst.omega * r.sync;
    return r;
}

// Sum of max zeta per client plus every pair term at full load; no feasible plan exceeds it.
inline double f_upper_bound(const AllocationInstance& inst) {
    double total = 0;
    for (std::size_t m = 0; m < inst.M(); ++m) {
        double worst = 0;
        for (std::size_t n = 0; n < inst.N(); ++n) worst = std::max(worst, inst.z(m, n));
        total += worst;
    }
    double pairs = 0;
    for (std::size_t n = 0; n < inst.N(); ++n)
        for (std::size_t l = 0; l < inst.N(); ++l)
            if (l != n) pairs += inst.d(n, l) * static_cast<double>(inst.M()) + inst.e(n, l);
    return total + inst.omega * inst.pair_factor() * pairs;
}

// f(X) = C_B(x_X, optimal y); the empty set maps to the upper bound.
inline double set_function_f(const AllocationInstance& inst, const DeploymentPlan& x) {
    if (x.count() == 0) return f_upper_bound(inst);
    return evaluate_deployment(inst, x).cost;
}

// Deterministic preference among equal-cost deployments: fewer hubs, then
// the lexicographically smallest member list.
inline bool preferred_on_tie(const DeploymentPlan& a, const DeploymentPlan& b) {
    if (a.count() != b.count()) return a.count() < b.count();
    return a.members() < b.members();
}

inline bool better_result(const AllocationResult& cand, const AllocationResult& best) {
    if (best.solver.empty()) return true;
    if (cand.cost != best.cost) return cand.cost < best.cost;
    return preferred_on_tie(cand.x, best.x);
}

struct ExactOptions {
    std::size_t max_candidates = 20;
    // Pruning slack so floating-point noise in the bound never cuts an optimum.
    double prune_tolerance = 1e-9;
    bool check_witness = true;
};

namespace detail {

struct BranchAndBound {
    const AllocationInstance& inst;
    const ExactOptions& opt;
    std::vector<int> state;  // 1 included, 0 excluded, -1 undecided
    AllocationResult best;
    std::uint64_t explored = 0;

    double lower_bound() const {
        const auto n = inst.N();
        const double w = inst.omega * inst.pair_factor();
        double total = 0;
        for (std::size_t m = 0; m < inst.M(); ++m) {
            double low = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < n; ++c) {
                if (state[c] == 0) continue;
                double pull = 0;
                for (std::size_t l = 0; l < n; ++l)
                    if (l != c && state[l] == 1) pull += inst.d(c, l);
                low = std::min(low, inst.z(m, c) + w * pull);
            }
            total += low;
        }
        double pairs = 0;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t l = 0; l < n; ++l)
                if (l != c && state[c] == 1 && state[l] == 1) pairs += inst.e(c, l);
        return total + w * pairs;
    }

    void visit(std::size_t depth) {
        ++explored;
        const auto n = inst.N();
        if (depth == n) {
            DeploymentPlan x = DeploymentPlan::none(n);
            for (std::size_t c = 0; c < n; ++c) x.deployed[c] = state[c] == 1;
            if (x.count() == 0) return;
            auto r = evaluate_deployment(inst, x);
            r.solver = "exact";
            if (better_result(r, best)) best = std::move(r);
            return;
        }
        for (int choice : {1, 0}) {
            state[depth] = choice;
            bool any_open = false;
            for (std::size_t c = 0; c < n; ++c) any_open = any_open || state[c] != 0;
            if (any_open && (best.solver.empty() || lower_bound() <= best.cost + opt.prune_tolerance)) visit(depth + 1);
            state[depth] = -1;
        }
    }
};

}  // namespace detail

inline void verify_witness(const AllocationInstance& inst, const AllocationResult& r) {
    const auto w = build_witness(inst, r.x, r.y);
    ensure(witness_satisfies_constraints(w, r.x, r.y), "linearization witness violates its product constraints");
    ensure(costs_agree(linearized_sync_cost(inst, w), r.sync), "linearized sync cost differs from direct sync cost");
}

// Branch-and-bound over deployments; optimal assignments computed at the leaves.
inline AllocationResult solve_exact(const AllocationInstance& inst, const ExactOptions& opt = {}) {
    inst.validate();
    if (inst.N() > opt.max_candidates)
        throw Infeasible("exact solver supports at most " + std::to_string(opt.max_candidates) + " candidates, got " +
                         std::to_string(inst.N()));
    detail::BranchAndBound bb{inst, opt, std::vector<int>(inst.N(), -1), {}, 0};
    bb.visit(0);
    ensure(!bb.best.solver.empty(), "branch-and-bound returned no plan");
    bb.best.nodes_explored = bb.explored;
    if (opt.check_witness) verify_witness(inst, bb.best);
    return bb.best;
}

// Reference solver: every nonempty deployment, same tie rule.
inline AllocationResult solve_enumerate(const AllocationInstance& inst) {
    inst.validate();
    require(inst.N() <= 24, "enumeration limited to 24 candidates");
    AllocationResult best;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << inst.N()); ++mask) {
        DeploymentPlan x = DeploymentPlan::none(inst.N());
        for (std::size_t c = 0; c < inst.N(); ++c) x.deployed[c] = (mask >> c) & 1;
        auto r = evaluate_deployment(inst, x);
        r.solver = "enumerate";
        if (better_result(r, best)) best = std::move(r);
    }
    return best;
}

// Randomized double greedy on f_hat = f_ub - f.
inline AllocationResult double_greedy(const AllocationInstance& inst, std::uint64_t seed) {
    inst.validate();
    const auto n = inst.N();
    const double ub = f_upper_bound(inst);
    auto fhat = [&](const DeploymentPlan& s) { return ub - set_function_f(inst, s); };
    Rng rng(seed);
    DeploymentPlan lo = DeploymentPlan::none(n), hi = DeploymentPlan::all(n);
    double f_lo = fhat(lo), f_hi = fhat(hi);
    for (std::size_t u = 0; u < n; ++u) {
        DeploymentPlan lo_add = lo, hi_drop = hi;
        lo_add.deployed[u] = true;
        hi_drop.deployed[u] = false;
        const double f_lo_add = fhat(lo_add), f_hi_drop = fhat(hi_drop);
        const double a = std::max(0.0, f_lo_add - f_lo);
        const double b = std::max(0.0, f_hi_drop - f_hi);
        const bool take = (a + b == 0) ? true : rng.bernoulli(a / (a + b));
        if (take) {
            lo = lo_add;
            f_lo = f_lo_add;
        } else {
            hi = hi_drop;
            f_hi = f_hi_drop;
        }
    }
    ensure(lo == hi, "double greedy solutions failed to coincide");
    AllocationResult r;
    if (lo.count() > 0) {
        r = evaluate_deployment(inst, lo);
    } else {
        for (std::size_t c = 0; c < n; ++c) {
            DeploymentPlan x = DeploymentPlan::none(n);
            x.deployed[c] = true;
            auto s = evaluate_deployment(inst, x);
            s.solver = "single";
            if (better_result(s, r)) r = std::move(s);
        }
    }
    r.solver = "double_greedy";
    return r;
}

// Samples (A subset of B, i not in B) and counts violations of
// f(A+i) - f(A) <= f(B+i) - f(B).
struct SupermodularityReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_gap = 0;
};

inline SupermodularityReport check_supermodularity(const AllocationInstance& inst, std::size_t samples,
                                                   std::uint64_t seed, double tol = 1e-9) {
    const auto n = inst.N();
    require(n >= 1, "need at least one candidate");
    Rng rng(seed);
    SupermodularityReport rep;
    for (std::size_t s = 0; s < samples; ++s) {
        const auto i = rng.below(n);
        DeploymentPlan b = DeploymentPlan::none(n), a = DeploymentPlan::none(n);
        for (std::size_t c = 0; c < n; ++c) {
            if (c == i) continue;
            b.deployed[c] = rng.bernoulli(0.5);
            a.deployed[c] = b.deployed[c] && rng.bernoulli(0.5);
        }
        auto ai = a, bi = b;
        ai.deployed[i] = bi.deployed[i] = true;
        const double lhs = set_function_f(inst, ai) - set_function_f(inst, a);
        const double rhs = set_function_f(inst, bi) - set_function_f(inst, b);
        ++rep.samples;
        const double gap = lhs - rhs;
        if (gap > tol * std::max(1.0, std::abs(rhs))) {
            ++rep.violations;
            rep.worst_gap = std::max(rep.worst_gap, gap);
        }
    }
    return rep;
}

struct SweepRow {
    double omega = 0;
    std::size_t hub_count = 0;
    double management = 0;
    double sync = 0;
    double cost = 0;
    std::string solver;
    double wall_time = 0;
    AllocationResult result;
};

enum class SolverChoice { Auto, Exact, Approx };

inline AllocationResult solve(const AllocationInstance& inst, SolverChoice choice, std::uint64_t seed,
                              const ExactOptions& opt = {}) {
    const bool exact =
        choice == SolverChoice::Exact || (choice == SolverChoice::Auto && inst.N() <= opt.max_candidates);
    return exact ? solve_exact(inst, opt) : double_greedy(inst, seed);
}

inline std::vector<SweepRow> omega_sweep(AllocationInstance inst, const std::vector<double>& omegas,
                                         SolverChoice choice = SolverChoice::Auto, std::uint64_t seed = 1,
                                         const ExactOptions& opt = {}) {
    std::vector<SweepRow> rows;
    for (double w : omegas) {
        inst.omega = w;
        const auto t0 = std::chrono::steady_clock::now();
        auto r = solve(inst, choice, seed, opt);
        const auto t1 = std::chrono::steady_clock::now();
        SweepRow row;
        row.omega = w;
        row.hub_count = r.x.count();
        row.management = r.management;
        row.sync = r.sync;
        row.cost = r.cost;
        row.solver = r.solver;
        row.wall_time = std::chrono::duration<double>(t1 - t0).count();
        row.result = std::move(r);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "omega,hub_count,C_M,C_S,C_B,solver,wall_time\n";
    for (const auto& r : rows)
        out << format_double(r.omega) << ',' << r.hub_count << ',' << format_double(r.management) << ','
            << format_double(r.sync) << ',' << format_double(r.cost) << ',' << r.solver << ','
            << format_double(r.wall_time) << '\n';
}

}  // namespace pcn
