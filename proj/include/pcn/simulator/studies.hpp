#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pcn/core/format.hpp"
#include "pcn/simulator/ccbt.hpp"
#include "pcn/simulator/engine.hpp"

namespace pcn {

// Runs independent simulations on worker threads. Results come back in
// input order, so output does not depend on scheduling.
inline std::vector<SimOutcome> run_parallel(const std::vector<SimConfig>& configs, unsigned threads = 0) {
    std::vector<SimOutcome> out(configs.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
            try {
                out[i] = run(configs[i]);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---- channel concurrency ----------------------------------------------------

// Multi-star network whose hub-to-hub forwarding is bounded by the batch
// processing model. Funds are ample so hub processing is the bottleneck.
inline SimConfig ccbt_scenario(std::uint64_t seed = 1) {
    SimConfig c;
    c.seed = seed;
    c.duration = 60;
    c.graph.kind = GraphKind::MultiStar;
    c.graph.clients = 40;
    c.graph.candidates = 8;
    c.graph.omega = 0.05;
    c.graph.spoke_balance = 1000;
    c.graph.hub_balance = 10000;
    c.processing.enabled = true;
    c.workload.random_pairs = 40;
    c.workload.pair_rate = 5;
    c.workload.amount.median = 2;
    c.workload.amount.mean = 4;
    return c;
}

struct ConcurrencyRow {
    int n_cc = 1;
    double tsr = 0, ntp = 0;
    std::size_t generated = 0, completed = 0;
};

inline std::vector<ConcurrencyRow> concurrent_channel_sweep(const SimConfig& base, int lo = 1, int hi = 10) {
    require(lo >= 1 && hi >= lo, "concurrency sweep needs 1 <= lo <= hi");
    std::vector<SimConfig> cfgs;
    for (int n = lo; n <= hi; ++n) {
        auto c = base;
        c.graph.n_cc = n;
        cfgs.push_back(std::move(c));
    }
    const auto outs = run_parallel(cfgs);
    std::vector<ConcurrencyRow> rows;
    for (std::size_t i = 0; i < outs.size(); ++i)
        rows.push_back({lo + static_cast<int>(i), outs[i].tsr, outs[i].ntp, outs[i].generated, outs[i].completed});
    return rows;
}

// Nondecreasing up to the first maximum and nonincreasing after it.
inline bool is_unimodal(const std::vector<double>& y) {
    if (y.empty()) return true;
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    for (std::size_t i = 1; i <= peak; ++i)
        if (y[i] < y[i - 1]) return false;
    for (std::size_t i = peak + 1; i < y.size(); ++i)
        if (y[i] > y[i - 1]) return false;
    return true;
}

inline CcbtFit fit_sweep(const std::vector<ConcurrencyRow>& rows) {
    std::vector<double> n, y;
    for (const auto& r : rows) {
        n.push_back(r.n_cc);
        y.push_back(r.ntp);
    }
    return ccbt_fit(n, y);
}

inline void write_concurrency_csv(std::ostream& out, const std::vector<ConcurrencyRow>& rows) {
    out << "n_cc,tsr,ntp,generated,completed\n";
    for (const auto& r : rows)
        out << r.n_cc << ',' << format_double(r.tsr) << ',' << format_double(r.ntp) << ',' << r.generated << ','
            << r.completed << '\n';
}

// ---- routing choices ----------------------------------------------------------

// 100-node small world under sustained overload: 20 random pairs plus their
// mirrors, 20 payments per second each.
inline SimConfig choice_scenario(std::uint64_t seed = 1) {
    SimConfig c;
    c.seed = seed;
    c.duration = 60;
    c.workload.random_pairs = 20;
    c.workload.pair_rate = 20;
    c.workload.amount.median = 2;
    c.workload.amount.mean = 4;
    return c;
}

struct ChoiceRow {
    PathKind kind = PathKind::EDW;
    std::size_t k = 5;
    QueuePolicy policy = QueuePolicy::LIFO;
    double tsr = 0, ntp = 0;
};

// Settings to try. cross runs every combination; otherwise each list is
// varied alone around the baseline (EDW, 5 paths, LIFO).
struct ChoiceGrid {
    std::vector<PathKind> kinds{PathKind::KSP, PathKind::Heuristic, PathKind::EDW, PathKind::EDS};
    std::vector<std::size_t> counts{1, 3, 5, 7};
    std::vector<QueuePolicy> policies{QueuePolicy::FIFO, QueuePolicy::LIFO, QueuePolicy::SPF, QueuePolicy::EDF};
    bool cross = true;
    PathKind base_kind = PathKind::EDW;
    std::size_t base_k = 5;
    QueuePolicy base_policy = QueuePolicy::LIFO;
};

inline std::vector<ChoiceRow> routing_choice_study(const SimConfig& base, const ChoiceGrid& grid = {}) {
    std::vector<ChoiceRow> rows;
    auto add = [&](PathKind kind, std::size_t k, QueuePolicy q) {
        for (const auto& r : rows)
            if (r.kind == kind && r.k == k && r.policy == q) return;
        rows.push_back({kind, k, q});
    };
    if (grid.cross) {
        for (auto kind : grid.kinds)
            for (auto k : grid.counts)
                for (auto q : grid.policies) add(kind, k, q);
    } else {
        for (auto kind : grid.kinds) add(kind, grid.base_k, grid.base_policy);
        for (auto k : grid.counts) add(grid.base_kind, k, grid.base_policy);
        for (auto q : grid.policies) add(grid.base_kind, grid.base_k, q);
    }
    std::vector<SimConfig> cfgs;
    for (const auto& r : rows) {
        auto c = base;
        c.routing.path_kind = r.kind;
        c.routing.k = r.k;
        c.routing.policy = r.policy;
        cfgs.push_back(std::move(c));
    }
    const auto outs = run_parallel(cfgs);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].tsr = outs[i].tsr;
        rows[i].ntp = outs[i].ntp;
    }
    return rows;
}

inline double choice_tsr(const std::vector<ChoiceRow>& rows, PathKind kind, std::size_t k, QueuePolicy q) {
    for (const auto& r : rows)
        if (r.kind == kind && r.k == k && r.policy == q) return r.tsr;
    throw InvalidArgument("setting not part of the study");
}

inline void write_choice_csv(std::ostream& out, const std::vector<ChoiceRow>& rows) {
    out << "path_kind,k,policy,tsr,ntp\n";
    for (const auto& r : rows)
        out << to_string(r.kind) << ',' << r.k << ',' << to_string(r.policy) << ',' << format_double(r.tsr) << ','
            << format_double(r.ntp) << '\n';
}

// Table layout: one block per dimension, the other two held at the baseline.
inline void write_choice_table(std::ostream& out, const std::vector<ChoiceRow>& rows, const ChoiceGrid& grid = {}) {
    out << "dimension,variant,tsr\n";
    for (auto kind : grid.kinds)
        out << "path_type," << to_string(kind) << ',' << format_double(choice_tsr(rows, kind, grid.base_k, grid.base_policy)) << '\n';
    for (auto k : grid.counts)
        out << "path_count," << k << ',' << format_double(choice_tsr(rows, grid.base_kind, k, grid.base_policy)) << '\n';
    for (auto q : grid.policies)
        out << "scheduling," << to_string(q) << ',' << format_double(choice_tsr(rows, grid.base_kind, grid.base_k, q)) << '\n';
}

}  // namespace pcn
