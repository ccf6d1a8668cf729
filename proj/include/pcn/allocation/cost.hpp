#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pcn/allocation/instance.hpp"
#include "pcn/allocation/plan.hpp"

namespace pcn {

inline void check_feasible(const AllocationInstance& inst, const DeploymentPlan& x, const AssignmentPlan& y) {
    if (x.size() != inst.N()) throw Infeasible("deployment plan size does not match candidate count");
    if (y.clients() != inst.M()) throw Infeasible("assignment plan size does not match client count");
    for (std::size_t m = 0; m < inst.M(); ++m) {
        const int n = y.hub_of[m];
        if (n < 0 || static_cast<std::size_t>(n) >= inst.N())
            throw Infeasible("client " + std::to_string(m) + " is unassigned");
        if (!x[static_cast<std::size_t>(n)])
            throw Infeasible("client " + std::to_string(m) + " assigned to undeployed candidate " + std::to_string(n));
    }
}

// C_M: sum of client-to-hub management costs.
inline double management_cost(const AllocationInstance& inst, const AssignmentPlan& y) {
    check_feasible(inst, DeploymentPlan::all(inst.N()), y);
    double total = 0;
    for (std::size_t m = 0; m < inst.M(); ++m) total += inst.z(m, static_cast<std::size_t>(y.hub_of[m]));
    return total;
}

inline std::vector<std::size_t> clients_per_hub(const AllocationInstance& inst, const AssignmentPlan& y) {
    std::vector<std::size_t> load(inst.N(), 0);
    for (int n : y.hub_of) ++load[static_cast<std::size_t>(n)];
    return load;
}

// C_S: pairwise hub synchronization cost.
inline double synchronization_cost(const AllocationInstance& inst, const DeploymentPlan& x, const AssignmentPlan& y) {
    check_feasible(inst, x, y);
    const auto load = clients_per_hub(inst, y);
    double total = 0;
    for (std::size_t n = 0; n < inst.N(); ++n) {
        if (!x[n]) continue;
        for (std::size_t l = 0; l < inst.N(); ++l)
            if (l != n && x[l]) total += inst.d(n, l) * static_cast<double>(load[n]) + inst.e(n, l);
    }
    return inst.pair_factor() * total;
}

inline double balanced_cost(const AllocationInstance& inst, const DeploymentPlan& x, const AssignmentPlan& y) {
    return management_cost(inst, y) + inst.omega * synchronization_cost(inst, x, y);
}

// Product linearization of x_n x_l and x_n x_l y_mn, as the MILP would carry it.
struct LinearizedWitness {
    std::size_t n = 0, m = 0;
    std::vector<int> theta;  // n x n
    std::vector<int> phi;    // n x n x m

    int th(std::size_t a, std::size_t b) const { return theta[a * n + b]; }
    int ph(std::size_t a, std::size_t b, std::size_t c) const { return phi[(a * n + b) * m + c]; }
};

inline LinearizedWitness build_witness(const AllocationInstance& inst, const DeploymentPlan& x,
                                       const AssignmentPlan& y) {
    LinearizedWitness w;
    w.n = inst.N();
    w.m = inst.M();
    w.theta.assign(w.n * w.n, 0);
    w.phi.assign(w.n * w.n * w.m, 0);
    for (std::size_t a = 0; a < w.n; ++a)
        for (std::size_t b = 0; b < w.n; ++b) {
            const int t = x[a] && x[b];
            w.theta[a * w.n + b] = t;
            for (std::size_t c = 0; c < w.m; ++c) w.phi[(a * w.n + b) * w.m + c] = t && y.y(c, a);
        }
    return w;
}

inline bool witness_satisfies_constraints(const LinearizedWitness& w, const DeploymentPlan& x,
                                          const AssignmentPlan& y) {
    for (std::size_t a = 0; a < w.n; ++a)
        for (std::size_t b = 0; b < w.n; ++b) {
            const int xa = x[a], xb = x[b], t = w.th(a, b);
            if (t > xa || t > xb || t < xa + xb - 1) return false;
            for (std::size_t c = 0; c < w.m; ++c) {
                const int p = w.ph(a, b, c), yc = y.y(c, a);
                if (p > t || p > yc || p < t + yc - 1) return false;
            }
        }
    return true;
}

// Linearized C_S: sum over n != l of delta * sum_m phi + eps * theta.
inline double linearized_sync_cost(const AllocationInstance& inst, const LinearizedWitness& w) {
    double total = 0;
    for (std::size_t a = 0; a < w.n; ++a)
        for (std::size_t b = 0; b < w.n; ++b) {
            if (a == b) continue;
            double served = 0;
            for (std::size_t c = 0; c < w.m; ++c) served += w.ph(a, b, c);
            total += inst.d(a, b) * served + inst.e(a, b) * w.th(a, b);
        }
    return inst.pair_factor() * total;
}

inline bool costs_agree(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace pcn
