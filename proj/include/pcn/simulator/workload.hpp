#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "pcn/core/random.hpp"
#include "pcn/routing/demand.hpp"
#include "pcn/simulator/config.hpp"

namespace pcn {

inline Tokens draw_amount(Rng& rng, const AmountSpec& a, Tokens largest_capacity) {
    if (a.whale_fraction > 0 && rng.bernoulli(a.whale_fraction))
        return std::max(kTokenQuantum, quantize(a.whale_factor * largest_capacity));
    double x = a.median;
    if (a.mean > a.median) x = rng.lognormal(std::log(a.median), std::sqrt(2 * std::log(a.mean / a.median)));
    return std::max({kTokenQuantum, quantize(a.min), quantize(x)});
}

// Configured streams followed by the random ones.
inline std::vector<StreamSpec> expand_streams(const WorkloadSpec& w, const std::vector<NodeId>& endpoints,
                                              std::uint64_t seed) {
    auto streams = w.streams;
    if (w.random_pairs == 0) return streams;
    require(endpoints.size() >= 2, "random workload needs at least two endpoints");
    const std::size_t possible = endpoints.size() * (endpoints.size() - 1) / (w.circulation ? 2 : 1);
    require(w.random_pairs <= possible, "more random pairs requested than endpoint pairs exist");
    Rng rng(mix_seed(seed, 10));
    std::set<std::pair<std::size_t, std::size_t>> used;
    while (used.size() < (w.circulation ? 2 : 1) * w.random_pairs) {
        const auto s = index(endpoints[rng.below(endpoints.size())]);
        const auto e = index(endpoints[rng.below(endpoints.size())]);
        if (s == e || used.count({s, e})) continue;
        if (w.circulation && used.count({e, s})) continue;
        used.insert({s, e});
        StreamSpec st;
        st.source = s;
        st.dest = e;
        st.rate = w.pair_rate;
        st.amount = w.amount;
        streams.push_back(st);
        if (w.circulation) {
            used.insert({e, s});
            std::swap(st.source, st.dest);
            streams.push_back(st);
        }
    }
    return streams;
}

// Every arrival in [0, duration), sorted by time, tids in arrival order.
inline std::vector<Demand> generate_demands(const WorkloadSpec& w, const std::vector<NodeId>& endpoints,
                                            Tokens largest_capacity, double duration, std::uint64_t seed) {
    const auto streams = expand_streams(w, endpoints, seed);
    std::vector<std::tuple<double, std::size_t, Demand>> all;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const auto& s = streams[i];
        Rng rng(mix_seed(seed, 1000 + i));
        std::size_t count = 0;
        double t = s.periodic ? s.phase : s.phase + rng.exponential(s.rate);
        while (t < duration) {
            ++count;
            Demand d;
            d.source = node(s.source);
            d.dest = node(s.dest);
            d.amount = draw_amount(rng, s.amount, largest_capacity);
            d.arrival = t;
            d.deadline = t + w.deadline;
            all.emplace_back(t, i, d);
            t = s.periodic ? s.phase + static_cast<double>(count) / s.rate : t + rng.exponential(s.rate);
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y));
    });
    std::vector<Demand> out;
    out.reserve(all.size());
    for (auto& [t, i, d] : all) {
        d.tid = out.size();
        out.push_back(d);
    }
    return out;
}

}  // namespace pcn
