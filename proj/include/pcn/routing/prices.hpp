#pragma once

#include <optional>
#include <vector>

#include "pcn/core/error.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn {

struct PriceParams {
    double kappa = 0.002;
    double eta = 3.0;
    double t_fee = 0.1;

    void validate() const {
        require(kappa > 0 && eta > 0, "price step sizes must be positive");
        require(t_fee > 0 && t_fee < 1, "T_fee must lie in (0, 1)");
    }
};

// lambda is per channel; mu[dir] is the imbalance price of direction dir.
struct ChannelPrice {
    double lambda = 0;
    double mu[2] = {0, 0};
};

// Per-direction inputs of one price period. n[d]: funds needed to sustain the
// current rate in direction d; m[d]: value that arrived to be forwarded in d.
struct FlowStats {
    double n[2] = {0, 0};
    double m[2] = {0, 0};
};

class PriceState {
public:
    PriceState() = default;
    PriceState(std::size_t channels, PriceParams p) : params_(p), prices_(channels) { p.validate(); }

    const PriceParams& params() const { return params_; }
    std::size_t size() const { return prices_.size(); }
    const ChannelPrice& at(ChannelIdx c) const { return prices_.at(c); }
    ChannelPrice& at(ChannelIdx c) { return prices_.at(c); }

    // lambda <- max(0, lambda + kappa (n_a + n_b - c))
    double update_capacity(ChannelIdx c, const FlowStats& s, Tokens capacity) {
        auto& p = prices_.at(c);
        p.lambda = std::max(0.0, p.lambda + params_.kappa * (s.n[0] + s.n[1] - capacity));
        return p.lambda;
    }

    // Antisymmetric: mu_ab moves by eta (m_a - m_b), mu_ba by the negation.
    void update_imbalance(ChannelIdx c, const FlowStats& s) {
        auto& p = prices_.at(c);
        const double step = params_.eta * (s.m[0] - s.m[1]);
        p.mu[0] += step;
        p.mu[1] -= step;
    }

    // xi = 2 lambda + mu_ab - mu_ba, oriented along h.
    double channel_price(Hop h) const {
        const auto& p = prices_.at(h.channel);
        return 2 * p.lambda + p.mu[h.dir] - p.mu[1 - h.dir];
    }

    double forwarding_fee(Hop h) const { return std::max(0.0, params_.t_fee * channel_price(h)); }

    double path_price(std::span<const Hop> hops) const {
        double sum = 0;
        for (const auto& h : hops) sum += channel_price(h);
        return (1 + params_.t_fee) * sum;
    }

    // Probe along the path; nullopt when the path no longer matches the graph.
    std::optional<double> probe(const PcnGraph& g, const Path& p) const {
        if (!is_valid_path(g, p)) return std::nullopt;
        for (const auto& h : p.hops)
            if (h.channel >= prices_.size()) return std::nullopt;
        return path_price(p.hops);
    }

private:
    PriceParams params_;
    std::vector<ChannelPrice> prices_;
};

}  // namespace pcn
