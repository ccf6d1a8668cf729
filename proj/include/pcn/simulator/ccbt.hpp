#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "pcn/core/error.hpp"

namespace pcn {

// Universal-scalability shape of hub throughput in the number of parallel
// hub-to-hub channels.
struct CcbtParams {
    double epsilon = 1;  // throughput of a single channel
    double sigma = 0;    // contention
    double varpi = 0;    // coherence

    void validate() const {
        require(epsilon > 0, "ccbt epsilon must be positive");
        require(sigma >= 0 && sigma < 1, "ccbt contention must lie in [0, 1)");
        require(varpi >= 0 && varpi < 1, "ccbt coherence must lie in [0, 1)");
    }
};

inline double ccbt_throughput(double n_cc, const CcbtParams& p) {
    require(n_cc >= 1, "n_cc must be >= 1");
    p.validate();
    return p.epsilon * n_cc / (1 + p.sigma * (n_cc - 1) + p.varpi * n_cc * (n_cc - 1));
}

inline double ccbt_throughput(int n_cc, const CcbtParams& p) {
    require(n_cc >= 1, "n_cc must be >= 1");
    return ccbt_throughput(static_cast<double>(n_cc), p);
}

struct CcbtFit {
    CcbtParams params;
    double rms = 0;           // root mean squared residual
    double max_residual = 0;  // largest absolute residual
};

namespace detail {

inline double ccbt_sse(const std::vector<double>& n, const std::vector<double>& y, const CcbtParams& p) {
    double s = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double r = y[i] - ccbt_throughput(n[i], p);
        s += r * r;
    }
    return s;
}

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline bool solve3(const Mat3& a, const Vec3& b, Vec3& x) {
    const Eigen::ColPivHouseholderQR<Mat3> qr(a);
    if (qr.rank() < 3) return false;
    x = qr.solve(b);
    return x.allFinite();
}

inline CcbtParams ccbt_clamp(CcbtParams p) {
    constexpr double kTop = 1 - 1e-12;
    p.epsilon = std::max(p.epsilon, 1e-300);
    p.sigma = std::clamp(p.sigma, 0.0, kTop);
    p.varpi = std::clamp(p.varpi, 0.0, kTop);
    return p;
}

}  // namespace detail

// Least squares fit of (epsilon, sigma, varpi) with 0 <= sigma, varpi < 1.
// n / T is linear in (1/eps, sigma/eps, varpi/eps), which seeds a projected
// Levenberg-Marquardt refinement on the untransformed residual.
inline CcbtFit ccbt_fit(const std::vector<double>& n, const std::vector<double>& y) {
    require(n.size() == y.size(), "ccbt_fit needs matching n and throughput samples");
    std::set<double> distinct;
    for (std::size_t i = 0; i < n.size(); ++i) {
        require(n[i] >= 1, "ccbt_fit needs n >= 1");
        require(y[i] > 0 && std::isfinite(y[i]), "ccbt_fit needs positive throughput samples");
        distinct.insert(n[i]);
    }
    require(distinct.size() >= 3, "ccbt_fit needs at least 3 distinct n values");

    detail::Mat3 ata = detail::Mat3::Zero();
    detail::Vec3 atb = detail::Vec3::Zero();
    for (std::size_t i = 0; i < n.size(); ++i) {
        const detail::Vec3 row(1.0, n[i] - 1, n[i] * (n[i] - 1));
        ata += row * row.transpose();
        atb += row * (n[i] / y[i]);
    }
    CcbtParams p;
    detail::Vec3 lin;
    if (detail::solve3(ata, atb, lin) && lin[0] > 0) {
        p.epsilon = 1 / lin[0];
        p.sigma = lin[1] / lin[0];
        p.varpi = lin[2] / lin[0];
    } else {
        p.epsilon = y.front() / n.front();
    }
    p = detail::ccbt_clamp(p);

    double lambda = 1e-3;
    double sse = detail::ccbt_sse(n, y, p);
    for (int it = 0; it < 500 && sse > 0; ++it) {
        detail::Mat3 jtj = detail::Mat3::Zero();
        detail::Vec3 jtr = detail::Vec3::Zero();
        for (std::size_t i = 0; i < n.size(); ++i) {
            const double d = 1 + p.sigma * (n[i] - 1) + p.varpi * n[i] * (n[i] - 1);
            const double t = p.epsilon * n[i] / d;
            const detail::Vec3 g(n[i] / d, -t * (n[i] - 1) / d, -t * n[i] * (n[i] - 1) / d);
            jtj += g * g.transpose();
            jtr += g * (y[i] - t);
        }
        bool improved = false;
        while (lambda < 1e12) {
            detail::Mat3 m = jtj;
            m.diagonal() *= 1 + lambda;
            detail::Vec3 step;
            if (!detail::solve3(m, jtr, step)) {
                lambda *= 10;
                continue;
            }
            const auto q = detail::ccbt_clamp({p.epsilon + step[0], p.sigma + step[1], p.varpi + step[2]});
            const double s = detail::ccbt_sse(n, y, q);
            if (s < sse) {
                const double gain = sse - s;
                p = q;
                sse = s;
                lambda = std::max(lambda / 10, 1e-12);
                improved = gain > 1e-30 * std::max(1.0, sse);
                break;
            }
            lambda *= 10;
        }
        if (!improved) break;
    }

    CcbtFit fit;
    fit.params = p;
    fit.rms = std::sqrt(sse / static_cast<double>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i)
        fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - ccbt_throughput(n[i], p)));
    return fit;
}

// Integer maximiser of the formula over [1, limit]; ties go to the smaller n.
inline int ccbt_argmax(const CcbtParams& p, int limit = 100) {
    int best = 1;
    for (int k = 2; k <= limit; ++k)
        if (ccbt_throughput(k, p) > ccbt_throughput(best, p)) best = k;
    return best;
}

}  // namespace pcn
