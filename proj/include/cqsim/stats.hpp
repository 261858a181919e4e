#pragma once

// Goodness-of-fit helpers used by the sampling oracles: Kolmogorov-Smirnov
// statistic against an analytic CDF, chi-square p-values via the regularized
// incomplete gamma function, and folded-normal moments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/core.hpp"

namespace cqsim {

/// Kolmogorov-Smirnov statistic of samples against a reference CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    if (samples.empty()) throw SimError(ErrorCode::InvalidConfig, "KS needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - double(i + 1) / n));
        d = std::max(d, std::abs(f - double(i) / n));
    }
    return d;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series expansion (x < a+1).
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by continued fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw SimError(ErrorCode::InvalidConfig, "gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

/// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double stat, double df) {
    return gamma_q(0.5 * df, 0.5 * stat);
}

/// Pearson chi-square of samples against a mixture, with outer bins open and
/// low-expectation bins merged forward. Returns {statistic, degrees of freedom}.
struct ChiSquareResult {
    double statistic = 0.0;
    double df = 0.0;
    double pvalue = 1.0;
};

inline ChiSquareResult chi_square_gof(std::span<const double> samples,
                                      const GaussianMixture1D& ref, std::size_t n_bins) {
    if (n_bins < 3) throw SimError(ErrorCode::InvalidConfig, "need at least 3 bins");
    const double lo = ref.min_support(6.0), hi = ref.max_support(6.0);
    const double h = (hi - lo) / double(n_bins - 2);
    const double n = double(samples.size());

    std::vector<double> observed(n_bins, 0.0), expected(n_bins, 0.0);
    for (double s : samples) {
        std::size_t b;
        if (s < lo) b = 0;
        else if (s >= hi) b = n_bins - 1;
        else b = 1 + std::size_t((s - lo) / h);
        observed[std::min(b, n_bins - 1)] += 1.0;
    }
    double prev = 0.0;
    for (std::size_t b = 0; b + 1 < n_bins; ++b) {
        const double edge = (b == 0) ? lo : lo + h * double(b);
        const double c = ref.cdf(edge);
        expected[b] = (c - prev) * n;
        prev = c;
    }
    expected[n_bins - 1] = (1.0 - prev) * n;

    // Merge bins with expected count below 5 into their neighbour.
    std::vector<double> obs_m, exp_m;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        o_acc += observed[b];
        e_acc += expected[b];
        if (e_acc >= 5.0) {
            obs_m.push_back(o_acc);
            exp_m.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 && !exp_m.empty()) {
        obs_m.back() += o_acc;
        exp_m.back() += e_acc;
    }
    if (exp_m.size() < 2) throw SimError(ErrorCode::DegenerateWeights, "too few usable bins");

    ChiSquareResult r;
    for (std::size_t b = 0; b < exp_m.size(); ++b) {
        const double d = obs_m[b] - exp_m[b];
        r.statistic += d * d / exp_m[b];
    }
    r.df = double(exp_m.size() - 1);
    r.pvalue = chi_square_pvalue(r.statistic, r.df);
    return r;
}

/// E|X| for X ~ N(mean, sigma^2).
inline double folded_normal_mean(double mean, double sigma) {
    const double z = mean / sigma;
    return sigma * std::sqrt(2.0 / M_PI) * std::exp(-0.5 * z * z) +
           mean * std::erf(z / std::sqrt(2.0));
}

/// E|X| under a Gaussian mixture.
inline double mean_abs(const GaussianMixture1D& mix) {
    double s = 0.0;
    for (const auto& c : mix.components()) s += c.weight * folded_normal_mean(c.mean, c.sigma);
    return s;
}

}  // namespace cqsim
