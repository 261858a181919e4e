#pragma once

// The measure-and-update protocol: decompose the free pointer state into a
// classical mixture of constant-velocity elements labelled by the particle
// coordinate, select an element by observation (ideal or noisy), and update
// the particle density by conditioning on the readout.

#include <cmath>
#include <cstdint>
#include <optional>

#include "cqsim/analytic.hpp"
#include "cqsim/core.hpp"
#include "cqsim/rng.hpp"

namespace cqsim {

// ---------------------------------------------------------------------------
// Classical mixture of the pointer
// ---------------------------------------------------------------------------

/// Family of conditional pointer states labelled by q. Each element is a
/// point pointer on the trajectory x(t) = lambda*q*t carrying the action of a
/// particle of mass M moving at the constant velocity lambda*q; the label
/// weight is the initial particle density, frozen during the short
/// interaction window. Delta elements are kept symbolic (trajectory + label),
/// never as grid spikes.
struct PointerMixture {
    PhysicalParams params;
    double t = 0.0;            ///< decomposition time, > epsilon
    Grid1D labels;             ///< label axis in q
    GaussianMixture1D weight;  ///< label weight density

    double trajectory(double q, double at_t) const { return params.lambda * q * at_t; }
    double action(double x, double at_t, double q) const {
        return element_action(x, at_t, q, params);
    }
    double weight_density(double q) const { return weight.pdf(q); }

    /// Density obtained by marginalizing the delta elements against the
    /// weights: the change of variables x = lambda*q*t gives exactly the
    /// narrow two-Gaussian pointer density.
    GaussianMixture1D marginal_density() const {
        return free_pointer_density(params, t, PointerWidth::Narrow);
    }
};

inline PointerMixture decompose_pointer_mixture(const PhysicalParams& p, double t,
                                                std::size_t n_labels = 2001) {
    if (!(t > p.epsilon))
        throw SimError(ErrorCode::TimeBeforeInteractionEnd,
                       "mixture decomposition is defined for t > epsilon");
    if (!narrow_pointer_regime(p, t))
        throw SimError(ErrorCode::RegimeViolation,
                       "pointer spread sigma_C must be below 0.1*sigma_Q*|lambda|*t");
    const double qext = p.q0 + 8.0 * p.sigma_Q;
    return PointerMixture{p, t, Grid1D(-qext, qext, n_labels), initial_particle_density(p)};
}

/// Pointer state after an ideal observation: one element of the mixture.
/// The position is sharp and follows x(t) = lambda*q'*t from then on.
struct CollapsedPointer {
    PhysicalParams params;
    double q_label = 0.0;
    double collapsed_at = 0.0;

    double position(double at_t) const { return params.lambda * q_label * at_t; }
    double velocity() const { return params.lambda * q_label; }
    double action(double x, double at_t) const {
        return element_action(x, at_t, q_label, params);
    }
};

inline CollapsedPointer collapse_pointer(const PointerMixture& mix, double q_prime, double t) {
    if (q_prime < mix.labels.min || q_prime > mix.labels.max)
        throw SimError(ErrorCode::LabelOutOfRange, "label outside the mixture axis");
    return CollapsedPointer{mix.params, q_prime, t};
}

/// Draws a label from the weight density by inverse-CDF sampling restricted
/// to the label axis, then collapses onto it.
inline std::pair<double, CollapsedPointer> sample_measurement(const PointerMixture& mix,
                                                              Rng& rng) {
    const double flo = mix.weight.cdf(mix.labels.min);
    const double fhi = mix.weight.cdf(mix.labels.max);
    if (!(fhi - flo > 1e-12))
        throw SimError(ErrorCode::DegenerateWeights, "weight density has no mass on the label axis");
    const double target = flo + rng.uniform() * (fhi - flo);
    double lo = mix.labels.min, hi = mix.labels.max;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mix.weight.cdf(mid) < target) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-15 * (1.0 + std::abs(mid))) break;
    }
    const double q_prime = 0.5 * (lo + hi);
    return {q_prime, collapse_pointer(mix, q_prime, mix.t)};
}

inline std::pair<double, CollapsedPointer> sample_measurement(const PointerMixture& mix,
                                                              std::uint64_t seed) {
    Rng rng(seed);
    return sample_measurement(mix, rng);
}

// ---------------------------------------------------------------------------
// Records and posteriors
// ---------------------------------------------------------------------------

/// Pointer readout: position x_m observed at time t_m with readout
/// uncertainty sigma_m (zero for an ideal observation).
struct MeasurementRecord {
    double t_m = 0.0;
    double x_m = 0.0;
    double sigma_m = 0.0;

    void validate(const PhysicalParams& p) const {
        if (!(t_m > p.epsilon))
            throw SimError(ErrorCode::InvalidRecord, "t_m must exceed the interaction window");
        if (!(sigma_m >= 0.0) || !std::isfinite(x_m) || !std::isfinite(t_m))
            throw SimError(ErrorCode::InvalidRecord, "record fields must be finite, sigma_m >= 0");
    }
};

/// Post-measurement state. Carries only the selected label (or a density over
/// labels) and the particle posterior; by construction it has no dependence
/// on the pointer coordinate, so the two subsystems are independent.
struct Posterior {
    GaussianMixture1D quantum;  ///< particle posterior over q
    double pointer_label = 0.0; ///< selected element (ideal) or posterior mean (noisy)
    std::optional<GaussianMixture1D> label_density;  ///< over labels, noisy case
    bool independent = true;
};

/// Ideal update: the readout localizes the particle at q_m = x_m/(lambda t_m)
/// with spread sigma_C/(lambda t_m), independent of the prepared width sigma_Q.
inline Posterior update_quantum(const MeasurementRecord& rec, const PhysicalParams& p) {
    rec.validate(p);
    if (rec.sigma_m != 0.0)
        throw SimError(ErrorCode::InvalidRecord, "ideal update requires sigma_m = 0");
    const double q_m = rec.x_m / (p.lambda * rec.t_m);
    const double sigma = std::abs(p.sigma_C / (p.lambda * rec.t_m));
    Posterior post;
    post.quantum = GaussianMixture1D({{1.0, q_m, sigma}});
    post.pointer_label = q_m;
    post.independent = true;
    return post;
}

/// Noisy update: conjugate combination of the label prior with the Gaussian
/// likelihood N(x_m; lambda*q*t_m, sigma_m^2 + sigma_C^2). The apparatus
/// spread and the readout noise add in quadrature; the result reduces to the
/// ideal update as sigma_m -> 0 and to the prior as sigma_m -> infinity.
inline Posterior update_quantum_noisy(const MeasurementRecord& rec, const PhysicalParams& p) {
    rec.validate(p);
    if (!(rec.sigma_m > 0.0))
        throw SimError(ErrorCode::InvalidRecord, "noisy update requires sigma_m > 0");
    const double kt = p.lambda * rec.t_m;
    const double s2 = rec.sigma_m * rec.sigma_m + p.sigma_C * p.sigma_C;

    const GaussianMixture1D prior = initial_particle_density(p);
    std::vector<GaussianComponent> comps;
    std::vector<double> logw;
    double logw_max = -std::numeric_limits<double>::infinity();
    for (const auto& c : prior.components()) {
        const double prec = 1.0 / (c.sigma * c.sigma) + kt * kt / s2;
        const double var = 1.0 / prec;
        const double mean = var * (c.mean / (c.sigma * c.sigma) + kt * rec.x_m / s2);
        const double evid_var = s2 + kt * kt * c.sigma * c.sigma;
        const double resid = rec.x_m - kt * c.mean;
        const double lw = std::log(c.weight) - 0.5 * resid * resid / evid_var -
                          0.5 * std::log(evid_var);
        comps.push_back({1.0, mean, std::sqrt(var)});
        logw.push_back(lw);
        logw_max = std::max(logw_max, lw);
    }
    double norm = 0.0;
    for (double lw : logw) norm += std::exp(lw - logw_max);
    for (std::size_t i = 0; i < comps.size(); ++i)
        comps[i].weight = std::exp(logw[i] - logw_max) / norm;

    Posterior post;
    post.quantum = GaussianMixture1D(comps);
    post.label_density = post.quantum;
    post.pointer_label = post.quantum.mean();
    post.independent = true;
    return post;
}

// ---------------------------------------------------------------------------
// Sampling oracle
// ---------------------------------------------------------------------------

/// Draws n pointer positions x = lambda*q*t with q from the exact two-packet
/// sampler; the histogram of these trajectories is the reference for the
/// narrow pointer density.
inline std::vector<double> monte_carlo_pointer(const PhysicalParams& p, double t, std::size_t n,
                                               std::uint64_t seed) {
    if (n < 1) throw SimError(ErrorCode::InvalidConfig, "need at least one sample");
    if (!(t > p.epsilon))
        throw SimError(ErrorCode::TimeBeforeInteractionEnd, "sampling is defined for t > epsilon");
    Rng rng(seed);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double center = (p.q0 == 0.0) ? 0.0 : (rng.uniform() < 0.5 ? -p.q0 : p.q0);
        const double q = center + p.sigma_Q * rng.normal();
        xs[i] = p.lambda * q * t;
    }
    return xs;
}

}  // namespace cqsim
