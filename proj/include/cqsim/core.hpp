#pragma once

// Core domain types shared by every other module: physical parameters,
// uniform grids, sampled fields, Gaussian mixtures, the piecewise-constant
// coupling profile, and trapezoid quadrature. All types are immutable value
// types after construction and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqsim {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
    NonPositiveMass,
    NonPositiveWidth,
    ZeroCoupling,
    NonPositiveDuration,
    NegativeHbar,
    NegativeSeparation,
    GridMismatch,
    GridTooCoarse,
    NegativeTime,
    ZeroTime,
    ZeroK,
    TimeBeforeInteractionEnd,
    RegimeViolation,
    LabelOutOfRange,
    DegenerateWeights,
    InvalidRecord,
    CflViolation,
    NonFiniteField,
    DensityFloorViolation,
    InvalidConfig,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonPositiveMass: return "NonPositiveMass";
        case ErrorCode::NonPositiveWidth: return "NonPositiveWidth";
        case ErrorCode::ZeroCoupling: return "ZeroCoupling";
        case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
        case ErrorCode::NegativeHbar: return "NegativeHbar";
        case ErrorCode::NegativeSeparation: return "NegativeSeparation";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::ZeroTime: return "ZeroTime";
        case ErrorCode::ZeroK: return "ZeroK";
        case ErrorCode::TimeBeforeInteractionEnd: return "TimeBeforeInteractionEnd";
        case ErrorCode::RegimeViolation: return "RegimeViolation";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::DegenerateWeights: return "DegenerateWeights";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::CflViolation: return "CflViolation";
        case ErrorCode::NonFiniteField: return "NonFiniteField";
        case ErrorCode::DensityFloorViolation: return "DensityFloorViolation";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

/// Exception carrying a machine-readable error code alongside the message.
class SimError : public std::runtime_error {
public:
    SimError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

/// Parameters of the pointer/particle pair and their coupling.
///
/// M, m       masses of the pointer and the quantum particle
/// hbar       reduced Planck constant (0 gives the classical limit)
/// lambda     coupling rate of the momentum-position interaction, 1/time
/// epsilon    duration of the interaction window (0, epsilon]
/// sigma_C    initial pointer position spread
/// sigma_Q    initial width of each quantum packet
/// q0         half-separation of the two quantum packets (centers at +-q0)
struct PhysicalParams {
    double M = 1.0;
    double m = 1.0;
    double hbar = 1.0;
    double lambda = 1.0;
    double epsilon = 1e-3;
    double sigma_C = 0.05;
    double sigma_Q = 0.1;
    double q0 = 1.0;

    /// True when the pointer spread resolves the two packet centers (sigma_C < q0).
    bool well_separated() const { return sigma_C < q0; }
};

/// Desk-scale default parameter set used by the bundled configs and tests.
/// These are artifact choices: the interaction window is kept short against
/// the packet dispersion time 2*m*sigma_Q^2/hbar so the rigid-shift regime
/// actually holds at these magnitudes.
inline PhysicalParams default_params() { return PhysicalParams{}; }

/// Checks every parameter invariant and returns the complete list of
/// violations; an empty list means the record is valid as-is.
inline std::vector<ErrorCode> validate_params(const PhysicalParams& p) {
    std::vector<ErrorCode> errs;
    if (!(p.M > 0.0) || !(p.m > 0.0)) errs.push_back(ErrorCode::NonPositiveMass);
    if (!(p.sigma_C > 0.0) || !(p.sigma_Q > 0.0)) errs.push_back(ErrorCode::NonPositiveWidth);
    if (p.lambda == 0.0 || !std::isfinite(p.lambda)) errs.push_back(ErrorCode::ZeroCoupling);
    if (!(p.epsilon > 0.0)) errs.push_back(ErrorCode::NonPositiveDuration);
    if (!(p.hbar >= 0.0)) errs.push_back(ErrorCode::NegativeHbar);
    if (!(p.q0 >= 0.0)) errs.push_back(ErrorCode::NegativeSeparation);
    return errs;
}

/// Throwing variant: returns the record unchanged when valid.
inline PhysicalParams validated(const PhysicalParams& p) {
    auto errs = validate_params(p);
    if (!errs.empty()) {
        std::string msg = "invalid parameters:";
        for (auto e : errs) msg += std::string(" ") + error_name(e);
        throw SimError(errs.front(), msg);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Grids and fields
// ---------------------------------------------------------------------------

/// Uniform 1-D grid of n >= 2 points spanning [min, max].
struct Grid1D {
    double min = 0.0;
    double max = 1.0;
    std::size_t n = 2;

    Grid1D() = default;
    Grid1D(double min_, double max_, std::size_t n_) : min(min_), max(max_), n(n_) {
        if (n < 2) throw SimError(ErrorCode::InvalidConfig, "grid needs at least 2 points");
        if (!(max > min)) throw SimError(ErrorCode::InvalidConfig, "grid max must exceed min");
    }

    double spacing() const { return (max - min) / double(n - 1); }
    double coord(std::size_t i) const { return min + spacing() * double(i); }

    std::vector<double> coords() const {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = coord(i);
        return c;
    }
};

/// Tensor product of an x-axis (pointer) and a q-axis (particle).
struct Grid2D {
    Grid1D x;
    Grid1D q;
};

/// Dense field sampled on a Grid2D, row-major with x as the slow index.
struct Field2D {
    std::size_t nx = 0;
    std::size_t nq = 0;
    std::vector<double> v;

    Field2D() = default;
    Field2D(std::size_t nx_, std::size_t nq_, double fill = 0.0)
        : nx(nx_), nq(nq_), v(nx_ * nq_, fill) {}

    double& at(std::size_t ix, std::size_t iq) { return v[ix * nq + iq]; }
    double at(std::size_t ix, std::size_t iq) const { return v[ix * nq + iq]; }
    std::size_t size() const { return v.size(); }

    bool matches(const Grid2D& g) const { return nx == g.x.n && nq == g.q.n; }
};

// ---------------------------------------------------------------------------
// Trapezoid quadrature
// ---------------------------------------------------------------------------

inline double integrate_1d(std::span<const double> f, const Grid1D& g) {
    if (f.size() != g.n)
        throw SimError(ErrorCode::GridMismatch, "field length does not match grid size");
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < g.n; ++i) s += f[i];
    return s * g.spacing();
}

inline double integrate_2d(const Field2D& f, const Grid2D& g) {
    if (!f.matches(g))
        throw SimError(ErrorCode::GridMismatch, "field shape does not match grid");
    const double hx = g.x.spacing(), hq = g.q.spacing();
    double s = 0.0;
    for (std::size_t ix = 0; ix < f.nx; ++ix) {
        const double wx = (ix == 0 || ix + 1 == f.nx) ? 0.5 : 1.0;
        double row = 0.5 * (f.at(ix, 0) + f.at(ix, f.nq - 1));
        for (std::size_t iq = 1; iq + 1 < f.nq; ++iq) row += f.at(ix, iq);
        s += wx * row;
    }
    return s * hx * hq;
}

// ---------------------------------------------------------------------------
// Finite differences (second order, one-sided at the boundary)
// ---------------------------------------------------------------------------

/// d/du along a sampled line.
inline void diff_line(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

/// d^2/du^2 along a sampled line.
inline void diff2_line(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    const double h2 = h * h;
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
}

/// Partial derivative of a 2-D field along x.
inline Field2D diff_x(const Field2D& f, const Grid2D& g) {
    Field2D out(f.nx, f.nq);
    const double h = g.x.spacing();
    std::vector<double> col(f.nx), dcol(f.nx);
    for (std::size_t iq = 0; iq < f.nq; ++iq) {
        for (std::size_t ix = 0; ix < f.nx; ++ix) col[ix] = f.at(ix, iq);
        diff_line(col, h, dcol);
        for (std::size_t ix = 0; ix < f.nx; ++ix) out.at(ix, iq) = dcol[ix];
    }
    return out;
}

/// Partial derivative of a 2-D field along q.
inline Field2D diff_q(const Field2D& f, const Grid2D& g) {
    Field2D out(f.nx, f.nq);
    const double h = g.q.spacing();
    for (std::size_t ix = 0; ix < f.nx; ++ix) {
        std::span<const double> row(&f.v[ix * f.nq], f.nq);
        std::span<double> drow(&out.v[ix * f.nq], f.nq);
        diff_line(row, h, drow);
    }
    return out;
}

/// Second partial derivative of a 2-D field along x.
inline Field2D diff2_x(const Field2D& f, const Grid2D& g) {
    Field2D out(f.nx, f.nq);
    const double h = g.x.spacing();
    std::vector<double> col(f.nx), dcol(f.nx);
    for (std::size_t iq = 0; iq < f.nq; ++iq) {
        for (std::size_t ix = 0; ix < f.nx; ++ix) col[ix] = f.at(ix, iq);
        diff2_line(col, h, dcol);
        for (std::size_t ix = 0; ix < f.nx; ++ix) out.at(ix, iq) = dcol[ix];
    }
    return out;
}

/// Second partial derivative of a 2-D field along q.
inline Field2D diff2_q(const Field2D& f, const Grid2D& g) {
    Field2D out(f.nx, f.nq);
    const double h = g.q.spacing();
    for (std::size_t ix = 0; ix < f.nx; ++ix) {
        std::span<const double> row(&f.v[ix * f.nq], f.nq);
        std::span<double> drow(&out.v[ix * f.nq], f.nq);
        diff2_line(row, h, drow);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hybrid state
// ---------------------------------------------------------------------------

/// The (P, S) pair sampled on a 2-D grid at time t.
struct HybridState {
    Grid2D grid;
    Field2D P;
    Field2D S;
    double t = 0.0;

    double mass() const { return integrate_2d(P, grid); }

    /// Checks nonnegativity of P and the normalization window.
    void validate(double norm_tol = 1e-6) const {
        if (!P.matches(grid) || !S.matches(grid))
            throw SimError(ErrorCode::GridMismatch, "state fields do not match grid");
        for (double v : P.v)
            if (v < 0.0)
                throw SimError(ErrorCode::DensityFloorViolation, "negative probability density");
        const double m = mass();
        if (std::abs(m - 1.0) > norm_tol)
            throw SimError(ErrorCode::InvalidConfig,
                           "density integrates to " + std::to_string(m) + ", outside tolerance");
    }
};

// ---------------------------------------------------------------------------
// Gaussian mixtures
// ---------------------------------------------------------------------------

struct GaussianComponent {
    double weight = 1.0;
    double mean = 0.0;
    double sigma = 1.0;
};

inline double gaussian_pdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

inline double gaussian_cdf(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

/// Weighted sum of 1-D Gaussians; the carrier for every closed-form density.
/// Weights must be positive and sum to one within 1e-12, sigmas positive.
class GaussianMixture1D {
public:
    GaussianMixture1D() = default;

    explicit GaussianMixture1D(std::vector<GaussianComponent> comps)
        : comps_(std::move(comps)) {
        if (comps_.empty())
            throw SimError(ErrorCode::InvalidConfig, "mixture needs at least one component");
        double wsum = 0.0;
        for (const auto& c : comps_) {
            if (!(c.weight > 0.0))
                throw SimError(ErrorCode::InvalidConfig, "mixture weights must be positive");
            if (!(c.sigma > 0.0))
                throw SimError(ErrorCode::NonPositiveWidth, "mixture sigma must be positive");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw SimError(ErrorCode::InvalidConfig, "mixture weights must sum to 1");
    }

    const std::vector<GaussianComponent>& components() const { return comps_; }

    double pdf(double x) const {
        double s = 0.0;
        for (const auto& c : comps_) s += c.weight * gaussian_pdf(x, c.mean, c.sigma);
        return s;
    }

    double cdf(double x) const {
        double s = 0.0;
        for (const auto& c : comps_) s += c.weight * gaussian_cdf(x, c.mean, c.sigma);
        return s;
    }

    double mean() const {
        double s = 0.0;
        for (const auto& c : comps_) s += c.weight * c.mean;
        return s;
    }

    double min_support(double pad_sigmas = 8.0) const {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& c : comps_) lo = std::min(lo, c.mean - pad_sigmas * c.sigma);
        return lo;
    }

    double max_support(double pad_sigmas = 8.0) const {
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& c : comps_) hi = std::max(hi, c.mean + pad_sigmas * c.sigma);
        return hi;
    }

    /// Inverse CDF by bisection on the error-function form.
    double quantile(double u) const {
        if (!(u >= 0.0 && u <= 1.0))
            throw SimError(ErrorCode::InvalidConfig, "quantile argument outside [0,1]");
        double lo = min_support(14.0), hi = max_support(14.0);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cdf(mid) < u) lo = mid;
            else hi = mid;
            if (hi - lo < 1e-15 * (1.0 + std::abs(mid))) break;
        }
        return 0.5 * (lo + hi);
    }

    std::vector<double> sample_pdf(const Grid1D& g) const {
        std::vector<double> out(g.n);
        for (std::size_t i = 0; i < g.n; ++i) out[i] = pdf(g.coord(i));
        return out;
    }

private:
    std::vector<GaussianComponent> comps_;
};

/// Grid covering every component out to pad_sigmas standard deviations.
inline Grid1D cover(const GaussianMixture1D& mix, double pad_sigmas, std::size_t n) {
    return Grid1D(mix.min_support(pad_sigmas), mix.max_support(pad_sigmas), n);
}

/// L1 distance between two densities by quadrature of |a - b| on g.
inline double l1_distance(const GaussianMixture1D& a, const GaussianMixture1D& b,
                          const Grid1D& g) {
    std::vector<double> d(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double u = g.coord(i);
        d[i] = std::abs(a.pdf(u) - b.pdf(u));
    }
    return integrate_1d(d, g);
}

// ---------------------------------------------------------------------------
// Coupling profile
// ---------------------------------------------------------------------------

/// Piecewise-constant coupling rate alpha(t); the default profile is a single
/// segment (0, epsilon] at the rate lambda.
class AlphaProfile {
public:
    struct Segment {
        double t0 = 0.0;
        double t1 = 0.0;
        double rate = 0.0;
    };

    AlphaProfile() = default;

    explicit AlphaProfile(std::vector<Segment> segments) : segments_(std::move(segments)) {
        std::sort(segments_.begin(), segments_.end(),
                  [](const Segment& a, const Segment& b) { return a.t0 < b.t0; });
        double prev_end = -std::numeric_limits<double>::infinity();
        for (const auto& s : segments_) {
            if (!(s.t1 > s.t0))
                throw SimError(ErrorCode::InvalidConfig, "profile segment must have t1 > t0");
            if (s.t0 < prev_end - 1e-15)
                throw SimError(ErrorCode::InvalidConfig, "profile segments overlap");
            if (!std::isfinite(s.rate))
                throw SimError(ErrorCode::InvalidConfig, "profile rate must be finite");
            prev_end = s.t1;
        }
    }

    static AlphaProfile constant(double rate, double duration) {
        return AlphaProfile({Segment{0.0, duration, rate}});
    }

    static AlphaProfile for_params(const PhysicalParams& p) {
        return constant(p.lambda, p.epsilon);
    }

    const std::vector<Segment>& segments() const { return segments_; }

    double rate_at(double t) const {
        for (const auto& s : segments_)
            if (t > s.t0 && t <= s.t1) return s.rate;
        return 0.0;
    }

    /// Exact integral of the rate over [0, t].
    double integrated(double t) const {
        if (t < 0.0) throw SimError(ErrorCode::NegativeTime, "profile integral needs t >= 0");
        double k = 0.0;
        for (const auto& s : segments_) {
            const double lo = std::max(0.0, s.t0);
            const double hi = std::min(t, s.t1);
            if (hi > lo) k += s.rate * (hi - lo);
        }
        return k;
    }

    /// Times where the rate jumps; integrators must not step across them.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& s : segments_) {
            b.push_back(s.t0);
            b.push_back(s.t1);
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

private:
    std::vector<Segment> segments_;
};

}  // namespace cqsim
