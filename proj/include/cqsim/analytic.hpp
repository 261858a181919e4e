#pragma once

// Closed-form engine for the pointer-measures-particle model: the initial
// product density, the rigid-shift solution of the interaction window, the
// two-Gaussian pointer marginals, the post-interaction action functions, the
// conditional particle posterior, the dispersing free-packet state, and the
// ensemble energy/momentum functionals.

#include <cmath>
#include <optional>

#include "cqsim/core.hpp"

namespace cqsim {

/// k(t): integral of the coupling rate over [0, t]. Dimensionless; the rigid
/// displacement of the pointer coordinate per unit particle position.
inline double integrated_strength(const AlphaProfile& profile, double t) {
    if (t < 0.0) throw SimError(ErrorCode::NegativeTime, "integrated strength needs t >= 0");
    return profile.integrated(t);
}

/// Initial particle density: equal-weight packets of width sigma_Q at +-q0.
inline GaussianMixture1D initial_particle_density(const PhysicalParams& p) {
    if (p.q0 == 0.0)
        return GaussianMixture1D({{1.0, 0.0, p.sigma_Q}});
    return GaussianMixture1D({{0.5, -p.q0, p.sigma_Q}, {0.5, p.q0, p.sigma_Q}});
}

/// Initial pointer density: a single Gaussian of width sigma_C at the origin.
inline GaussianMixture1D initial_pointer_density(const PhysicalParams& p) {
    return GaussianMixture1D({{1.0, 0.0, p.sigma_C}});
}

// ---------------------------------------------------------------------------
// Joint analytic state
// ---------------------------------------------------------------------------

/// Exact joint state during the interaction window. The density is the
/// initial product evaluated at the shifted argument (x - q k, q);
/// the conjugate function S is identically zero for a pointer at rest.
struct JointAnalytic {
    PhysicalParams params;
    double k = 0.0;

    double density(double x, double q) const {
        const double xs = x - q * k;
        const double pc = gaussian_pdf(xs, 0.0, params.sigma_C);
        const double pq = 0.5 * (gaussian_pdf(q, -params.q0, params.sigma_Q) +
                                 gaussian_pdf(q, params.q0, params.sigma_Q));
        return pc * pq;
    }

    double action(double /*x*/, double /*q*/) const { return 0.0; }
};

inline JointAnalytic initial_joint(const PhysicalParams& p) { return JointAnalytic{validated(p), 0.0}; }

/// Rigid shift of a joint state: evaluators move to (x - q k, q).
inline JointAnalytic shifted_joint(const JointAnalytic& j, double k) {
    if (!std::isfinite(k)) throw SimError(ErrorCode::InvalidConfig, "shift must be finite");
    return JointAnalytic{j.params, j.k + k};
}

/// Default grids for the interaction window: the q-axis covers both packets
/// with an 8-sigma margin, the x-axis covers the pointer plus the largest
/// shift reached at |k| <= kmax.
inline Grid2D joint_grid(const PhysicalParams& p, double kmax, std::size_t nx, std::size_t nq) {
    const double qext = p.q0 + 8.0 * p.sigma_Q;
    const double xext = 8.0 * p.sigma_C + std::abs(kmax) * qext;
    return Grid2D{Grid1D(-xext, xext, nx), Grid1D(-qext, qext, nq)};
}

/// Samples a joint evaluator onto a grid as a (P, S) state at time t.
inline HybridState sample_state(const JointAnalytic& j, const Grid2D& g, double t) {
    HybridState st;
    st.grid = g;
    st.P = Field2D(g.x.n, g.q.n);
    st.S = Field2D(g.x.n, g.q.n);
    st.t = t;
    for (std::size_t ix = 0; ix < g.x.n; ++ix) {
        const double x = g.x.coord(ix);
        for (std::size_t iq = 0; iq < g.q.n; ++iq) {
            const double q = g.q.coord(iq);
            st.P.at(ix, iq) = j.density(x, q);
            st.S.at(ix, iq) = j.action(x, q);
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// Pointer marginals
// ---------------------------------------------------------------------------

/// Pointer density after integrating the shifted joint over q: two equal
/// Gaussians at +-q0*k with common width sqrt(sigma_C^2 + sigma_Q^2 k^2).
inline GaussianMixture1D pointer_marginal_exact(const PhysicalParams& p, double k) {
    if (!std::isfinite(k)) throw SimError(ErrorCode::InvalidConfig, "k must be finite");
    const double s = std::hypot(p.sigma_C, p.sigma_Q * k);
    if (k == 0.0 || p.q0 == 0.0)
        return GaussianMixture1D({{1.0, 0.0, s}});
    return GaussianMixture1D({{0.5, -p.q0 * k, s}, {0.5, p.q0 * k, s}});
}

/// Small-pointer-width limit of the marginal: the initial particle density
/// with both the packet width and the separation rescaled by k.
inline GaussianMixture1D pointer_marginal_limit(const PhysicalParams& p, double k) {
    if (k == 0.0) throw SimError(ErrorCode::ZeroK, "the rescaled form needs k != 0");
    const double s = std::abs(k) * p.sigma_Q;
    if (p.q0 == 0.0) return GaussianMixture1D({{1.0, 0.0, s}});
    return GaussianMixture1D({{0.5, -p.q0 * k, s}, {0.5, p.q0 * k, s}});
}

enum class PointerWidth {
    Narrow,  ///< width sigma_Q*lambda*t (pointer spread neglected)
    Full,    ///< width sqrt(sigma_C^2 + (sigma_Q*lambda*t)^2)
};

/// Pointer density at t > epsilon for a calibrated apparatus: two Gaussians
/// receding ballistically at +-lambda*q0 while broadening linearly in time.
inline GaussianMixture1D free_pointer_density(const PhysicalParams& p, double t,
                                              PointerWidth width = PointerWidth::Narrow) {
    if (!(t > p.epsilon))
        throw SimError(ErrorCode::TimeBeforeInteractionEnd,
                       "free pointer density is defined for t > epsilon");
    const double spread = std::abs(p.lambda) * t * p.sigma_Q;
    const double s = (width == PointerWidth::Narrow) ? spread : std::hypot(p.sigma_C, spread);
    if (p.q0 == 0.0) return GaussianMixture1D({{1.0, 0.0, s}});
    const double c = p.lambda * p.q0 * t;
    return GaussianMixture1D({{0.5, -c, s}, {0.5, c, s}});
}

// ---------------------------------------------------------------------------
// Action functions of the free pointer
// ---------------------------------------------------------------------------

/// Global description: S_C = M x^2 / (2 t), the velocity field x/t that keeps
/// both receding Gaussians self-similar.
inline double pointer_action_global(double x, double t, double M) {
    if (t == 0.0) throw SimError(ErrorCode::ZeroTime, "global action is singular at t = 0");
    return M * x * x / (2.0 * t);
}

inline double pointer_action_global_dt(double x, double t, double M) {
    if (t == 0.0) throw SimError(ErrorCode::ZeroTime, "global action is singular at t = 0");
    return -M * x * x / (2.0 * t * t);
}

inline double pointer_action_global_dx(double x, double t, double M) {
    if (t == 0.0) throw SimError(ErrorCode::ZeroTime, "global action is singular at t = 0");
    return M * x / t;
}

/// Mixture-element description: the action of the element labelled q,
/// a pointer moving at the constant velocity lambda*q.
inline double element_action(double x, double t, double q, const PhysicalParams& p) {
    return -0.5 * p.M * p.lambda * p.lambda * q * q * t + p.M * p.lambda * q * x;
}

inline double element_action_dt(double /*x*/, double /*t*/, double q, const PhysicalParams& p) {
    return -0.5 * p.M * p.lambda * p.lambda * q * q;
}

inline double element_action_dx(double q, const PhysicalParams& p) {
    return p.M * p.lambda * q;
}

// ---------------------------------------------------------------------------
// Conditional particle posterior
// ---------------------------------------------------------------------------

/// True when the pointer spread is small against the accumulated particle
/// imprint, the regime in which the conditional posterior below is valid.
inline bool narrow_pointer_regime(const PhysicalParams& p, double t) {
    return p.sigma_C < 0.1 * p.sigma_Q * std::abs(p.lambda) * t;
}

struct ConditionalPosterior {
    GaussianMixture1D density;    ///< Gaussian in q
    bool regime_warning = false;  ///< set when sigma_C >= 0.1*sigma_Q*|lambda|*t
};

/// Conditional density of the particle position given a pointer reading x at
/// time t: Gaussian with mean x/(lambda t) and width sigma_C/(lambda t).
inline ConditionalPosterior conditional_quantum_posterior(const PhysicalParams& p, double x,
                                                          double t) {
    if (!(t > p.epsilon))
        throw SimError(ErrorCode::TimeBeforeInteractionEnd,
                       "conditional posterior is defined for t > epsilon");
    const double mean = x / (p.lambda * t);
    const double sigma = std::abs(p.sigma_C / (p.lambda * t));
    ConditionalPosterior out;
    out.density = GaussianMixture1D({{1.0, mean, sigma}});
    out.regime_warning = !narrow_pointer_regime(p, t);
    return out;
}

// ---------------------------------------------------------------------------
// Free particle state
// ---------------------------------------------------------------------------

/// Freely dispersing two-packet state. Each packet keeps its center while the
/// width grows as sigma(t) = sigma_Q * sqrt(1 + (hbar t / 2 m sigma_Q^2)^2);
/// the phases carry the matching quadratic action.
struct QuantumFreeState {
    PhysicalParams params;
    double t = 0.0;
    double sigma_t = 0.0;

    /// Packet density centered at -q0 (sign = +1) or +q0 (sign = -1).
    double packet_density(double q, int sign) const {
        return gaussian_pdf(q, -double(sign) * params.q0, sigma_t);
    }

    /// Packet action for the packet whose exponent carries (q + sign*q0).
    double packet_action(double q, int sign) const {
        const double& hb = params.hbar;
        if (hb == 0.0) return 0.0;
        const double tau = hb * t / (2.0 * params.m * params.sigma_Q * params.sigma_Q);
        const double u = q + double(sign) * params.q0;
        return -0.5 * hb * std::atan(tau) +
               u * u * hb * hb * t /
                   (8.0 * params.m * params.sigma_Q * params.sigma_Q * sigma_t * sigma_t);
    }

    /// Total density: equal-weight sum of the two packets.
    GaussianMixture1D density() const {
        if (params.q0 == 0.0) return GaussianMixture1D({{1.0, 0.0, sigma_t}});
        return GaussianMixture1D({{0.5, -params.q0, sigma_t}, {0.5, params.q0, sigma_t}});
    }
};

inline double dispersed_width(const PhysicalParams& p, double t) {
    const double tau = p.hbar * t / (2.0 * p.m * p.sigma_Q * p.sigma_Q);
    return p.sigma_Q * std::sqrt(1.0 + tau * tau);
}

inline QuantumFreeState free_quantum_state(const PhysicalParams& p, double t) {
    if (t < 0.0) throw SimError(ErrorCode::NegativeTime, "free state needs t >= 0");
    return QuantumFreeState{p, t, dispersed_width(p, t)};
}

// ---------------------------------------------------------------------------
// Ensemble functionals
// ---------------------------------------------------------------------------

struct EnergyReport {
    double classical = 0.0;    ///< integral of P (dS/dx)^2 / 2M
    double quantum = 0.0;      ///< integral of P (dS/dq)^2 / 2m + Fisher term
    double interaction = 0.0;  ///< alpha * integral of P q dS/dx
    double total = 0.0;
    /// -integral of P dS/dt, filled when a time-derivative field is supplied;
    /// equals the total for a state obeying the equations of motion.
    std::optional<double> local_energy_integral;
};

/// Evaluates the three ensemble Hamiltonians on a gridded state by quadrature,
/// with gradients from second-order finite differences.
inline EnergyReport ensemble_energy(const HybridState& st, const PhysicalParams& p, double alpha,
                                    const Field2D* dSdt = nullptr) {
    if (st.grid.x.n < 8 || st.grid.q.n < 8)
        throw SimError(ErrorCode::GridTooCoarse, "energy stencils need at least 8 points per axis");
    if (!st.P.matches(st.grid) || !st.S.matches(st.grid))
        throw SimError(ErrorCode::GridMismatch, "state fields do not match grid");

    const Field2D dSx = diff_x(st.S, st.grid);
    const Field2D dSq = diff_q(st.S, st.grid);
    const Field2D dPq = diff_q(st.P, st.grid);

    double pmax = 0.0;
    for (double v : st.P.v) pmax = std::max(pmax, v);
    const double fisher_floor = 1e-30 * pmax;

    Field2D hc(st.P.nx, st.P.nq), hq(st.P.nx, st.P.nq), hcq(st.P.nx, st.P.nq);
    for (std::size_t i = 0; i < st.P.size(); ++i) {
        const double P = st.P.v[i];
        hc.v[i] = P * dSx.v[i] * dSx.v[i] / (2.0 * p.M);
        double fisher = 0.0;
        if (P > fisher_floor) fisher = dPq.v[i] * dPq.v[i] / P;
        hq.v[i] = P * dSq.v[i] * dSq.v[i] / (2.0 * p.m) +
                  p.hbar * p.hbar / (8.0 * p.m) * fisher;
    }
    for (std::size_t ix = 0; ix < st.P.nx; ++ix)
        for (std::size_t iq = 0; iq < st.P.nq; ++iq)
            hcq.at(ix, iq) = st.P.at(ix, iq) * st.grid.q.coord(iq) * dSx.at(ix, iq);

    EnergyReport r;
    r.classical = integrate_2d(hc, st.grid);
    r.quantum = integrate_2d(hq, st.grid);
    r.interaction = alpha * integrate_2d(hcq, st.grid);
    r.total = r.classical + r.quantum + r.interaction;
    if (dSdt) {
        Field2D e(st.P.nx, st.P.nq);
        for (std::size_t i = 0; i < e.size(); ++i) e.v[i] = -st.P.v[i] * dSdt->v[i];
        r.local_energy_integral = integrate_2d(e, st.grid);
    }
    return r;
}

/// Energy of a one-axis classical ensemble (a single mixture element): the
/// kinetic functional with the gradient from central differences, plus the
/// local-energy integral when a time-derivative field is supplied.
struct EnergyReport1D {
    double kinetic = 0.0;
    std::optional<double> local_energy_integral;
};

inline EnergyReport1D ensemble_energy_1d(std::span<const double> P, std::span<const double> S,
                                         const Grid1D& g, double mass,
                                         std::span<const double> dSdt = {}) {
    if (g.n < 8)
        throw SimError(ErrorCode::GridTooCoarse, "energy stencils need at least 8 points");
    if (P.size() != g.n || S.size() != g.n)
        throw SimError(ErrorCode::GridMismatch, "fields do not match grid");
    std::vector<double> dS(g.n), integrand(g.n);
    diff_line(S, g.spacing(), dS);
    for (std::size_t i = 0; i < g.n; ++i) integrand[i] = P[i] * dS[i] * dS[i] / (2.0 * mass);
    EnergyReport1D r;
    r.kinetic = integrate_1d(integrand, g);
    if (!dSdt.empty()) {
        if (dSdt.size() != g.n)
            throw SimError(ErrorCode::GridMismatch, "dSdt does not match grid");
        for (std::size_t i = 0; i < g.n; ++i) integrand[i] = -P[i] * dSdt[i];
        r.local_energy_integral = integrate_1d(integrand, g);
    }
    return r;
}

enum class Axis { X, Q };

/// Local momentum density P dS/daxis.
inline Field2D momentum_density(const HybridState& st, Axis axis) {
    if (st.grid.x.n < 8 || st.grid.q.n < 8)
        throw SimError(ErrorCode::GridTooCoarse, "momentum stencils need at least 8 points per axis");
    Field2D d = (axis == Axis::X) ? diff_x(st.S, st.grid) : diff_q(st.S, st.grid);
    for (std::size_t i = 0; i < d.size(); ++i) d.v[i] *= st.P.v[i];
    return d;
}

inline double total_momentum(const HybridState& st, Axis axis) {
    return integrate_2d(momentum_density(st, axis), st.grid);
}

}  // namespace cqsim
