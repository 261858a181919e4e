#pragma once

// Grid integrator for the coupled hybrid equations of motion: the continuity
// and modified Hamilton-Jacobi pair with the momentum-position coupling term,
// plus the interaction-only advection limit used for verification. Explicit
// RK4 in time; second-order differences in space with a selectable upwind or
// central treatment of the coupling advection.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "cqsim/analytic.hpp"
#include "cqsim/core.hpp"

namespace cqsim {

struct SchemeConfig {
    enum class Scheme { InteractionAdvection, FullHybrid };
    enum class Flux { Upwind, Central };

    double dt = 1e-5;
    Scheme scheme = Scheme::FullHybrid;
    Flux flux = Flux::Central;
    double cfl = 0.4;

    void validate() const {
        if (!(dt > 0.0)) throw SimError(ErrorCode::InvalidConfig, "dt must be positive");
        if (!(cfl > 0.0 && cfl <= 1.0))
            throw SimError(ErrorCode::InvalidConfig, "CFL factor must lie in (0,1]");
    }
};

// ---------------------------------------------------------------------------
// Quantum potential
// ---------------------------------------------------------------------------

/// (hbar^2/2m) (d^2 sqrt(P) / du^2) / sqrt(P) along a sampled line.
/// The term is singular where P -> 0, so densities are floored at
/// 1e-12 * max(P) for the sqrt stencil. The floor is added rather than
/// applied as a hard cutoff: a cutoff puts a kink into sqrt(P) at the floor
/// shell whose second difference is an O(1/h^2) artifact that drives fake
/// tail velocities; the additive form rolls the term off smoothly instead.
/// Meaningfully negative input is rejected. When the line is a slice of a
/// larger field, pass the field-wide maximum as `scale` so the floor and the
/// negativity tolerance reference the full density, not the slice.
inline std::vector<double> quantum_potential(std::span<const double> P, const Grid1D& g,
                                             double m, double hbar, double scale = 0.0) {
    if (P.size() != g.n)
        throw SimError(ErrorCode::GridMismatch, "field length does not match grid size");
    std::vector<double> out(g.n, 0.0);
    if (hbar == 0.0) return out;

    double pmax = scale;
    if (pmax == 0.0)
        for (double v : P) pmax = std::max(pmax, v);
    const double floor = 1e-12 * pmax;
    if (pmax <= 0.0) throw SimError(ErrorCode::DensityFloorViolation, "density is all zero");

    std::vector<double> root(g.n), curv(g.n);
    const double negative_tol = 1e-6 * pmax;  // dust from advection stencils is clamped
    for (std::size_t i = 0; i < g.n; ++i) {
        const double v = P[i];
        if (v < -negative_tol)
            throw SimError(ErrorCode::DensityFloorViolation, "negative density in stencil");
        root[i] = std::sqrt(std::max(v, 0.0) + floor);
    }
    diff2_line(root, g.spacing(), curv);
    const double pref = hbar * hbar / (2.0 * m);
    for (std::size_t i = 0; i < g.n; ++i) out[i] = pref * curv[i] / root[i];
    return out;
}

// ---------------------------------------------------------------------------
// Right-hand side of the equations of motion
// ---------------------------------------------------------------------------

namespace detail {

// d/dx of a field along the pointer axis with zero-gradient edges, either
// upwind by the sign of the row velocity a(q) or central.
inline Field2D advect_x(const Field2D& f, const Grid2D& g, const std::vector<double>& a,
                        SchemeConfig::Flux flux) {
    Field2D out(f.nx, f.nq);
    const double h = g.x.spacing();
    const std::size_t last = f.nx - 1;
    for (std::size_t iq = 0; iq < f.nq; ++iq) {
        const double vel = a[iq];
        for (std::size_t ix = 0; ix <= last; ++ix) {
            // Zero-gradient ghosts at the edges.
            const double fm = (ix > 0) ? f.at(ix - 1, iq) : f.at(0, iq);
            const double fp = (ix < last) ? f.at(ix + 1, iq) : f.at(last, iq);
            double d;
            if (flux == SchemeConfig::Flux::Central) d = (fp - fm) / (2.0 * h);
            else if (vel > 0.0) d = (f.at(ix, iq) - fm) / h;
            else d = (fp - f.at(ix, iq)) / h;
            out.at(ix, iq) = d;
        }
    }
    return out;
}

inline void check_finite(const Field2D& f, const char* what) {
    for (double v : f.v)
        if (!std::isfinite(v))
            throw SimError(ErrorCode::NonFiniteField, std::string(what) + " contains non-finite values");
}

}  // namespace detail

struct TimeDerivatives {
    Field2D dP;
    Field2D dS;
};

/// RHS of the coupled equations at rate alpha. For the full scheme:
///   dP/dt = -d_q(P S_q/m) - d_x(P S_x/M) - alpha q d_x P
///   dS/dt = -S_q^2/2m - S_x^2/2M - alpha q d_x S + QP[P] - V
/// The interaction-advection scheme keeps only the alpha terms.
inline TimeDerivatives hybrid_time_derivatives(const HybridState& st, const PhysicalParams& p,
                                               double alpha,
                                               const SchemeConfig& cfg = SchemeConfig{},
                                               const Field2D* V = nullptr) {
    detail::check_finite(st.P, "P");
    detail::check_finite(st.S, "S");
    if (!st.P.matches(st.grid) || !st.S.matches(st.grid))
        throw SimError(ErrorCode::GridMismatch, "state fields do not match grid");

    const std::size_t nx = st.grid.x.n, nq = st.grid.q.n;
    TimeDerivatives out{Field2D(nx, nq), Field2D(nx, nq)};

    // Coupling advection, velocity alpha*q per row.
    std::vector<double> a(nq);
    for (std::size_t iq = 0; iq < nq; ++iq) a[iq] = alpha * st.grid.q.coord(iq);
    if (alpha != 0.0) {
        const Field2D dxP = detail::advect_x(st.P, st.grid, a, cfg.flux);
        const Field2D dxS = detail::advect_x(st.S, st.grid, a, cfg.flux);
        for (std::size_t ix = 0; ix < nx; ++ix)
            for (std::size_t iq = 0; iq < nq; ++iq) {
                out.dP.at(ix, iq) -= a[iq] * dxP.at(ix, iq);
                out.dS.at(ix, iq) -= a[iq] * dxS.at(ix, iq);
            }
    }

    if (cfg.scheme == SchemeConfig::Scheme::FullHybrid) {
        const Field2D Sx = diff_x(st.S, st.grid);
        const Field2D Sq = diff_q(st.S, st.grid);

        // Kinetic continuity fluxes in conservative form.
        Field2D flux_x(nx, nq), flux_q(nx, nq);
        for (std::size_t i = 0; i < flux_x.size(); ++i) {
            flux_x.v[i] = st.P.v[i] * Sx.v[i] / p.M;
            flux_q.v[i] = st.P.v[i] * Sq.v[i] / p.m;
        }
        const Field2D div_x = diff_x(flux_x, st.grid);
        const Field2D div_q = diff_q(flux_q, st.grid);

        for (std::size_t i = 0; i < out.dP.size(); ++i) {
            out.dP.v[i] -= div_x.v[i] + div_q.v[i];
            out.dS.v[i] -= Sq.v[i] * Sq.v[i] / (2.0 * p.m) + Sx.v[i] * Sx.v[i] / (2.0 * p.M);
        }

        if (p.hbar != 0.0) {
            double pmax = 0.0;
            for (double v : st.P.v) pmax = std::max(pmax, v);
            std::vector<double> row(nq);
            for (std::size_t ix = 0; ix < nx; ++ix) {
                for (std::size_t iq = 0; iq < nq; ++iq) row[iq] = st.P.at(ix, iq);
                const auto qp = quantum_potential(row, st.grid.q, p.m, p.hbar, pmax);
                for (std::size_t iq = 0; iq < nq; ++iq) out.dS.at(ix, iq) += qp[iq];
            }
        }
        if (V) {
            if (!V->matches(st.grid))
                throw SimError(ErrorCode::GridMismatch, "potential field does not match grid");
            for (std::size_t i = 0; i < out.dS.size(); ++i) out.dS.v[i] -= V->v[i];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

/// Advective stability limit per the configured safety factor; infinite for a
/// static state.
inline double advective_dt_limit(const HybridState& st, const PhysicalParams& p, double alpha,
                                 double cfl) {
    const Field2D Sx = diff_x(st.S, st.grid);
    const Field2D Sq = diff_q(st.S, st.grid);
    double vx = 0.0, vq = 0.0;
    for (std::size_t ix = 0; ix < st.P.nx; ++ix)
        for (std::size_t iq = 0; iq < st.P.nq; ++iq) {
            const double q = st.grid.q.coord(iq);
            vx = std::max(vx, std::abs(alpha * q) + std::abs(Sx.at(ix, iq)) / p.M);
            vq = std::max(vq, std::abs(Sq.at(ix, iq)) / p.m);
        }
    double lim = std::numeric_limits<double>::infinity();
    if (vx > 0.0) lim = std::min(lim, cfl * st.grid.x.spacing() / vx);
    if (vq > 0.0) lim = std::min(lim, cfl * st.grid.q.spacing() / vq);
    return lim;
}

/// Step size that also respects the dispersive limit of the explicit scheme
/// on the quantum term (RK4 imaginary-axis stability at the grid Nyquist mode).
inline double stable_dt(const HybridState& st, const PhysicalParams& p, double alpha,
                        const SchemeConfig& cfg) {
    double lim = advective_dt_limit(st, p, alpha, cfg.cfl);
    if (cfg.scheme == SchemeConfig::Scheme::FullHybrid && p.hbar > 0.0) {
        const double hq = st.grid.q.spacing();
        lim = std::min(lim, 0.28 * p.m * hq * hq / p.hbar);
    }
    return lim;
}

struct StepResult {
    HybridState state;
    double mass_drift = 0.0;   ///< |integral of P - 1| before any correction
    bool renormalized = false;
};

namespace detail {

// Full-hybrid RHS in (ln P, S) variables, equivalent to the density-form
// equations term by term:
//   dL/dt = -(L_x S_x + S_xx)/M - (L_q S_q + S_qq)/m - alpha q L_x
//   dS/dt = -S_x^2/2M - S_q^2/2m - alpha q S_x + (hbar^2/4m)(L_qq + L_q^2/2) - V
// The log form keeps the quantum term regular as P -> 0 (for Gaussian-family
// densities L is low-order polynomial) and makes negative densities
// impossible; a probability-form stepper needs a density floor there whose
// roll-off seeds artifacts in the unsupported tails that grow without bound.
struct LogFields {
    Field2D L;
    Field2D S;
};

inline void log_form_derivatives(const LogFields& y, const Grid2D& grid,
                                 const PhysicalParams& p, double alpha,
                                 SchemeConfig::Flux flux, const Field2D* V, LogFields& out) {
    const std::size_t nx = grid.x.n, nq = grid.q.n;
    const Field2D Lx = diff_x(y.L, grid);
    const Field2D Lq = diff_q(y.L, grid);
    const Field2D Sx = diff_x(y.S, grid);
    const Field2D Sq = diff_q(y.S, grid);
    const Field2D Sxx = diff2_x(y.S, grid);
    const Field2D Sqq = diff2_q(y.S, grid);
    const Field2D Lqq = diff2_q(y.L, grid);

    out.L = Field2D(nx, nq);
    out.S = Field2D(nx, nq);
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iq = 0; iq < nq; ++iq) {
            const std::size_t i = ix * nq + iq;
            out.L.v[i] = -(Lx.v[i] * Sx.v[i] + Sxx.v[i]) / p.M -
                         (Lq.v[i] * Sq.v[i] + Sqq.v[i]) / p.m;
            out.S.v[i] = -Sx.v[i] * Sx.v[i] / (2.0 * p.M) - Sq.v[i] * Sq.v[i] / (2.0 * p.m) +
                         p.hbar * p.hbar / (4.0 * p.m) *
                             (Lqq.v[i] + 0.5 * Lq.v[i] * Lq.v[i]);
            if (V) out.S.v[i] -= V->v[i];
        }

    if (alpha != 0.0) {
        std::vector<double> a(nq);
        for (std::size_t iq = 0; iq < nq; ++iq) a[iq] = alpha * grid.q.coord(iq);
        const Field2D dxL = advect_x(y.L, grid, a, flux);
        const Field2D dxS = advect_x(y.S, grid, a, flux);
        for (std::size_t ix = 0; ix < nx; ++ix)
            for (std::size_t iq = 0; iq < nq; ++iq) {
                const std::size_t i = ix * nq + iq;
                out.L.v[i] -= a[iq] * dxL.v[i];
                out.S.v[i] -= a[iq] * dxS.v[i];
            }
    }
}

// Quadratic-preserving least-squares smoothing along q, with the outermost
// cells slaved to linear extrapolation. Together these keep the far tails
// numerically quiet in the log-form stepper: in Madelung variables the tail
// supports convectively amplified short-wave modes (growth rate ~ k |d ln P|,
// steepest where the density is smallest), which live entirely above the
// resolved part of the spectrum. The 9-point quadratic filter damps that
// band strongly while reproducing any locally quadratic field exactly, so a
// resolved Gaussian-family state passes through it unchanged.
inline void smooth_q_lines(Field2D& f) {
    static constexpr double w9[9] = {-21.0 / 231.0, 14.0 / 231.0, 39.0 / 231.0,
                                     54.0 / 231.0,  59.0 / 231.0, 54.0 / 231.0,
                                     39.0 / 231.0,  14.0 / 231.0, -21.0 / 231.0};
    static constexpr double w5[5] = {-3.0 / 35.0, 12.0 / 35.0, 17.0 / 35.0, 12.0 / 35.0,
                                     -3.0 / 35.0};
    const std::size_t nx = f.nx, nq = f.nq;
    if (nq < 12) return;
    std::vector<double> row(nq);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iq = 0; iq < nq; ++iq) row[iq] = f.at(ix, iq);
        for (std::size_t iq = 2; iq < nq - 2; ++iq) {
            if (iq >= 4 && iq + 4 < nq) {
                double s = 0.0;
                for (int j = 0; j < 9; ++j) s += w9[j] * row[iq - 4 + j];
                f.at(ix, iq) = s;
            } else {
                double s = 0.0;
                for (int j = 0; j < 5; ++j) s += w5[j] * row[iq - 2 + j];
                f.at(ix, iq) = s;
            }
        }
        f.at(ix, 1) = 2.0 * f.at(ix, 2) - f.at(ix, 3);
        f.at(ix, 0) = 2.0 * f.at(ix, 1) - f.at(ix, 2);
        f.at(ix, nq - 2) = 2.0 * f.at(ix, nq - 3) - f.at(ix, nq - 4);
        f.at(ix, nq - 1) = 2.0 * f.at(ix, nq - 2) - f.at(ix, nq - 3);
    }
}

// Slave the outermost x-cells to interior extrapolation: linear for S and for
// ln P (geometric in P). The x-sector carries no dispersive term, so simple
// outflow extrapolation is enough there.
inline void slave_x_boundaries(Field2D& P, Field2D& S) {
    const std::size_t nq = P.nq, nx = P.nx;
    auto geo = [](double a, double b) { return (b > 0.0) ? a * a / b : a; };
    for (std::size_t iq = 0; iq < nq; ++iq) {
        P.at(0, iq) = geo(P.at(1, iq), P.at(2, iq));
        P.at(nx - 1, iq) = geo(P.at(nx - 2, iq), P.at(nx - 3, iq));
        S.at(0, iq) = 2.0 * S.at(1, iq) - S.at(2, iq);
        S.at(nx - 1, iq) = 2.0 * S.at(nx - 2, iq) - S.at(nx - 3, iq);
    }
}

}  // namespace detail

/// One RK4 step of length cfg.dt. The step must not straddle a jump of the
/// coupling profile; the rate is sampled at the step midpoint. The
/// interaction-advection scheme advances the density form in conservative
/// fluxes; the full-hybrid scheme advances (ln P, S). Renormalizes the
/// density when the drift exceeds 1e-12 and reports the correction.
inline StepResult step(const HybridState& st, const PhysicalParams& p,
                       const AlphaProfile& profile, const SchemeConfig& cfg,
                       const Field2D* V = nullptr) {
    cfg.validate();
    const double dt = cfg.dt;
    const double alpha = profile.rate_at(st.t + 0.5 * dt);

    const double dt_lim = advective_dt_limit(st, p, alpha, cfg.cfl);
    if (dt > dt_lim)
        throw SimError(ErrorCode::CflViolation,
                       "dt " + std::to_string(dt) + " exceeds advective limit " +
                           std::to_string(dt_lim));

    StepResult r;
    r.state = st;
    r.state.t = st.t + dt;

    if (cfg.scheme == SchemeConfig::Scheme::InteractionAdvection) {
        auto axpy = [](const HybridState& base, double c, const TimeDerivatives& d) {
            HybridState out = base;
            for (std::size_t i = 0; i < out.P.size(); ++i) {
                out.P.v[i] += c * d.dP.v[i];
                out.S.v[i] += c * d.dS.v[i];
            }
            return out;
        };
        const TimeDerivatives k1 = hybrid_time_derivatives(st, p, alpha, cfg, V);
        const TimeDerivatives k2 =
            hybrid_time_derivatives(axpy(st, 0.5 * dt, k1), p, alpha, cfg, V);
        const TimeDerivatives k3 =
            hybrid_time_derivatives(axpy(st, 0.5 * dt, k2), p, alpha, cfg, V);
        const TimeDerivatives k4 = hybrid_time_derivatives(axpy(st, dt, k3), p, alpha, cfg, V);
        for (std::size_t i = 0; i < r.state.P.size(); ++i) {
            r.state.P.v[i] +=
                dt / 6.0 * (k1.dP.v[i] + 2.0 * k2.dP.v[i] + 2.0 * k3.dP.v[i] + k4.dP.v[i]);
            r.state.S.v[i] +=
                dt / 6.0 * (k1.dS.v[i] + 2.0 * k2.dS.v[i] + 2.0 * k3.dS.v[i] + k4.dS.v[i]);
        }
        detail::check_finite(r.state.P, "P after step");
    } else {
        detail::check_finite(st.P, "P");
        detail::check_finite(st.S, "S");
        detail::LogFields y;
        y.L = Field2D(st.P.nx, st.P.nq);
        y.S = st.S;
        for (std::size_t i = 0; i < st.P.size(); ++i)
            y.L.v[i] = std::log(std::max(st.P.v[i], 1e-300));

        auto axpy = [](const detail::LogFields& base, double c, const detail::LogFields& d) {
            detail::LogFields out = base;
            for (std::size_t i = 0; i < out.L.size(); ++i) {
                out.L.v[i] += c * d.L.v[i];
                out.S.v[i] += c * d.S.v[i];
            }
            return out;
        };
        detail::LogFields k1, k2, k3, k4;
        detail::log_form_derivatives(y, st.grid, p, alpha, cfg.flux, V, k1);
        detail::log_form_derivatives(axpy(y, 0.5 * dt, k1), st.grid, p, alpha, cfg.flux, V, k2);
        detail::log_form_derivatives(axpy(y, 0.5 * dt, k2), st.grid, p, alpha, cfg.flux, V, k3);
        detail::log_form_derivatives(axpy(y, dt, k3), st.grid, p, alpha, cfg.flux, V, k4);
        Field2D Lnew(st.P.nx, st.P.nq);
        for (std::size_t i = 0; i < y.L.size(); ++i) {
            Lnew.v[i] =
                y.L.v[i] + dt / 6.0 * (k1.L.v[i] + 2.0 * k2.L.v[i] + 2.0 * k3.L.v[i] + k4.L.v[i]);
            r.state.S.v[i] =
                y.S.v[i] + dt / 6.0 * (k1.S.v[i] + 2.0 * k2.S.v[i] + 2.0 * k3.S.v[i] + k4.S.v[i]);
        }
        detail::smooth_q_lines(Lnew);
        detail::smooth_q_lines(r.state.S);
        for (std::size_t i = 0; i < Lnew.size(); ++i) r.state.P.v[i] = std::exp(Lnew.v[i]);
        detail::slave_x_boundaries(r.state.P, r.state.S);
        detail::check_finite(r.state.P, "P after step");
        detail::check_finite(r.state.S, "S after step");
    }

    const double mass = r.state.mass();
    r.mass_drift = std::abs(mass - 1.0);
    if (r.mass_drift > 1e-12) {
        for (double& v : r.state.P.v) v /= mass;
        r.renormalized = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Evolution driver
// ---------------------------------------------------------------------------

struct DiagnosticsRow {
    double t = 0.0;
    double mass = 0.0;
    double classical = 0.0;
    double quantum = 0.0;
    double interaction = 0.0;
    std::optional<double> l1_vs_reference;
};

struct EvolveResult {
    HybridState state;
    std::vector<DiagnosticsRow> trace;
    double max_mass_drift = 0.0;     ///< largest single-step drift before correction
    double total_mass_correction = 0.0;  ///< sum of per-step drifts, renormalized or not
    std::size_t renormalizations = 0;
};

/// Pointwise reference density used for the L1 diagnostic.
using ReferenceDensity = std::function<double(double x, double q, double t)>;

inline double l1_vs_reference(const HybridState& st, const ReferenceDensity& ref) {
    Field2D d(st.P.nx, st.P.nq);
    for (std::size_t ix = 0; ix < st.P.nx; ++ix)
        for (std::size_t iq = 0; iq < st.P.nq; ++iq)
            d.at(ix, iq) =
                std::abs(st.P.at(ix, iq) - ref(st.grid.x.coord(ix), st.grid.q.coord(iq), st.t));
    return integrate_2d(d, st.grid);
}

/// Repeated stepping to t_end with diagnostics every `stride` steps. Steps are
/// clipped so they never cross a profile breakpoint or overshoot t_end.
inline EvolveResult evolve(HybridState st, const PhysicalParams& p, const AlphaProfile& profile,
                           double t_end, const SchemeConfig& cfg, std::size_t stride = 10,
                           const ReferenceDensity& ref = nullptr) {
    cfg.validate();
    if (t_end < st.t)
        throw SimError(ErrorCode::NegativeTime, "t_end precedes the current state time");

    EvolveResult r;
    auto record = [&](const HybridState& s) {
        const double alpha = profile.rate_at(s.t);
        const EnergyReport e = ensemble_energy(s, p, alpha);
        DiagnosticsRow row{s.t, s.mass(), e.classical, e.quantum, e.interaction, std::nullopt};
        if (ref) row.l1_vs_reference = l1_vs_reference(s, ref);
        r.trace.push_back(row);
    };

    record(st);
    if (t_end == st.t) {
        r.state = std::move(st);
        return r;
    }

    const auto breaks = profile.breakpoints();
    std::size_t n_steps = 0;
    const double eps_t = 1e-15 * std::max(1.0, std::abs(t_end));
    while (st.t < t_end - eps_t) {
        double dt = std::min(cfg.dt, t_end - st.t);
        for (double b : breaks)
            if (b > st.t + eps_t && b < st.t + dt - eps_t) dt = b - st.t;
        SchemeConfig local = cfg;
        local.dt = dt;
        StepResult sr = step(st, p, profile, local);
        st = std::move(sr.state);
        r.max_mass_drift = std::max(r.max_mass_drift, sr.mass_drift);
        r.total_mass_correction += sr.mass_drift;
        if (sr.renormalized) ++r.renormalizations;
        ++n_steps;
        if (stride != 0 && n_steps % stride == 0) record(st);
    }
    if (r.trace.empty() || r.trace.back().t != st.t) record(st);
    r.state = std::move(st);
    return r;
}

// ---------------------------------------------------------------------------
// Marginals
// ---------------------------------------------------------------------------

struct Marginals {
    std::vector<double> pointer;   ///< density on the x grid
    std::vector<double> particle;  ///< density on the q grid
};

/// Trapezoid marginals of a normalized state, renormalized to exactly one.
inline Marginals marginals(const HybridState& st, double tol = 1e-6) {
    if (!st.P.matches(st.grid))
        throw SimError(ErrorCode::GridMismatch, "state fields do not match grid");
    Marginals m;
    m.pointer.resize(st.grid.x.n);
    m.particle.resize(st.grid.q.n);

    for (std::size_t ix = 0; ix < st.grid.x.n; ++ix) {
        std::span<const double> row(&st.P.v[ix * st.P.nq], st.P.nq);
        m.pointer[ix] = integrate_1d(row, st.grid.q);
    }
    std::vector<double> col(st.grid.x.n);
    for (std::size_t iq = 0; iq < st.grid.q.n; ++iq) {
        for (std::size_t ix = 0; ix < st.grid.x.n; ++ix) col[ix] = st.P.at(ix, iq);
        m.particle[iq] = integrate_1d(col, st.grid.x);
    }

    for (auto [vec, grid] : {std::pair{&m.pointer, &st.grid.x}, std::pair{&m.particle, &st.grid.q}}) {
        const double mass = integrate_1d(*vec, *grid);
        if (std::abs(mass - 1.0) > tol)
            throw SimError(ErrorCode::InvalidConfig, "marginal mass outside tolerance");
        for (double& v : *vec) v /= mass;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Validity report for the rigid-shift approximation
// ---------------------------------------------------------------------------

/// Magnitudes of the terms dropped by the interaction-only evolution for a
/// pointer element moving at velocity v, against the kept coupling term.
struct ResidualReport {
    double kept = 0.0;               ///< |M v lambda q_probe|
    double classical_kinetic = 0.0;  ///< M v^2 / 2
    double induced_kinetic = 0.0;    ///< M^2 v^2 lambda^2 t^2 / 2m
    double quantum_potential = 0.0;  ///< max over the q grid for the product state
    double ratio_classical = 0.0;
    double ratio_induced = 0.0;
    double ratio_quantum = 0.0;
};

inline ResidualReport residual_report(const PhysicalParams& p, double v, double t,
                                      double q_probe) {
    ResidualReport r;
    r.kept = std::abs(p.M * v * p.lambda * q_probe);
    r.classical_kinetic = 0.5 * p.M * v * v;
    r.induced_kinetic = 0.5 * p.M * p.M * v * v * p.lambda * p.lambda * t * t / p.m;

    // Quantum term of the product state along q at the pointer peak x = v t.
    const Grid1D qg(-(p.q0 + 8.0 * p.sigma_Q), p.q0 + 8.0 * p.sigma_Q, 4001);
    std::vector<double> prof(qg.n);
    for (std::size_t i = 0; i < qg.n; ++i) {
        const double q = qg.coord(i);
        prof[i] = gaussian_pdf(-p.lambda * q * t, 0.0, p.sigma_C) *
                  (0.5 * gaussian_pdf(q, -p.q0, p.sigma_Q) + 0.5 * gaussian_pdf(q, p.q0, p.sigma_Q));
    }
    const auto qp = quantum_potential(prof, qg, p.m, p.hbar);
    for (double u : qp) r.quantum_potential = std::max(r.quantum_potential, std::abs(u));

    auto ratio = [&](double mag) {
        if (r.kept > 0.0) return mag / r.kept;
        return mag > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    r.ratio_classical = ratio(r.classical_kinetic);
    r.ratio_induced = ratio(r.induced_kinetic);
    r.ratio_quantum = ratio(r.quantum_potential);
    return r;
}

}  // namespace cqsim
