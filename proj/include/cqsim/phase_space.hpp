#pragma once

// Classical phase-space densities built from configuration-space mixtures of
// free-particle ensembles, in two representations: one based on the principal
// function family (labelled by the initial position), one obtained by
// separation of variables (labelled by the velocity). Swapping the label
// density and profile maps one representation onto the other exactly.

#include <cmath>

#include "cqsim/core.hpp"

namespace cqsim {

/// A mixture over free-particle ensemble states. The label density and the
/// profile are both normalized 1-D densities; for the principal family the
/// labels are initial positions and the profile acts on velocity, for the
/// separated family the labels are velocities and the profile acts on the
/// co-moving position.
struct MixtureSpec {
    enum class Repr { Principal, Separated };

    Repr repr = Repr::Principal;
    GaussianMixture1D label_density;
    GaussianMixture1D profile;
    double mass = 1.0;
};

/// Phase-space density on an (x, p) grid; the Grid2D q-axis carries momentum.
struct PhaseDensity {
    Grid2D grid;
    Field2D rho;
    double t = 0.0;

    double mass() const { return integrate_2d(rho, grid); }
};

/// Narrowest grid-resolvable stand-in for a delta density: a Gaussian two
/// grid spacings wide. Biases any moment comparison by O(sigma^2) = O(4 h^2).
inline GaussianMixture1D delta_proxy(double center, const Grid1D& g) {
    return GaussianMixture1D({{1.0, center, 2.0 * g.spacing()}});
}

/// rho(x,p,t) = (1/m) * P_x0(x - p t/m) * F(p/m): the mixture of principal-
/// function states, singular as a family at t = 0.
inline PhaseDensity principal_density(const MixtureSpec& spec, const Grid2D& grid, double t) {
    if (spec.repr != MixtureSpec::Repr::Principal)
        throw SimError(ErrorCode::InvalidConfig, "spec is not in the principal representation");
    if (!(t > 0.0)) throw SimError(ErrorCode::ZeroTime, "principal family is singular at t = 0");
    PhaseDensity out{grid, Field2D(grid.x.n, grid.q.n), t};
    const double m = spec.mass;
    for (std::size_t ix = 0; ix < grid.x.n; ++ix) {
        const double x = grid.x.coord(ix);
        for (std::size_t ip = 0; ip < grid.q.n; ++ip) {
            const double pm = grid.q.coord(ip);
            out.rho.at(ix, ip) =
                spec.label_density.pdf(x - pm * t / m) * spec.profile.pdf(pm / m) / m;
        }
    }
    return out;
}

/// rho(x,p,t) = (1/m) * P_v(p/m) * F(x - p t/m): the mixture of separated-
/// variable states, regular at t = 0.
inline PhaseDensity separated_density(const MixtureSpec& spec, const Grid2D& grid, double t) {
    if (spec.repr != MixtureSpec::Repr::Separated)
        throw SimError(ErrorCode::InvalidConfig, "spec is not in the separated representation");
    PhaseDensity out{grid, Field2D(grid.x.n, grid.q.n), t};
    const double m = spec.mass;
    for (std::size_t ix = 0; ix < grid.x.n; ++ix) {
        const double x = grid.x.coord(ix);
        for (std::size_t ip = 0; ip < grid.q.n; ++ip) {
            const double pm = grid.q.coord(ip);
            out.rho.at(ix, ip) =
                spec.label_density.pdf(pm / m) * spec.profile.pdf(x - pm * t / m) / m;
        }
    }
    return out;
}

/// Maps a spec onto the other representation: the label density and the
/// profile trade places. An involution.
inline MixtureSpec equivalence_transform(const MixtureSpec& spec) {
    MixtureSpec out = spec;
    out.repr = (spec.repr == MixtureSpec::Repr::Principal) ? MixtureSpec::Repr::Separated
                                                           : MixtureSpec::Repr::Principal;
    out.label_density = spec.profile;
    out.profile = spec.label_density;
    return out;
}

/// Position marginal of a phase density (integral over momentum).
inline std::vector<double> position_marginal(const PhaseDensity& d) {
    std::vector<double> out(d.grid.x.n);
    for (std::size_t ix = 0; ix < d.grid.x.n; ++ix) {
        std::span<const double> row(&d.rho.v[ix * d.rho.nq], d.rho.nq);
        out[ix] = integrate_1d(row, d.grid.q);
    }
    return out;
}

/// Momentum marginal of a phase density (integral over position).
inline std::vector<double> momentum_marginal(const PhaseDensity& d) {
    std::vector<double> out(d.grid.q.n);
    std::vector<double> col(d.grid.x.n);
    for (std::size_t ip = 0; ip < d.grid.q.n; ++ip) {
        for (std::size_t ix = 0; ix < d.grid.x.n; ++ix) col[ix] = d.rho.at(ix, ip);
        out[ip] = integrate_1d(col, d.grid.x);
    }
    return out;
}

/// Largest pointwise difference between two phase densities on the same grid.
inline double max_pointwise_diff(const PhaseDensity& a, const PhaseDensity& b) {
    if (a.rho.nx != b.rho.nx || a.rho.nq != b.rho.nq)
        throw SimError(ErrorCode::GridMismatch, "phase densities on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i)
        d = std::max(d, std::abs(a.rho.v[i] - b.rho.v[i]));
    return d;
}

}  // namespace cqsim
