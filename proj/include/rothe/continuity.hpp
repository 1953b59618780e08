#pragma once

/// @file continuity.hpp
/// @brief Density sub-solver: given a velocity field v and the previous
///        density h, solve alpha*rho + div(K(rho) rho v) - eps*Lap(rho)
///        = alpha*h*K(rho) with no-flux walls.
///
/// The convective flux is first-order upwind, which makes the matrix an
/// M-matrix for every frozen cutoff, so nonnegativity and the upper bound are
/// properties of the scheme rather than of the data. The cutoff factor is
/// lagged (Picard) to preserve that structure.

#include <cmath>
#include <tuple>

#include "rothe/grid.hpp"
#include "rothe/operators.hpp"
#include "rothe/params.hpp"
#include "rothe/sparse.hpp"

namespace rothe {

/// Mass flux q = v * K(rho_up) * rho_up on faces, upwinded by the sign of the
/// face velocity. Boundary normal faces carry zero flux (v is zero there and
/// the wall is impermeable either way). This is the single flux definition
/// shared by the density solver, the momentum convection, and the weak-form
/// residuals.
inline VectorField mass_flux(const ScalarField& rho, const VectorField& v, const Params& p) {
    require_same_grid(rho.grid, v.grid, "mass_flux");
    const Grid& g = rho.grid;
    VectorField q(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double vel = v.uat(i, j);
            const double up = vel >= 0.0 ? rho.at(i - 1, j) : rho.at(i, j);
            q.uat(i, j) = vel * cutoff(p, up) * up;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vel = v.vat(i, j);
            const double up = vel >= 0.0 ? rho.at(i, j - 1) : rho.at(i, j);
            q.vat(i, j) = vel * cutoff(p, up) * up;
        }
    return q;
}

struct ContinuityProblem {
    VectorField v;
    ScalarField h;
    Params params;

    ContinuityProblem(VectorField v_, ScalarField h_, const Params& p)
        : v(std::move(v_)), h(std::move(h_)), params(p) {
        require_same_grid(v.grid, h.grid, "ContinuityProblem");
        params.require_valid();
        if (!v.is_admissible())
            throw std::invalid_argument("ContinuityProblem: v has nonzero boundary normal faces");
        for (double x : h.v) {
            if (!(x >= 0.0)) throw std::invalid_argument("ContinuityProblem: h must be >= 0");
            if (!(x <= params.m2 + 1e-8 * params.m2))
                throw std::invalid_argument("ContinuityProblem: h must be <= m2");
        }
    }
};

struct DensitySolve {
    ScalarField rho;
    SolveStats stats;      ///< accumulated linear-solver stats (iterations summed)
    int sweeps = 0;        ///< inner Picard sweeps on the lagged cutoff
    bool converged = false;
    double residual = 0.0;  ///< relative nonlinear residual of the returned rho
};

namespace detail {

/// System matrix for the frozen cutoff field Kf (cell values of K at the
/// previous sweep's density): alpha*I + upwind convection + eps * (-Lap_N).
inline SparseOperator continuity_matrix(const VectorField& v, const ScalarField& Kf,
                                        const Params& p) {
    const Grid& g = v.grid;
    const int n = g.nx * g.ny;
    const double a = p.alpha();
    const double ex = p.eps / (g.hx * g.hx);
    const double ey = p.eps / (g.hy * g.hy);
    auto id = [&](int i, int j) { return j * g.nx + i; };

    std::vector<std::tuple<int, int, double>> trip;
    trip.reserve(static_cast<size_t>(n) * 5);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = id(i, j);
            double diag = a;
            if (i > 0) {
                diag += ex;
                trip.emplace_back(c, id(i - 1, j), -ex);
            }
            if (i < g.nx - 1) {
                diag += ex;
                trip.emplace_back(c, id(i + 1, j), -ex);
            }
            if (j > 0) {
                diag += ey;
                trip.emplace_back(c, id(i, j - 1), -ey);
            }
            if (j < g.ny - 1) {
                diag += ey;
                trip.emplace_back(c, id(i, j + 1), -ey);
            }
            trip.emplace_back(c, c, diag);
        }

    // Upwind convection: each interior face moves K(up)*rho(up) with the face
    // velocity; outflow adds to the diagonal, inflow to the neighbor column.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double vel = v.uat(i, j) / g.hx;
            const int left = id(i - 1, j), right = id(i, j);
            if (vel >= 0.0) {
                const double c = vel * Kf.at(i - 1, j);
                trip.emplace_back(left, left, c);
                trip.emplace_back(right, left, -c);
            } else {
                const double c = vel * Kf.at(i, j);
                trip.emplace_back(left, right, c);
                trip.emplace_back(right, right, -c);
            }
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vel = v.vat(i, j) / g.hy;
            const int bot = id(i, j - 1), top = id(i, j);
            if (vel >= 0.0) {
                const double c = vel * Kf.at(i, j - 1);
                trip.emplace_back(bot, bot, c);
                trip.emplace_back(top, bot, -c);
            } else {
                const double c = vel * Kf.at(i, j);
                trip.emplace_back(bot, top, c);
                trip.emplace_back(top, top, -c);
            }
        }
    return SparseOperator::from_triplets(n, trip);
}

}  // namespace detail

/// Nonlinear residual of the density equation at (rho, v, h):
/// alpha*rho + div(q) - eps*Lap(rho) - alpha*h*K(rho), relative to the
/// right-hand-side scale.
inline double continuity_residual(const ScalarField& rho, const VectorField& v,
                                  const ScalarField& h, const Params& p) {
    const ScalarField divq = divergence(mass_flux(rho, v, p));
    const ScalarField lap = neumann_laplacian(rho);
    const double a = p.alpha();
    double rr = 0.0, scale = 0.0;
    for (size_t k = 0; k < rho.v.size(); ++k) {
        const double rhs = a * h.v[k] * cutoff(p, rho.v[k]);
        const double r = a * rho.v[k] + divq.v[k] - p.eps * lap.v[k] - rhs;
        rr += r * r;
        scale += rhs * rhs;
    }
    const double s = std::sqrt(scale);
    return std::sqrt(rr) / (s > 0.0 ? s : 1.0);
}

/// Lagged-cutoff Picard solve of the density equation. Below m1 the cutoff is
/// identically one and the loop settles in two sweeps.
inline DensitySolve solve_density(const ContinuityProblem& prob,
                                  const ScalarField* warm_start = nullptr) {
    const Params& p = prob.params;
    const Grid& g = prob.h.grid;
    const int n = g.nx * g.ny;
    constexpr int kMaxSweeps = 100;

    DensitySolve out;
    ScalarField rho = warm_start ? *warm_start : prob.h;
    require_same_grid(rho.grid, g, "solve_density warm start");

    SolveOptions lopt;
    lopt.tol = p.lin_tol;
    bool maybe_converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        ScalarField Kf(g);
        for (int k = 0; k < n; ++k) Kf.v[k] = cutoff(p, rho.v[k]);
        const SparseOperator A = detail::continuity_matrix(prob.v, Kf, p);
        std::vector<double> rhs(n);
        for (int k = 0; k < n; ++k) rhs[k] = p.alpha() * prob.h.v[k] * Kf.v[k];
        lopt.x0 = &rho.v;
        SolveResult lin = solve_general(A, rhs, lopt);
        out.stats.iterations += lin.stats.iterations;
        out.stats.residual = lin.stats.residual;
        out.sweeps = sweep + 1;
        if (!lin.stats.converged) {
            out.rho = rho;
            out.converged = false;
            return out;
        }
        // In the cutoff band the reaction map has slope up to h*|K'|, so the
        // sweep needs damping to contract; sigma = 2/(2 + lambda) is optimal
        // for a spectrum in [-lambda, 0]. Below m1 this is a full step.
        double lambda = 0.0;
        for (int k = 0; k < n; ++k)
            lambda = std::max(lambda, prob.h.v[k] * std::abs(cutoff_derivative(p, rho.v[k])));
        const double sigma = 2.0 / (2.0 + lambda);
        double dn = 0.0, xn = 0.0;
        for (int k = 0; k < n; ++k) {
            const double next = (1.0 - sigma) * rho.v[k] + sigma * lin.x[k];
            const double d = next - rho.v[k];
            dn += d * d;
            xn += next * next;
            rho.v[k] = next;
        }
        const double rel = std::sqrt(dn) / std::max(std::sqrt(xn), 1e-300);
        if (rel <= p.fp_tol) {
            // one confirming sweep with the refreshed cutoff
            if (maybe_converged) {
                out.converged = true;
                break;
            }
            maybe_converged = true;
        } else {
            maybe_converged = false;
        }
    }
    out.rho = std::move(rho);
    out.residual = continuity_residual(out.rho, prob.v, prob.h, p);
    out.stats.converged = out.converged;
    return out;
}

/// Min/max/mass report with pass flags against 0, m2 and mass decay.
struct BoundsReport {
    double rho_min = 0.0;
    double rho_max = 0.0;
    double mass_gap = 0.0;  ///< integrate(rho) - integrate(h)
    bool nonneg_ok = false;
    bool upper_ok = false;
    bool mass_ok = false;
};

inline BoundsReport density_bounds_report(const ScalarField& rho, const ScalarField& h,
                                          const Params& p) {
    require_same_grid(rho.grid, h.grid, "density_bounds_report");
    BoundsReport r;
    r.rho_min = rho.v.empty() ? 0.0 : rho.v[0];
    r.rho_max = r.rho_min;
    for (double x : rho.v) {
        r.rho_min = std::min(r.rho_min, x);
        r.rho_max = std::max(r.rho_max, x);
    }
    r.mass_gap = integrate(rho) - integrate(h);
    const double tol = 1e-8 * p.m2;
    r.nonneg_ok = r.rho_min >= -tol;
    r.upper_ok = r.rho_max <= p.m2 + tol;
    r.mass_ok = r.mass_gap <= tol;
    return r;
}

}  // namespace rothe
