#pragma once

/// @file diagnostics.hpp
/// @brief Every proof-side quantity as a computable functional: the per-step
///        energy breakdown and its margin, the entropy production margin, the
///        Helmholtz decomposition, the effective viscous flux, super-level
///        measures, weak-form residuals, and the boundary vorticity relation.
///
/// The energy breakdown evaluates each term with the scheme's own quadratic
/// forms. For a converged step those terms satisfy an exact discrete identity
/// whose only non-reported pieces (cutoff slack, upwind dissipation, pressure
/// flux slack) are nonnegative, so the reported margin is nonnegative up to
/// linear-solver noise.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "rothe/continuity.hpp"
#include "rothe/grid.hpp"
#include "rothe/momentum.hpp"
#include "rothe/operators.hpp"
#include "rothe/params.hpp"
#include "rothe/sparse.hpp"

namespace rothe {

// ---------------------------------------------------------------------------
// Energy inequality.
// ---------------------------------------------------------------------------

/// Face-weighted kinetic energy 1/2 * <rho, avg(v^2)>.
inline double kinetic_energy(const ScalarField& rho, const VectorField& v) {
    return 0.5 * inner(rho, face_square_average(v));
}

inline double elastic_energy(const ScalarField& rho, const Params& p) {
    double s = 0.0;
    for (double x : rho.v) s += std::pow(x, p.gamma);
    return s * rho.grid.cell_volume() / (p.gamma - 1.0);
}

/// integral of rho*ln(rho) with the 0*ln 0 = 0 convention (negative values
/// are clamped; the solver keeps rho nonnegative up to roundoff).
inline double entropy_functional(const ScalarField& rho) {
    double s = 0.0;
    for (double x : rho.v)
        if (x > 0.0) s += x * std::log(x);
    return s * rho.grid.cell_volume();
}

/// All terms of the one-step energy inequality, each already multiplied by
/// dt where the inequality carries 1/dt. Margin >= 0 is the discrete law.
struct EnergyBreakdown {
    double kinetic_prev = 0.0;      ///< 1/2 int h g^2
    double kinetic_cur = 0.0;       ///< 1/2 int rho v^2
    double elastic_prev = 0.0;      ///< 1/(gamma-1) int h^gamma
    double elastic_cur = 0.0;       ///< 1/(gamma-1) int rho^gamma
    double dissipation_visc = 0.0;  ///< dt * 2 mu int |D(v)|^2   (operator form)
    double dissipation_div = 0.0;   ///< dt * nu int (div v)^2
    double friction = 0.0;          ///< dt * int_bdry f (v.tau)^2 (operator form)
    double velocity_diff = 0.0;     ///< 1/2 int h |v - g|^2
    double remainder = 0.0;         ///< 1/(gamma-1) int [(g-1)rho^g + h^g - g rho^(g-1) K(rho) h]
    double eps_dissipation = 0.0;   ///< dt * eps * gamma/(gamma-1) <grad rho, grad rho^(gamma-1)>
    // For a converged step the exact discrete identity reads
    //   margin = upwind_slack + pressure_slack - cutoff_slack + solver noise.
    // upwind_slack >= 0 always; pressure_slack >= 0 wherever s*K(s) is
    // monotone along each face jump (in particular below m1); cutoff_slack
    // vanishes identically while rho stays below m1, which is the regime the
    // inequality is asserted in.
    double cutoff_slack = 0.0;      ///< 1/2 int (1 - K(rho)) h v^2
    double upwind_slack = 0.0;      ///< dt * upwind kinetic dissipation
    double pressure_slack = 0.0;    ///< dt * (pressure work minus its flux route)
    double margin = 0.0;            ///< slack of the inequality; >= -1e-6 E0 expected

    double dissipated_total() const {
        return dissipation_visc + dissipation_div + friction + velocity_diff + remainder +
               eps_dissipation;
    }
};

/// Evaluates the energy inequality for the step (h, g) -> (rho, v).
/// `op` must be the Lame operator the step was solved with.
inline EnergyBreakdown energy_inequality_check(const ScalarField& h, const VectorField& g,
                                               const ScalarField& rho, const VectorField& v,
                                               const LameOperator& op, const Params& p) {
    EnergyBreakdown e;
    const double dt = p.dt;
    e.kinetic_prev = kinetic_energy(h, g);
    e.kinetic_cur = kinetic_energy(rho, v);
    e.elastic_prev = elastic_energy(h, p);
    e.elastic_cur = elastic_energy(rho, p);

    e.dissipation_visc = dt * p.mu * (op.grad_form(v) + op.divdiv_form(v));
    e.dissipation_div = dt * p.nu * op.divdiv_form(v);
    e.friction = dt * op.friction_form(v, v);

    const VectorField hf = face_average(h);
    double vd = 0.0;
    for (size_t k = 0; k < hf.u.size(); ++k) {
        const double d = v.u[k] - g.u[k];
        vd += hf.u[k] * d * d;
    }
    for (size_t k = 0; k < hf.vy.size(); ++k) {
        const double d = v.vy[k] - g.vy[k];
        vd += hf.vy[k] * d * d;
    }
    e.velocity_diff = 0.5 * vd * rho.grid.cell_volume();

    const double gam = p.gamma;
    double rem = 0.0, slack = 0.0;
    const ScalarField v2c = face_square_average(v);
    for (size_t k = 0; k < rho.v.size(); ++k) {
        const double r = rho.v[k], hh = h.v[k];
        rem += (gam - 1.0) * std::pow(r, gam) + std::pow(hh, gam) -
               gam * std::pow(r, gam - 1.0) * cutoff(p, r) * hh;
        slack += (1.0 - cutoff(p, r)) * hh * v2c.v[k];
    }
    e.remainder = rem * rho.grid.cell_volume() / (gam - 1.0);
    e.cutoff_slack = 0.5 * slack * rho.grid.cell_volume();

    ScalarField rg1(rho.grid);
    for (size_t k = 0; k < rho.v.size(); ++k) rg1.v[k] = std::pow(rho.v[k], gam - 1.0);
    e.eps_dissipation = dt * p.eps * gam / (gam - 1.0) * neumann_grad_pair(rho, rg1);

    const VectorField q = mass_flux(rho, v, p);
    e.upwind_slack = dt * upwind_kinetic_dissipation(q, v);

    // pressure work minus its continuity-tested route; sign-definite per face
    // below m1 (and wherever s*K(s) stays monotone along the jump)
    const ScalarField P = modified_pressure_field(rho, p);
    const double pressure_work = -inner(P, divergence(v));
    const double flux_route =
        inner(divergence(q), rg1) * gam / (gam - 1.0) * (-1.0);  // = sum_f q * d(c rho^(g-1))
    e.pressure_slack = dt * (pressure_work - flux_route);

    e.margin = (e.kinetic_prev - e.kinetic_cur) - (e.elastic_cur - e.elastic_prev) -
               e.dissipation_visc - e.dissipation_div - e.friction - e.velocity_diff -
               e.remainder - e.eps_dissipation;
    return e;
}

/// Entropy production margin of one step:
/// -[ (1/dt) int (rho ln rho - h ln h) + int rho div v ].
/// Nonnegative for the converged scheme below m1 (convexity + upwinding).
inline double entropy_step_check(const ScalarField& h, const ScalarField& rho,
                                 const VectorField& v, const Params& p) {
    const double ds = entropy_functional(rho) - entropy_functional(h);
    const double production = inner(rho, divergence(v));
    return -(ds / p.dt + production);
}

// ---------------------------------------------------------------------------
// Helmholtz decomposition.
// ---------------------------------------------------------------------------

struct HelmholtzDecomposition {
    ScalarField phi;               ///< Neumann potential, mean zero (cells)
    std::vector<double> a_corner;  ///< stream potential at corners, zero on walls
    VectorField grad_part;
    VectorField curl_part;
    double reconstruction_error = 0.0;  ///< ||v - grad phi - curl A||_2 / ||v||_2
    SolveStats phi_stats;
    SolveStats a_stats;
};

namespace detail {

inline SparseOperator neumann_poisson_matrix(const Grid& g) {
    const int n = g.nx * g.ny;
    auto id = [&](int i, int j) { return j * g.nx + i; };
    std::vector<std::tuple<int, int, double>> trip;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double diag = 0.0;
            auto link = [&](int ii, int jj, double c) {
                diag += c;
                trip.emplace_back(id(i, j), id(ii, jj), -c);
            };
            if (i > 0) link(i - 1, j, 1.0 / (g.hx * g.hx));
            if (i < g.nx - 1) link(i + 1, j, 1.0 / (g.hx * g.hx));
            if (j > 0) link(i, j - 1, 1.0 / (g.hy * g.hy));
            if (j < g.ny - 1) link(i, j + 1, 1.0 / (g.hy * g.hy));
            trip.emplace_back(id(i, j), id(i, j), diag);
        }
    return SparseOperator::from_triplets(n, trip, true);
}

/// Dirichlet Laplacian on interior corners (wall corners pinned to zero).
inline SparseOperator corner_dirichlet_matrix(const Grid& g) {
    const int mx = g.nx - 1, my = g.ny - 1;
    const int n = mx * my;
    auto id = [&](int i, int j) { return (j - 1) * mx + (i - 1); };
    std::vector<std::tuple<int, int, double>> trip;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const int c = id(i, j);
            const double dx = 1.0 / (g.hx * g.hx), dy = 1.0 / (g.hy * g.hy);
            trip.emplace_back(c, c, 2.0 * dx + 2.0 * dy);
            if (i > 1) trip.emplace_back(c, id(i - 1, j), -dx);
            if (i < g.nx - 1) trip.emplace_back(c, id(i + 1, j), -dx);
            if (j > 1) trip.emplace_back(c, id(i, j - 1), -dy);
            if (j < g.ny - 1) trip.emplace_back(c, id(i, j + 1), -dy);
        }
    return SparseOperator::from_triplets(n, trip, true);
}

}  // namespace detail

/// v = grad(phi) + perp-grad(A): phi from the Neumann Poisson problem with a
/// mean-zero gauge, A from the Dirichlet corner problem (A constant = 0 on
/// the walls realizes perp-grad(A) . n = 0 on the rectangle). On the MAC
/// complex the split is exact up to solver tolerance and the two parts are
/// discretely orthogonal.
inline HelmholtzDecomposition helmholtz(const VectorField& v, const Params& p) {
    const Grid& g = v.grid;
    HelmholtzDecomposition out;

    // gradient part; the assembled matrix is -Lap, so the right side flips sign
    const ScalarField dv = divergence(v);
    std::vector<double> rhs = dv.v;
    for (double& x : rhs) x = -x;
    double mean = 0.0;
    for (double x : rhs) mean += x;
    mean /= rhs.size();
    for (double& x : rhs) x -= mean;  // kernel gauge (compatible up to roundoff)
    SolveOptions opt;
    opt.tol = p.lin_tol;
    const SparseOperator L = detail::neumann_poisson_matrix(g);
    SolveResult rphi = solve_spd(L, rhs, opt);
    out.phi_stats = rphi.stats;
    double pm = 0.0;
    for (double x : rphi.x) pm += x;
    pm /= rphi.x.size();
    for (double& x : rphi.x) x -= pm;
    out.phi = ScalarField(g);
    out.phi.v = std::move(rphi.x);
    out.grad_part = gradient(out.phi);

    // divergence-free part: Lap A = rot v at interior corners, A = 0 on walls
    const auto wc = rot_corners(v);
    const int mx = g.nx - 1, my = g.ny - 1;
    std::vector<double> arhs(static_cast<size_t>(mx) * my);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            arhs[static_cast<size_t>(j - 1) * mx + (i - 1)] =
                -wc[static_cast<size_t>(j) * (g.nx + 1) + i];
    const SparseOperator A = detail::corner_dirichlet_matrix(g);
    SolveResult ra = solve_spd(A, arhs, opt);
    out.a_stats = ra.stats;
    out.a_corner.assign(static_cast<size_t>(g.nx + 1) * (g.ny + 1), 0.0);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.a_corner[static_cast<size_t>(j) * (g.nx + 1) + i] =
                ra.x[static_cast<size_t>(j - 1) * mx + (i - 1)];

    // curl part: u = -dA/dy, v = dA/dx on faces; walls stay exactly zero
    out.curl_part = VectorField(g);
    auto acorn = [&](int i, int j) { return out.a_corner[static_cast<size_t>(j) * (g.nx + 1) + i]; };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.curl_part.uat(i, j) = -(acorn(i, j + 1) - acorn(i, j)) / g.hy;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.curl_part.vat(i, j) = (acorn(i + 1, j) - acorn(i, j)) / g.hx;

    VectorField resid(g);
    for (size_t k = 0; k < v.u.size(); ++k)
        resid.u[k] = v.u[k] - out.grad_part.u[k] - out.curl_part.u[k];
    for (size_t k = 0; k < v.vy.size(); ++k)
        resid.vy[k] = v.vy[k] - out.grad_part.vy[k] - out.curl_part.vy[k];
    const double vn = l2_norm(v);
    out.reconstruction_error = vn > 0.0 ? l2_norm(resid) / vn : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Effective viscous flux and super-level measures.
// ---------------------------------------------------------------------------

/// G = P(rho) - (2 mu + nu) div v, shifted so that integral(G) equals
/// integral(P(rho)). For admissible v the shift is a no-op because
/// integral(div v) vanishes; that is asserted, not assumed.
inline ScalarField effective_flux(const ScalarField& rho, const VectorField& v, const Params& p) {
    const Grid& g = rho.grid;
    if (!v.is_admissible())
        throw std::invalid_argument("effective_flux: velocity has nonzero boundary normal faces");
    const ScalarField dv = divergence(v);
    ScalarField G(g);
    for (size_t k = 0; k < G.v.size(); ++k)
        G.v[k] = modified_pressure(p, rho.v[k]) - (2.0 * p.mu + p.nu) * dv.v[k];
    const double shift = (integrate(modified_pressure_field(rho, p)) - integrate(G)) /
                         (g.lx() * g.ly());
    for (double& x : G.v) x += shift;
    return G;
}

/// Area of {rho > m}.
inline double superlevel_measure(const ScalarField& rho, double m) {
    if (!(m > 0.0)) throw std::invalid_argument("superlevel_measure: threshold must be > 0");
    size_t count = 0;
    for (double x : rho.v)
        if (x > m) ++count;
    return static_cast<double>(count) * rho.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Weak-form residuals (one time step).
// ---------------------------------------------------------------------------

/// Scalar test functions sampled at cell centers; vector test functions are
/// admissible by construction (sin factors vanish on the normal walls).
/// Reproducible: a fixed low-order trigonometric family with seeded random
/// coefficients.
struct TestFunctionFamily {
    explicit TestFunctionFamily(uint64_t seed) : rng_(seed) {}

    ScalarField scalar(const Grid& g) {
        std::uniform_real_distribution<double> coeff(-1.0, 1.0);
        ScalarField f(g);
        constexpr double kPi = 3.14159265358979323846;
        double c[3][3];
        for (auto& row : c)
            for (double& x : row) x = coeff(rng_);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.xc(i) / g.lx(), y = g.yc(j) / g.ly();
                double s = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        s += c[a][b] * std::cos(a * kPi * x) * std::cos(b * kPi * y);
                f.at(i, j) = s;
            }
        return f;
    }

    VectorField vector(const Grid& g) {
        std::uniform_real_distribution<double> coeff(-1.0, 1.0);
        VectorField f(g);
        constexpr double kPi = 3.14159265358979323846;
        double cu[2][2], cv[2][2];
        for (auto& row : cu)
            for (double& x : row) x = coeff(rng_);
        for (auto& row : cv)
            for (double& x : row) x = coeff(rng_);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i) {
                const double x = g.xf(i) / g.lx(), y = g.yc(j) / g.ly();
                double s = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        s += cu[a][b] * std::sin((a + 1) * kPi * x) * std::cos(b * kPi * y);
                f.uat(i, j) = s;
            }
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.xc(i) / g.lx(), y = g.yf(j) / g.ly();
                double s = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        s += cv[a][b] * std::cos(a * kPi * x) * std::sin((b + 1) * kPi * y);
                f.vat(i, j) = s;
            }
        f.project_admissible();  // exact zeros against roundoff in sin(k pi)
        return f;
    }

  private:
    std::mt19937_64 rng_;
};

struct ContinuityWeakResidual {
    double closed = 0.0;    ///< solver flux, cutoff and eps terms included
    double upwind = 0.0;    ///< solver flux against the physical identity
    double centered = 0.0;  ///< centered flux against the physical identity
    double scale = 0.0;     ///< magnitude scale for relative comparisons
};

/// Definition-style identity for the mass update:
/// int rho v . grad(test) - (1/dt) int (rho - h) test.
inline ContinuityWeakResidual weak_residual_continuity(const ScalarField& h,
                                                       const ScalarField& rho,
                                                       const VectorField& v,
                                                       const ScalarField& test, const Params& p) {
    const Grid& g = rho.grid;
    const double vol = g.cell_volume();
    ContinuityWeakResidual out;

    const VectorField q = mass_flux(rho, v, p);
    double flux_up = 0.0, flux_cen = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double dt_ = (test.at(i, j) - test.at(i - 1, j)) / g.hx;
            flux_up += q.uat(i, j) * dt_ * vol;
            flux_cen += v.uat(i, j) * 0.5 * (rho.at(i - 1, j) + rho.at(i, j)) * dt_ * vol;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dt_ = (test.at(i, j) - test.at(i, j - 1)) / g.hy;
            flux_up += q.vat(i, j) * dt_ * vol;
            flux_cen += v.vat(i, j) * 0.5 * (rho.at(i, j - 1) + rho.at(i, j)) * dt_ * vol;
        }

    double mass_term = 0.0, cutoff_term = 0.0;
    for (size_t k = 0; k < rho.v.size(); ++k) {
        mass_term += p.alpha() * (rho.v[k] - h.v[k]) * test.v[k];
        cutoff_term += p.alpha() * h.v[k] * (1.0 - cutoff(p, rho.v[k])) * test.v[k];
    }
    mass_term *= vol;
    cutoff_term *= vol;
    // residual = <equation residual field, test>; scale accordingly
    out.scale = lp_norm(test, 2.0) * p.alpha() * (lp_norm(h, 2.0) + lp_norm(rho, 2.0)) +
                std::abs(flux_up) + 1e-300;

    const double eps_term = -p.eps * neumann_grad_pair(rho, test);
    out.upwind = flux_up - mass_term;
    out.closed = out.upwind - cutoff_term + eps_term;
    out.centered = flux_cen - mass_term;
    return out;
}

struct MomentumWeakResidual {
    double inertia = 0.0;     ///< (1/dt) int (rho v - h g) . test
    double convective = 0.0;  ///< - int rho v (x) v : grad test (solver stencil)
    double viscous = 0.0;     ///< 2 mu int D(v):D(test) + grad-div part
    double divdiv = 0.0;      ///< nu int div v div test
    double pressure = 0.0;    ///< - int pi(rho) div test (physical pressure)
    double friction = 0.0;    ///< int_bdry f (v.tau)(test.tau)
    double pressure_gap = 0.0;  ///< - int (P - pi) div test (cutoff gap)
    double eps_term = 0.0;      ///< regularization term paired with test
    double closed = 0.0;        ///< full solver identity; ~ solver noise
    double physical = 0.0;      ///< Definition identity with pi, no eps terms
    double scale = 0.0;
};

inline MomentumWeakResidual weak_residual_momentum(const ScalarField& h, const VectorField& gv,
                                                   const ScalarField& rho, const VectorField& v,
                                                   const VectorField& test,
                                                   const LameOperator& op, const Params& p) {
    MomentumWeakResidual out;
    const Grid& g = rho.grid;
    const double vol = g.cell_volume();

    const VectorField hf = face_average(h);
    const VectorField rf = face_average(rho);
    double inert = 0.0;
    for (size_t k = 0; k < hf.u.size(); ++k)
        inert += (rf.u[k] * v.u[k] - hf.u[k] * gv.u[k]) * test.u[k];
    for (size_t k = 0; k < hf.vy.size(); ++k)
        inert += (rf.vy[k] * v.vy[k] - hf.vy[k] * gv.vy[k]) * test.vy[k];
    out.inertia = p.alpha() * inert * vol;

    const VectorField q = mass_flux(rho, v, p);
    out.convective = inner(convection(q, v), test);

    const double full_form = inner(op.apply(v), test);
    out.friction = op.friction_form(v, test);
    const double divdiv_pair = inner(divergence(v), divergence(test));
    out.divdiv = p.nu * divdiv_pair;
    out.viscous = full_form - out.friction - out.divdiv;  // mu (grad-pair + divdiv-pair)

    const ScalarField P = modified_pressure_field(rho, p);
    ScalarField pi(g);
    for (size_t k = 0; k < pi.v.size(); ++k) pi.v[k] = physical_pressure(p, rho.v[k]);
    const ScalarField dtest = divergence(test);
    out.pressure = -inner(pi, dtest);
    out.pressure_gap = -inner(P, dtest) - out.pressure;

    out.eps_term = inner(eps_regularization_term(rho, v, p), test);

    out.closed = out.inertia + out.convective + full_form + out.pressure + out.pressure_gap +
                 out.eps_term;
    out.physical = out.inertia + out.convective + full_form + out.pressure;
    // residual = <equation residual field, test>; use field norms for scale
    MomentumProblem prob(rho, v, h, gv, p);
    const ForcingTerms t = forcing_terms(prob);
    const double field_scale = l2_norm(t.alpha_hg) + l2_norm(t.alpha_rho_v) +
                               l2_norm(t.convective) + l2_norm(t.pressure_gradient) +
                               l2_norm(t.eps_term) + l2_norm(op.apply(v));
    out.scale = l2_norm(test) * field_scale + 1e-300;
    return out;
}

// ---------------------------------------------------------------------------
// Boundary vorticity relation (informational, first order).
// ---------------------------------------------------------------------------

struct VorticityTraceReport {
    double max_gap = 0.0;   ///< max | omega_wall - (2 chi - f/mu) v.tau |, chi = 0
    double mean_gap = 0.0;
};

/// Compares the corner vorticity linearly extrapolated to each wall against
/// -(f/mu) * (wall tangential velocity).
inline VorticityTraceReport vorticity_trace_check(const VectorField& v, const Params& p) {
    const Grid& g = v.grid;
    const auto w = rot_corners(v);
    auto wc = [&](int i, int j) { return w[static_cast<size_t>(j) * (g.nx + 1) + i]; };
    const BoundaryTrace trace = wall_tangential_trace(v, p);
    const double k = -p.friction / p.mu;

    VorticityTraceReport rep;
    double sum = 0.0;
    int count = 0;
    auto record = [&](double omega_wall, double vtau) {
        const double gap = std::abs(omega_wall - k * vtau);
        rep.max_gap = std::max(rep.max_gap, gap);
        sum += gap;
        ++count;
    };
    // v.tau follows the counterclockwise boundary orientation:
    // +u on the bottom, -u on the top, -v on the left, +v on the right
    for (int i = 1; i < g.nx; ++i) {
        record(2.0 * wc(i, 1) - wc(i, 2), trace.bottom[i - 1]);
        record(2.0 * wc(i, g.ny - 1) - wc(i, g.ny - 2), -trace.top[i - 1]);
    }
    for (int j = 1; j < g.ny; ++j) {
        record(2.0 * wc(1, j) - wc(2, j), -trace.left[j - 1]);
        record(2.0 * wc(g.nx - 1, j) - wc(g.nx - 2, j), trace.right[j - 1]);
    }
    rep.mean_gap = count ? sum / count : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Remainder algebra.
// ---------------------------------------------------------------------------

struct RemainderScan {
    double min_value = 0.0;   ///< min over the (rho, h) grid of the remainder
    double fitted_delta = 0.0;  ///< min remainder / |rho - h|^gamma off the diagonal
};

/// Dense scan of (gamma-1) rho^gamma + h^gamma - gamma rho^(gamma-1) K(rho) h
/// over [0, m2]^2.
inline RemainderScan remainder_scan(const Params& p, double step = 1e-2) {
    RemainderScan out;
    out.min_value = std::numeric_limits<double>::infinity();
    out.fitted_delta = std::numeric_limits<double>::infinity();
    const double gam = p.gamma;
    const int n = static_cast<int>(std::round(p.m2 / step));
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
            const double r = a * step, hh = b * step;
            const double rem = (gam - 1.0) * std::pow(r, gam) + std::pow(hh, gam) -
                               gam * std::pow(r, gam - 1.0) * cutoff(p, r) * hh;
            out.min_value = std::min(out.min_value, rem);
            if (a != b) {
                const double ratio = rem / std::pow(std::abs(r - hh), gam);
                out.fitted_delta = std::min(out.fitted_delta, ratio);
            }
        }
    return out;
}

}  // namespace rothe
