#pragma once

/// @file momentum.hpp
/// @brief Lame sub-solver -mu*Lap(w) - (mu+nu)*grad(div w) = F with pinned
///        normal faces and Navier friction on the tangential walls, plus the
///        forcing assembly for the coupled step.
///
/// Friction enters the operator through Robin ghost elimination against w's
/// own wall trace, so the matrix stays symmetric positive definite and the
/// Dirichlet limit f -> infinity is uniformly well conditioned. The grad-div
/// term is assembled as gradient(divergence(.)), whose quadratic form is
/// exactly (mu+nu)*||div w||^2 on admissible fields.
///
/// The convection operator advects each velocity component over its shifted
/// control volume with the face-pair averaged mass flux and upwind face
/// values. With that choice the discrete kinetic-energy transport identity
///   <C(q,v), v> = 1/2 <avg(div q), v^2> + (upwind dissipation >= 0)
/// holds exactly, which is what makes the per-step energy inequality a
/// theorem of the scheme.

#include <cmath>
#include <tuple>

#include "rothe/continuity.hpp"
#include "rothe/grid.hpp"
#include "rothe/operators.hpp"
#include "rothe/params.hpp"
#include "rothe/sparse.hpp"

namespace rothe {

// ---------------------------------------------------------------------------
// DOF packing: interior u faces first, then interior v faces.
// ---------------------------------------------------------------------------

inline int velocity_dof_count(const Grid& g) {
    return (g.nx - 1) * g.ny + g.nx * (g.ny - 1);
}

inline int u_dof(const Grid& g, int i, int j) { return j * (g.nx - 1) + (i - 1); }
inline int v_dof(const Grid& g, int i, int j) {
    return (g.nx - 1) * g.ny + (j - 1) * g.nx + i;
}

inline std::vector<double> pack_velocity(const VectorField& v) {
    const Grid& g = v.grid;
    std::vector<double> x(velocity_dof_count(g));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) x[u_dof(g, i, j)] = v.uat(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) x[v_dof(g, i, j)] = v.vat(i, j);
    return x;
}

inline VectorField unpack_velocity(const Grid& g, const std::vector<double>& x) {
    VectorField v(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) v.uat(i, j) = x[u_dof(g, i, j)];
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.vat(i, j) = x[v_dof(g, i, j)];
    return v;
}

/// Robin elimination coefficient for a wall at distance h/2 from the first
/// tangential face: 2*mu*f / (h * (2*mu + f*h)). Tends to f/h for small f and
/// to the Dirichlet mirror 2*mu/h^2 as f -> infinity.
inline double robin_wall_coefficient(double mu, double f, double h) {
    return 2.0 * mu * f / (h * (2.0 * mu + f * h));
}

class LameOperator {
  public:
    LameOperator(const Grid& g, const Params& p) : grid_(g), p_(p) {
        p.require_valid();
        assemble();
    }

    const Grid& grid() const { return grid_; }
    const SparseOperator& matrix() const { return op_; }

    VectorField apply(const VectorField& v) const {
        return unpack_velocity(grid_, op_.apply(pack_velocity(v)));
    }

    /// Same-component gradient energy: all face-difference pairs the Laplacian
    /// rows see, including the pinned zeros at the normal walls.
    double grad_form(const VectorField& v) const {
        const Grid& g = grid_;
        const double vol = g.cell_volume();
        double s = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i <= g.nx; ++i) {
                const double d = (v.uat(i, j) - v.uat(i - 1, j)) / g.hx;
                s += d * d * vol;
            }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) {
                const double d = (v.uat(i, j) - v.uat(i, j - 1)) / g.hy;
                s += d * d * vol;
            }
        for (int j = 1; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double d = (v.vat(i, j) - v.vat(i, j - 1)) / g.hy;
                s += d * d * vol;
            }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) {
                const double d = (v.vat(i, j) - v.vat(i - 1, j)) / g.hx;
                s += d * d * vol;
            }
        return s;
    }

    double divdiv_form(const VectorField& v) const {
        const ScalarField d = divergence(v);
        return inner(d, d);
    }

    /// Friction bilinear form over the wall-adjacent tangential faces.
    double friction_form(const VectorField& a, const VectorField& b) const {
        const Grid& g = grid_;
        const double vol = g.cell_volume();
        const double cy = robin_wall_coefficient(p_.mu, p_.friction, g.hy);
        const double cx = robin_wall_coefficient(p_.mu, p_.friction, g.hx);
        double s = 0.0;
        for (int i = 1; i < g.nx; ++i)
            s += cy * (a.uat(i, 0) * b.uat(i, 0) + a.uat(i, g.ny - 1) * b.uat(i, g.ny - 1)) * vol;
        for (int j = 1; j < g.ny; ++j)
            s += cx * (a.vat(0, j) * b.vat(0, j) + a.vat(g.nx - 1, j) * b.vat(g.nx - 1, j)) * vol;
        return s;
    }

    /// Full operator quadratic form; equals
    /// mu*grad_form + (mu+nu)*divdiv_form + friction_form identically.
    double energy_form(const VectorField& v) const {
        return p_.mu * grad_form(v) + (p_.mu + p_.nu) * divdiv_form(v) + friction_form(v, v);
    }

  private:
    void assemble() {
        const Grid& g = grid_;
        const double mu = p_.mu;
        const double gd = p_.mu + p_.nu;  // grad-div coefficient
        const double ix2 = 1.0 / (g.hx * g.hx);
        const double iy2 = 1.0 / (g.hy * g.hy);
        const double ixy = 1.0 / (g.hx * g.hy);
        const double cfy = robin_wall_coefficient(mu, p_.friction, g.hy);
        const double cfx = robin_wall_coefficient(mu, p_.friction, g.hx);

        std::vector<std::tuple<int, int, double>> trip;
        trip.reserve(static_cast<size_t>(velocity_dof_count(g)) * 9);

        auto add = [&](int r, int c, double v) { trip.emplace_back(r, c, v); };

        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) {
                const int r = u_dof(g, i, j);
                double diag = 0.0;
                // x neighbors: -mu*Lap and the grad-div x-block share the stencil
                const double cx = (mu + gd) * ix2;
                diag += 2.0 * cx;
                if (i - 1 >= 1) add(r, u_dof(g, i - 1, j), -cx);
                if (i + 1 <= g.nx - 1) add(r, u_dof(g, i + 1, j), -cx);
                // y neighbors: interior pairs from -mu*Lap, Robin walls
                if (j > 0) {
                    diag += mu * iy2;
                    add(r, u_dof(g, i, j - 1), -mu * iy2);
                } else {
                    diag += cfy;
                }
                if (j < g.ny - 1) {
                    diag += mu * iy2;
                    add(r, u_dof(g, i, j + 1), -mu * iy2);
                } else {
                    diag += cfy;
                }
                // grad-div cross couplings to v
                auto addv = [&](int vi, int vj, double val) {
                    if (vj >= 1 && vj <= g.ny - 1) add(r, v_dof(g, vi, vj), val);
                };
                addv(i, j + 1, -gd * ixy);
                addv(i, j, gd * ixy);
                addv(i - 1, j + 1, gd * ixy);
                addv(i - 1, j, -gd * ixy);
                add(r, r, diag);
            }

        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int r = v_dof(g, i, j);
                double diag = 0.0;
                const double cy = (mu + gd) * iy2;
                diag += 2.0 * cy;
                if (j - 1 >= 1) add(r, v_dof(g, i, j - 1), -cy);
                if (j + 1 <= g.ny - 1) add(r, v_dof(g, i, j + 1), -cy);
                if (i > 0) {
                    diag += mu * ix2;
                    add(r, v_dof(g, i - 1, j), -mu * ix2);
                } else {
                    diag += cfx;
                }
                if (i < g.nx - 1) {
                    diag += mu * ix2;
                    add(r, v_dof(g, i + 1, j), -mu * ix2);
                } else {
                    diag += cfx;
                }
                auto addu = [&](int ui, int uj, double val) {
                    if (ui >= 1 && ui <= g.nx - 1) add(r, u_dof(g, ui, uj), val);
                };
                addu(i + 1, j, -gd * ixy);
                addu(i, j, gd * ixy);
                addu(i + 1, j - 1, gd * ixy);
                addu(i, j - 1, -gd * ixy);
                add(r, r, diag);
            }

        op_ = SparseOperator::from_triplets(velocity_dof_count(g), trip, true);
    }

    Grid grid_;
    Params p_;
    SparseOperator op_;
};

// ---------------------------------------------------------------------------
// Momentum convection.
// ---------------------------------------------------------------------------

/// div(q (x) v) per velocity component over shifted control volumes, mass flux
/// averaged to the control-volume faces, advected value upwinded.
inline VectorField convection(const VectorField& q, const VectorField& v) {
    require_same_grid(q.grid, v.grid, "convection");
    const Grid& g = v.grid;
    VectorField out(g);
    auto up = [](double flux, double a, double b) { return flux >= 0.0 ? a : b; };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double Ql = 0.5 * (q.uat(i - 1, j) + q.uat(i, j));
            const double Qr = 0.5 * (q.uat(i, j) + q.uat(i + 1, j));
            const double Fl = Ql * up(Ql, v.uat(i - 1, j), v.uat(i, j));
            const double Fr = Qr * up(Qr, v.uat(i, j), v.uat(i + 1, j));
            double Fb = 0.0, Ft = 0.0;
            if (j > 0) {
                const double Qb = 0.5 * (q.vat(i - 1, j) + q.vat(i, j));
                Fb = Qb * up(Qb, v.uat(i, j - 1), v.uat(i, j));
            }
            if (j < g.ny - 1) {
                const double Qt = 0.5 * (q.vat(i - 1, j + 1) + q.vat(i, j + 1));
                Ft = Qt * up(Qt, v.uat(i, j), v.uat(i, j + 1));
            }
            out.uat(i, j) = (Fr - Fl) / g.hx + (Ft - Fb) / g.hy;
        }

    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double Qb = 0.5 * (q.vat(i, j - 1) + q.vat(i, j));
            const double Qt = 0.5 * (q.vat(i, j) + q.vat(i, j + 1));
            const double Fb = Qb * up(Qb, v.vat(i, j - 1), v.vat(i, j));
            const double Ft = Qt * up(Qt, v.vat(i, j), v.vat(i, j + 1));
            double Fl = 0.0, Fr = 0.0;
            if (i > 0) {
                const double Ql = 0.5 * (q.uat(i, j - 1) + q.uat(i, j));
                Fl = Ql * up(Ql, v.vat(i - 1, j), v.vat(i, j));
            }
            if (i < g.nx - 1) {
                const double Qr = 0.5 * (q.uat(i + 1, j - 1) + q.uat(i + 1, j));
                Fr = Qr * up(Qr, v.vat(i, j), v.vat(i + 1, j));
            }
            out.vat(i, j) = (Fr - Fl) / g.hx + (Ft - Fb) / g.hy;
        }
    return out;
}

/// Nonnegative kinetic energy lost to the upwind bias:
/// <C(q,v), v> - 1/2 <div q, avg(v^2)> computed face by face in closed form.
inline double upwind_kinetic_dissipation(const VectorField& q, const VectorField& v) {
    require_same_grid(q.grid, v.grid, "upwind_kinetic_dissipation");
    const Grid& g = v.grid;
    double s = 0.0;
    // u-cell faces in x: pairs (i-1, i) for i = 1..nx, pinned ends included
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double Q = 0.5 * (q.uat(i - 1, j) + q.uat(i, j));
            const double d = v.uat(i, j) - v.uat(i - 1, j);
            s += 0.5 * std::abs(Q) * d * d * g.hy;
        }
    // u-cell faces in y: corner fluxes between u rows
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double Q = 0.5 * (q.vat(i - 1, j) + q.vat(i, j));
            const double d = v.uat(i, j) - v.uat(i, j - 1);
            s += 0.5 * std::abs(Q) * d * d * g.hx;
        }
    // v-cell faces in y
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double Q = 0.5 * (q.vat(i, j - 1) + q.vat(i, j));
            const double d = v.vat(i, j) - v.vat(i, j - 1);
            s += 0.5 * std::abs(Q) * d * d * g.hx;
        }
    // v-cell faces in x
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double Q = 0.5 * (q.uat(i, j - 1) + q.uat(i, j));
            const double d = v.vat(i, j) - v.vat(i - 1, j);
            s += 0.5 * std::abs(Q) * d * d * g.hy;
        }
    return s;
}

// ---------------------------------------------------------------------------
// Forcing assembly.
// ---------------------------------------------------------------------------

struct MomentumProblem {
    ScalarField rho;
    VectorField v;
    ScalarField h;
    VectorField g;
    Params params;

    MomentumProblem(ScalarField rho_, VectorField v_, ScalarField h_, VectorField g_,
                    const Params& p)
        : rho(std::move(rho_)), v(std::move(v_)), h(std::move(h_)), g(std::move(g_)), params(p) {
        require_same_grid(rho.grid, v.grid, "MomentumProblem");
        require_same_grid(rho.grid, h.grid, "MomentumProblem");
        require_same_grid(rho.grid, g.grid, "MomentumProblem");
        params.require_valid();
    }
};

struct ForcingTerms {
    VectorField alpha_hg;           ///< alpha * avg(h) * g
    VectorField alpha_rho_v;        ///< alpha * avg(rho) * v
    VectorField convective;         ///< div(q (x) v), q = mass_flux(rho, v)
    VectorField pressure_gradient;  ///< grad(P(rho))
    VectorField eps_term;           ///< -(eps/2) * avg(Lap rho) * v
};

inline ScalarField modified_pressure_field(const ScalarField& rho, const Params& p) {
    ScalarField out(rho.grid);
    for (size_t k = 0; k < rho.v.size(); ++k) out.v[k] = modified_pressure(p, rho.v[k]);
    return out;
}

/// The regularization term of the momentum equation in the symmetric form
/// whose pairing with v cancels the diffusion flux of the density equation
/// exactly (see the energy identity note at the top of this file).
inline VectorField eps_regularization_term(const ScalarField& rho, const VectorField& v,
                                           const Params& p) {
    const VectorField lap_f = face_average(neumann_laplacian(rho));
    VectorField out(v.grid);
    const Grid& g = v.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.uat(i, j) = -0.5 * p.eps * lap_f.uat(i, j) * v.uat(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.vat(i, j) = -0.5 * p.eps * lap_f.vat(i, j) * v.vat(i, j);
    return out;
}

inline ForcingTerms forcing_terms(const MomentumProblem& prob) {
    const Params& p = prob.params;
    const Grid& g = prob.rho.grid;
    const double a = p.alpha();
    ForcingTerms t{VectorField(g), VectorField(g), VectorField(g), VectorField(g),
                   VectorField(g)};

    const VectorField hf = face_average(prob.h);
    const VectorField rf = face_average(prob.rho);
    for (size_t k = 0; k < hf.u.size(); ++k) {
        t.alpha_hg.u[k] = a * hf.u[k] * prob.g.u[k];
        t.alpha_rho_v.u[k] = a * rf.u[k] * prob.v.u[k];
    }
    for (size_t k = 0; k < hf.vy.size(); ++k) {
        t.alpha_hg.vy[k] = a * hf.vy[k] * prob.g.vy[k];
        t.alpha_rho_v.vy[k] = a * rf.vy[k] * prob.v.vy[k];
    }
    t.convective = convection(mass_flux(prob.rho, prob.v, p), prob.v);
    t.pressure_gradient = gradient(modified_pressure_field(prob.rho, p));
    t.eps_term = eps_regularization_term(prob.rho, prob.v, p);
    // products with interior-face factors leave the pinned faces zero already
    t.alpha_hg.project_admissible();
    t.alpha_rho_v.project_admissible();
    return t;
}

inline VectorField assemble_forcing(const MomentumProblem& prob) {
    const ForcingTerms t = forcing_terms(prob);
    VectorField F(prob.rho.grid);
    for (size_t k = 0; k < F.u.size(); ++k)
        F.u[k] = t.alpha_hg.u[k] - t.alpha_rho_v.u[k] - t.convective.u[k] -
                 t.pressure_gradient.u[k] - t.eps_term.u[k];
    for (size_t k = 0; k < F.vy.size(); ++k)
        F.vy[k] = t.alpha_hg.vy[k] - t.alpha_rho_v.vy[k] - t.convective.vy[k] -
                  t.pressure_gradient.vy[k] - t.eps_term.vy[k];
    return F;
}

/// Tangential velocity evaluated on the wall itself via the Robin ghost
/// closure: the wall value is the ghost/interior average, i.e. the first
/// interior sample scaled by 2*mu / (2*mu + f*h). For f = 0 this reduces to
/// the plain near-wall sample; as f grows it decays to the no-slip value.
inline BoundaryTrace wall_tangential_trace(const VectorField& w, const Params& p) {
    BoundaryTrace t = boundary_tangential_trace(w);
    const double sy = 2.0 * p.mu / (2.0 * p.mu + p.friction * w.grid.hy);
    const double sx = 2.0 * p.mu / (2.0 * p.mu + p.friction * w.grid.hx);
    for (double& x : t.bottom) x *= sy;
    for (double& x : t.top) x *= sy;
    for (double& x : t.left) x *= sx;
    for (double& x : t.right) x *= sx;
    return t;
}

struct LameSolve {
    VectorField w;
    SolveStats stats;
};

/// Solve the Lame system for a given forcing. Normal boundary faces of the
/// result are exactly zero.
inline LameSolve solve_lame(const LameOperator& op, const VectorField& F,
                            const Params& p, const VectorField* warm = nullptr) {
    require_same_grid(op.grid(), F.grid, "solve_lame");
    SolveOptions opt;
    opt.tol = p.lin_tol;
    std::vector<double> x0;
    if (warm) {
        x0 = pack_velocity(*warm);
        opt.x0 = &x0;
    }
    SolveResult r = solve_spd(op.matrix(), pack_velocity(F), opt);
    LameSolve out{unpack_velocity(op.grid(), r.x), r.stats};
    return out;
}

inline LameSolve solve_lame(const VectorField& F, const Params& p) {
    LameOperator op(F.grid, p);
    return solve_lame(op, F, p);
}

}  // namespace rothe
