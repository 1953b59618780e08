#pragma once

/// @file stepper.hpp
/// @brief One implicit time step as the damped fixed point of
///        v -> solve_lame(forcing(solve_density(v), v, prev)), the outer time
///        loop, and the eps-continuation study.
///
/// The damping factor starts at params.theta. The lagged inertia term makes
/// the plain map expansive once alpha*rho/lambda_min(L) grows past
/// 2/theta - 1, so divergence is detected (growing updates) and the step is
/// restarted from the previous state with theta halved. Every converged step
/// is verified against the coupled nonlinear residuals before it is accepted.

#include <cmath>
#include <string>
#include <vector>

#include "rothe/continuity.hpp"
#include "rothe/diagnostics.hpp"
#include "rothe/grid.hpp"
#include "rothe/momentum.hpp"
#include "rothe/operators.hpp"
#include "rothe/params.hpp"

namespace rothe {

struct StepReport {
    bool converged = false;
    int picard_iterations = 0;
    int restarts = 0;
    double theta_used = 0.0;
    std::vector<double> rho_updates;  ///< relative L2 update per iteration
    std::vector<double> v_updates;
    long lin_iters_continuity = 0;
    long lin_iters_momentum = 0;
    double residual_continuity = 0.0;  ///< relative coupled residuals at exit
    double residual_momentum = 0.0;
    BoundsReport bounds;
    std::string failure;  ///< empty on success
};

struct State {
    ScalarField rho;
    VectorField v;
    int step_index = 0;
    double eps_used = 0.0;
    StepReport report;

    State() = default;
    State(ScalarField r, VectorField vel, int idx = 0, double eps = 0.0)
        : rho(std::move(r)), v(std::move(vel)), step_index(idx), eps_used(eps) {}
};

/// Relative L2 distance between two same-shaped value arrays.
inline double relative_update(const std::vector<double>& next, const std::vector<double>& prev) {
    double dn = 0.0, xn = 0.0;
    for (size_t k = 0; k < next.size(); ++k) {
        const double d = next[k] - prev[k];
        dn += d * d;
        xn += next[k] * next[k];
    }
    return std::sqrt(dn) / std::max(std::sqrt(xn), 1e-300);
}

/// Relative residual of the momentum equation at (rho, v) given (h, g).
inline double momentum_residual(const ScalarField& rho, const VectorField& v,
                                const ScalarField& h, const VectorField& g,
                                const LameOperator& op, const Params& p) {
    MomentumProblem prob(rho, v, h, g, p);
    const VectorField F = assemble_forcing(prob);
    const VectorField Lv = op.apply(v);
    double rr = 0.0;
    for (size_t k = 0; k < F.u.size(); ++k) {
        const double r = Lv.u[k] - F.u[k];
        rr += r * r;
    }
    for (size_t k = 0; k < F.vy.size(); ++k) {
        const double r = Lv.vy[k] - F.vy[k];
        rr += r * r;
    }
    rr *= rho.grid.cell_volume();
    const ForcingTerms t = forcing_terms(prob);
    const double scale = l2_norm(t.alpha_hg) + l2_norm(t.alpha_rho_v) + l2_norm(t.convective) +
                         l2_norm(t.pressure_gradient) + l2_norm(t.eps_term) + l2_norm(Lv);
    return std::sqrt(rr) / std::max(scale, 1e-300);
}

namespace detail {

struct AttemptResult {
    bool converged = false;
    bool diverged = false;
    ScalarField rho;
    VectorField v;
};

inline AttemptResult picard_attempt(const State& prev, const Params& p, const LameOperator& op,
                                    const VectorField& v_start, double theta, StepReport& rep) {
    AttemptResult res;
    res.v = v_start;
    res.rho = prev.rho;
    double min_vupdate = std::numeric_limits<double>::infinity();
    int grow_streak = 0;
    int big_streak = 0;
    int stagnant_gate_checks = 0;

    for (int it = 0; it < p.fp_max_iter; ++it) {
        ContinuityProblem cprob(res.v, prev.rho, p);
        const DensitySolve ds = solve_density(cprob, &res.rho);
        rep.lin_iters_continuity += ds.stats.iterations;
        if (!ds.converged) {
            rep.failure = "continuity sub-solver did not converge";
            return res;
        }
        const double rho_update = relative_update(ds.rho.v, res.rho.v);
        res.rho = ds.rho;

        MomentumProblem mprob(res.rho, res.v, prev.rho, prev.v, p);
        const VectorField F = assemble_forcing(mprob);
        const LameSolve ls = solve_lame(op, F, p, &res.v);
        rep.lin_iters_momentum += ls.stats.iterations;
        if (!ls.stats.converged) {
            rep.failure = "momentum sub-solver did not converge";
            return res;
        }

        VectorField vnext(res.v.grid);
        for (size_t k = 0; k < vnext.u.size(); ++k)
            vnext.u[k] = (1.0 - theta) * res.v.u[k] + theta * ls.w.u[k];
        for (size_t k = 0; k < vnext.vy.size(); ++k)
            vnext.vy[k] = (1.0 - theta) * res.v.vy[k] + theta * ls.w.vy[k];
        double v_update = relative_update(vnext.u, res.v.u);
        {
            const double dv = relative_update(vnext.vy, res.v.vy);
            v_update = std::max(v_update, dv);
        }
        res.v = std::move(vnext);
        rep.picard_iterations++;
        rep.rho_updates.push_back(rho_update);
        rep.v_updates.push_back(v_update);

        min_vupdate = std::min(min_vupdate, std::max(v_update, 1e-300));
        if (v_update > 50.0 * min_vupdate && v_update > p.fp_tol) {
            grow_streak++;
            if (grow_streak >= 3) {
                res.diverged = true;
                return res;
            }
        } else {
            grow_streak = 0;
        }
        // sustained order-one relative updates mean the map is not contracting
        // at this damping (a healthy iteration leaves that regime in a few
        // sweeps even from a cold start)
        big_streak = (v_update > 0.5) ? big_streak + 1 : 0;
        if (big_streak >= 5) {
            res.diverged = true;
            return res;
        }

        if (std::max(rho_update, v_update) <= p.fp_tol) {
            // make the pair self-consistent, then verify the coupled residuals
            ContinuityProblem final_prob(res.v, prev.rho, p);
            const DensitySolve final_ds = solve_density(final_prob, &res.rho);
            rep.lin_iters_continuity += final_ds.stats.iterations;
            if (!final_ds.converged) {
                rep.failure = "continuity sub-solver did not converge at exit";
                return res;
            }
            res.rho = final_ds.rho;
            const double rc = continuity_residual(res.rho, res.v, prev.rho, p);
            const double rm = momentum_residual(res.rho, res.v, prev.rho, prev.v, op, p);
            rep.residual_continuity = rc;
            rep.residual_momentum = rm;
            if (rc <= 10.0 * p.lin_tol && rm <= 10.0 * p.lin_tol) {
                res.converged = true;
                return res;
            }
            // the updates have stalled at the inexact-solver floor but the
            // residual gate still fails: more sweeps cannot help
            if (v_update <= 0.01 * p.fp_tol && rho_update <= 0.01 * p.fp_tol &&
                ++stagnant_gate_checks >= 3) {
                rep.failure = "stagnated above the residual gate";
                return res;
            }
        }
    }
    rep.failure = "fixed-point iteration cap reached";
    return res;
}

}  // namespace detail

/// One implicit step. On failure the returned state carries report.converged
/// = false with the failure string and trace; fields hold the last iterate.
inline State advance_step(const State& prev, const Params& p, const LameOperator& op,
                          const VectorField* v_init = nullptr) {
    p.require_valid();
    State next;
    next.step_index = prev.step_index + 1;
    next.eps_used = p.eps;
    StepReport& rep = next.report;

    double theta = p.theta;
    const VectorField& start = v_init ? *v_init : prev.v;
    constexpr int kMaxRestarts = 6;
    for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
        rep.theta_used = theta;
        detail::AttemptResult r = detail::picard_attempt(prev, p, op, start, theta, rep);
        if (r.converged) {
            next.rho = std::move(r.rho);
            next.v = std::move(r.v);
            rep.bounds = density_bounds_report(next.rho, prev.rho, p);
            if (!(rep.bounds.nonneg_ok && rep.bounds.upper_ok && rep.bounds.mass_ok)) {
                rep.converged = false;
                rep.failure = "converged fields violate the density bounds";
                return next;
            }
            rep.converged = true;
            rep.failure.clear();
            return next;
        }
        // anything else (divergence, stagnation, a sub-solver failing on a
        // runaway iterate): halve the damping and restart from the last state
        rep.restarts++;
        theta *= 0.5;
        if (rep.failure.empty()) rep.failure = "fixed-point iteration diverged";
    }
    rep.failure += "; no damping factor tried converged";
    next.rho = prev.rho;
    next.v = prev.v;
    return next;
}

inline State advance_step(const State& prev, const Params& p, const VectorField* v_init = nullptr) {
    const LameOperator op(prev.rho.grid, p);
    return advance_step(prev, p, op, v_init);
}

struct RunResult {
    std::vector<State> states;  ///< states[0] is the initial state
    bool completed = false;
    int failed_step = -1;  ///< step index of the failure, -1 if none
};

/// Runs num_steps implicit steps, stopping early on failure with partial
/// results retained.
inline RunResult run(const State& initial, int num_steps, const Params& p) {
    if (num_steps < 1) throw std::invalid_argument("run: num_steps must be >= 1");
    RunResult out;
    out.states.reserve(num_steps + 1);
    out.states.push_back(initial);
    const LameOperator op(initial.rho.grid, p);
    for (int k = 1; k <= num_steps; ++k) {
        State next = advance_step(out.states.back(), p, op);
        const bool ok = next.report.converged;
        out.states.push_back(std::move(next));
        if (!ok) {
            out.failed_step = k;
            return out;
        }
    }
    out.completed = true;
    return out;
}

// ---------------------------------------------------------------------------
// Epsilon continuation.
// ---------------------------------------------------------------------------

struct EpsTracePoint {
    double eps = 0.0;
    bool converged = false;
    double grad_rho_l2 = 0.0;             ///< ||grad rho_eps||_2
    double p_l2 = 0.0;                    ///< ||P(rho_eps)||_2
    double rho_max = 0.0;
    std::vector<double> superlevel;       ///< one entry per threshold
    double g_diff_prev = -1.0;            ///< ||G_eps - G_(previous eps)||_2
    double g_diff_ref = -1.0;             ///< ||G_eps - G_(finest eps)||_2
};

struct EpsContinuation {
    std::vector<State> states;
    std::vector<EpsTracePoint> trace;
    bool all_converged = false;
};

/// Re-solves one step from `prev` at every eps in the (strictly decreasing)
/// sequence, warm-starting each solve from the previous answer, and records
/// the limit-passage quantities.
inline EpsContinuation epsilon_continuation(const State& prev, const Params& base,
                                            const std::vector<double>& eps_sequence,
                                            const std::vector<double>& thresholds) {
    if (eps_sequence.empty())
        throw std::invalid_argument("epsilon_continuation: empty eps sequence");
    for (size_t k = 0; k + 1 < eps_sequence.size(); ++k)
        if (!(eps_sequence[k] > eps_sequence[k + 1]) || !(eps_sequence[k + 1] > 0.0))
            throw std::invalid_argument(
                "epsilon_continuation: eps sequence must be strictly decreasing and positive");

    EpsContinuation out;
    out.all_converged = true;
    const LameOperator op(prev.rho.grid, base);
    const VectorField* warm = nullptr;
    std::vector<ScalarField> fluxes;
    for (double eps : eps_sequence) {
        Params p = base;
        p.eps = eps;
        State s = advance_step(prev, p, op, warm);
        EpsTracePoint t;
        t.eps = eps;
        t.converged = s.report.converged;
        if (s.report.converged) {
            t.grad_rho_l2 = l2_norm(gradient(s.rho));
            t.p_l2 = lp_norm(modified_pressure_field(s.rho, p), 2.0);
            t.rho_max = lp_norm(s.rho, std::numeric_limits<double>::infinity());
            for (double m : thresholds) t.superlevel.push_back(superlevel_measure(s.rho, m));
            fluxes.push_back(effective_flux(s.rho, s.v, p));
        } else {
            out.all_converged = false;
            fluxes.emplace_back();
        }
        out.states.push_back(std::move(s));
        if (out.states.back().report.converged) warm = &out.states.back().v;
        out.trace.push_back(std::move(t));
    }
    // flux differences against the previous point and the finest point
    const ScalarField* ref = nullptr;
    for (size_t k = fluxes.size(); k-- > 0;)
        if (out.trace[k].converged) {
            ref = &fluxes[k];
            break;
        }
    for (size_t k = 0; k < fluxes.size(); ++k) {
        if (!out.trace[k].converged) continue;
        if (k > 0 && out.trace[k - 1].converged) {
            double s = 0.0;
            for (size_t m = 0; m < fluxes[k].v.size(); ++m) {
                const double d = fluxes[k].v[m] - fluxes[k - 1].v[m];
                s += d * d;
            }
            out.trace[k].g_diff_prev = std::sqrt(s * fluxes[k].grid.cell_volume());
        }
        if (ref) {
            double s = 0.0;
            for (size_t m = 0; m < fluxes[k].v.size(); ++m) {
                const double d = fluxes[k].v[m] - ref->v[m];
                s += d * d;
            }
            out.trace[k].g_diff_ref = std::sqrt(s * fluxes[k].grid.cell_volume());
        }
    }
    return out;
}

}  // namespace rothe
