#pragma once

/// @file ledger.hpp
/// @brief Per-step energy ledger over a completed run, the piecewise-constant
///        and piecewise-linear time interpolants, and the time-step
///        difference norms used in the dt -> 0 studies.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "rothe/diagnostics.hpp"
#include "rothe/stepper.hpp"

namespace rothe {

/// One ledger row per completed step (k >= 1).
struct LedgerRow {
    int step = 0;
    double time = 0.0;
    EnergyBreakdown energy;
    double entropy = 0.0;         ///< int rho^k ln rho^k
    double entropy_margin = 0.0;  ///< one-step entropy production margin
    double mass = 0.0;            ///< int rho^k
    double mass_gap = 0.0;        ///< int rho^k - int rho^(k-1)
    double rho_min = 0.0;
    double rho_max = 0.0;
    // telescoped accumulators over steps 1..k
    double sum_dissipation = 0.0;      ///< all nonneg inequality terms, dt-scaled
    double telescoped_margin = 0.0;    ///< E0 - E_k - sum_dissipation
    double sum_velocity_remainder = 0.0;  ///< running sum of int h|v-g|^2 + (gamma-1)*remainder
    double sum_density_increments = 0.0;  ///< running sum of ||rho^k - rho^(k-1)||_gamma^gamma
    double sum_h1_velocity = 0.0;         ///< running sum of ||v||_2^2 + grad form
    // solver bookkeeping
    int picard_iterations = 0;
    int restarts = 0;
    double theta_used = 0.0;
    long lin_iters_continuity = 0;
    long lin_iters_momentum = 0;
    double residual_continuity = 0.0;
    double residual_momentum = 0.0;
    // pass flags
    bool flag_mass = false;
    bool flag_positivity = false;
    bool flag_upper_bound = false;
    bool flag_energy = false;
    bool flag_entropy = false;
};

struct EnergyLedger {
    double initial_energy = 0.0;  ///< E0 = kinetic + elastic of the initial state
    std::vector<LedgerRow> rows;

    bool all_flags_pass() const {
        for (const auto& r : rows)
            if (!(r.flag_mass && r.flag_positivity && r.flag_upper_bound && r.flag_energy &&
                  r.flag_entropy))
                return false;
        return true;
    }
};

/// Builds the full ledger for a sequence of converged states.
inline EnergyLedger build_ledger(const std::vector<State>& states, const Params& p) {
    if (states.empty()) throw std::invalid_argument("build_ledger: empty state sequence");
    EnergyLedger led;
    const LameOperator op(states[0].rho.grid, p);
    led.initial_energy = kinetic_energy(states[0].rho, states[0].v) +
                         elastic_energy(states[0].rho, p);
    const double e0_scale = std::max(led.initial_energy, 1e-300);
    const double mass0 = integrate(states[0].rho);
    double sum_diss = 0.0, sum_vr = 0.0, sum_dinc = 0.0, sum_h1 = 0.0;

    for (size_t k = 1; k < states.size(); ++k) {
        const State& prev = states[k - 1];
        const State& cur = states[k];
        Params pk = p;
        pk.eps = cur.eps_used > 0.0 ? cur.eps_used : p.eps;
        LedgerRow row;
        row.step = cur.step_index;
        row.time = cur.step_index * p.dt;
        row.energy = energy_inequality_check(prev.rho, prev.v, cur.rho, cur.v, op, pk);
        row.entropy = entropy_functional(cur.rho);
        row.entropy_margin = entropy_step_check(prev.rho, cur.rho, cur.v, pk);
        row.mass = integrate(cur.rho);
        row.mass_gap = row.mass - integrate(prev.rho);
        row.rho_min = *std::min_element(cur.rho.v.begin(), cur.rho.v.end());
        row.rho_max = *std::max_element(cur.rho.v.begin(), cur.rho.v.end());

        sum_diss += row.energy.dissipated_total();
        sum_vr += 2.0 * row.energy.velocity_diff + (p.gamma - 1.0) * row.energy.remainder;
        {
            double s = 0.0;
            for (size_t m = 0; m < cur.rho.v.size(); ++m)
                s += std::pow(std::abs(cur.rho.v[m] - prev.rho.v[m]), p.gamma);
            sum_dinc += s * cur.rho.grid.cell_volume();
        }
        sum_h1 += inner(cur.v, cur.v) + op.grad_form(cur.v);
        row.sum_dissipation = sum_diss;
        row.sum_velocity_remainder = sum_vr;
        row.sum_density_increments = sum_dinc;
        row.sum_h1_velocity = sum_h1;
        const double e_k = row.energy.kinetic_cur + row.energy.elastic_cur;
        row.telescoped_margin = led.initial_energy - e_k - sum_diss;

        row.picard_iterations = cur.report.picard_iterations;
        row.restarts = cur.report.restarts;
        row.theta_used = cur.report.theta_used;
        row.lin_iters_continuity = cur.report.lin_iters_continuity;
        row.lin_iters_momentum = cur.report.lin_iters_momentum;
        row.residual_continuity = cur.report.residual_continuity;
        row.residual_momentum = cur.report.residual_momentum;

        // flags: mass decay always, equality when the cutoff is inactive
        row.flag_mass = row.mass_gap <= 1e-8;
        if (row.rho_max < p.m1)
            row.flag_mass = row.flag_mass && std::abs(row.mass_gap) <= 1e-8 * std::max(mass0, 1e-300);
        row.flag_positivity = row.rho_min >= -1e-12 * p.m2;
        row.flag_upper_bound = row.rho_max <= p.m2 + 1e-8;
        row.flag_energy = row.energy.margin >= -1e-6 * e0_scale;
        const double entropy_scale =
            lp_norm(states[0].rho, std::numeric_limits<double>::infinity()) *
            states[0].rho.grid.lx() * states[0].rho.grid.ly() / p.dt;
        row.flag_entropy = row.entropy_margin >= -1e-6 * std::max(entropy_scale, 1e-300);
        led.rows.push_back(std::move(row));
    }
    return led;
}

/// Telescoped entropy inequality over the whole run:
/// int rho ln rho (T) + sum_k dt int rho^k div v^k <= int rho ln rho (0).
/// Returns the margin (>= 0 expected up to noise).
inline double telescoped_entropy_margin(const std::vector<State>& states, const Params& p) {
    double acc = 0.0;
    for (size_t k = 1; k < states.size(); ++k)
        acc += p.dt * inner(states[k].rho, divergence(states[k].v));
    return entropy_functional(states[0].rho) - entropy_functional(states.back().rho) - acc;
}

// ---------------------------------------------------------------------------
// Time interpolants and difference norms.
// ---------------------------------------------------------------------------

/// Stores a completed run and exposes the piecewise-constant interpolant
/// (value rho^k on [k dt, (k+1) dt)) and the piecewise-linear one.
struct TimeSeries {
    double dt = 0.0;
    std::vector<State> states;

    TimeSeries(double dt_, std::vector<State> s) : dt(dt_), states(std::move(s)) {
        if (states.size() < 2)
            throw std::invalid_argument("TimeSeries: needs at least two states");
    }

    int last_index() const { return static_cast<int>(states.size()) - 1; }
    double final_time() const { return last_index() * dt; }

    const State& piecewise_constant(double t) const {
        int k = static_cast<int>(std::floor(t / dt));
        if (k < 0) k = 0;
        if (k > last_index()) k = last_index();
        return states[k];
    }

    /// Linear-in-time density between the step samples.
    ScalarField piecewise_linear_rho(double t) const {
        int k = static_cast<int>(std::floor(t / dt));
        if (k < 0) k = 0;
        if (k >= last_index()) return states[last_index()].rho;
        const double w = (t - k * dt) / dt;
        ScalarField out = states[k].rho;
        for (size_t m = 0; m < out.v.size(); ++m)
            out.v[m] = (1.0 - w) * out.v[m] + w * states[k + 1].rho.v[m];
        return out;
    }
};

struct DtDifferenceNorms {
    double q59 = 0.0;       ///< sum_k dt ||rho^k||_{gamma+1}^{gamma+1}
    double q63_pow = 0.0;   ///< sum_k dt ||rho^k - rho^(k-1)||_gamma^gamma
    double q63_norm = 0.0;  ///< q63_pow^(1/gamma), the L_gamma(L_gamma) norm
    double q64 = 0.0;       ///< sum_k dt int h |v^k - v^(k-1)|^2
};

inline DtDifferenceNorms dt_difference_norms(const TimeSeries& ts, const Params& p) {
    if (ts.states.size() < 2)
        throw std::invalid_argument("dt_difference_norms: needs at least two steps");
    DtDifferenceNorms out;
    const double vol = ts.states[0].rho.grid.cell_volume();
    for (size_t k = 1; k < ts.states.size(); ++k) {
        const ScalarField& r = ts.states[k].rho;
        const ScalarField& hprev = ts.states[k - 1].rho;
        double s59 = 0.0, s63 = 0.0;
        for (size_t m = 0; m < r.v.size(); ++m) {
            s59 += std::pow(r.v[m], p.gamma + 1.0);
            s63 += std::pow(std::abs(r.v[m] - hprev.v[m]), p.gamma);
        }
        out.q59 += ts.dt * s59 * vol;
        out.q63_pow += ts.dt * s63 * vol;

        const VectorField hf = face_average(hprev);
        const VectorField& v = ts.states[k].v;
        const VectorField& g = ts.states[k - 1].v;
        double s64 = 0.0;
        for (size_t m = 0; m < v.u.size(); ++m) {
            const double d = v.u[m] - g.u[m];
            s64 += hf.u[m] * d * d;
        }
        for (size_t m = 0; m < v.vy.size(); ++m) {
            const double d = v.vy[m] - g.vy[m];
            s64 += hf.vy[m] * d * d;
        }
        out.q64 += ts.dt * s64 * vol;
    }
    out.q63_norm = std::pow(out.q63_pow, 1.0 / p.gamma);
    return out;
}

// ---------------------------------------------------------------------------
// Time-integrated weak form.
// ---------------------------------------------------------------------------

struct TimeIntegratedMomentumResidual {
    double momentum_dt = 0.0;   ///< - sum_k (psi_(k+1) - psi_k) <rho^k v^k, Phi>
    double convective = 0.0;    ///< sum_k dt psi_k <C^k, Phi>
    double viscous_friction = 0.0;  ///< sum_k dt psi_k <L v^k, Phi> (all wall terms included)
    double pressure = 0.0;      ///< - sum_k dt psi_k <P(rho^k), div Phi>
    double eps_term = 0.0;      ///< sum_k dt psi_k <T^k, Phi> (modeling gap vs the limit identity)
    double closed = 0.0;        ///< full discrete identity; ~ solver noise
    double physical = 0.0;      ///< identity without the eps terms
    double scale = 0.0;
};

/// Evaluates the time-integrated momentum identity over a completed run for
/// the separated test function psi(t) * Phi(x), with psi vanishing at both
/// endpoints (enforced). The time derivative pairs by Abel summation, so the
/// identity closes to solver tolerance for converged runs.
inline TimeIntegratedMomentumResidual weak_residual_momentum_time_integrated(
    const TimeSeries& ts, const std::function<double(double)>& psi, const VectorField& Phi,
    const LameOperator& op, const Params& p) {
    const int M = ts.last_index();
    std::vector<double> psik(M + 1);
    for (int k = 0; k <= M; ++k) psik[k] = psi(k * ts.dt);
    psik[0] = 0.0;
    psik[M] = 0.0;  // compact support in time

    TimeIntegratedMomentumResidual out;
    double field_scale = 0.0;
    for (int k = 0; k < M; ++k) {
        const State& s = ts.states[k];
        const VectorField rf = face_average(s.rho);
        double mom = 0.0;
        for (size_t m = 0; m < rf.u.size(); ++m) mom += rf.u[m] * s.v.u[m] * Phi.u[m];
        for (size_t m = 0; m < rf.vy.size(); ++m) mom += rf.vy[m] * s.v.vy[m] * Phi.vy[m];
        out.momentum_dt -= (psik[k + 1] - psik[k]) * mom * s.rho.grid.cell_volume();
    }
    for (int k = 1; k <= M; ++k) {
        const State& s = ts.states[k];
        const double w = ts.dt * psik[k];
        const VectorField q = mass_flux(s.rho, s.v, p);
        out.convective += w * inner(convection(q, s.v), Phi);
        out.viscous_friction += w * inner(op.apply(s.v), Phi);
        out.pressure -= w * inner(modified_pressure_field(s.rho, p), divergence(Phi));
        out.eps_term += w * inner(eps_regularization_term(s.rho, s.v, p), Phi);
        field_scale += std::abs(w) * (p.alpha() * l2_norm(s.v) * lp_norm(s.rho, 2.0) +
                                      l2_norm(op.apply(s.v)));
    }
    out.closed = out.momentum_dt + out.convective + out.viscous_friction + out.pressure +
                 out.eps_term;
    out.physical = out.momentum_dt + out.convective + out.viscous_friction + out.pressure;
    out.scale = l2_norm(Phi) * field_scale + std::abs(out.momentum_dt) + 1e-300;
    return out;
}

/// L_gamma(L_gamma) distance between the piecewise-constant density
/// interpolants of two runs over the same final time (the coarse dt must be
/// an integer multiple of the fine dt).
inline double interpolant_distance(const TimeSeries& coarse, const TimeSeries& fine,
                                   const Params& p) {
    const double T = std::min(coarse.final_time(), fine.final_time());
    const int n = static_cast<int>(std::round(T / fine.dt));
    const double vol = coarse.states[0].rho.grid.cell_volume();
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * fine.dt;
        const ScalarField& a = coarse.piecewise_constant(t).rho;
        const ScalarField& b = fine.piecewise_constant(t).rho;
        double s = 0.0;
        for (size_t m = 0; m < a.v.size(); ++m)
            s += std::pow(std::abs(a.v[m] - b.v[m]), p.gamma);
        acc += fine.dt * s * vol;
    }
    return std::pow(acc, 1.0 / p.gamma);
}

}  // namespace rothe
