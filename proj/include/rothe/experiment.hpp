#pragma once

/// @file experiment.hpp
/// @brief Experiment orchestration: single runs, eps- and dt-sweeps, result
///        export (ledger.csv, summary.csv, field dumps, plot data) and the
///        verify mode that re-derives every ledger flag from dumped fields.
///
/// CSV bodies are deterministic: fixed column order, 17-significant-digit
/// decimals, no timestamps. Sweep points write into their own subdirectories
/// so concurrent execution cannot interleave files.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rothe/config.hpp"
#include "rothe/ledger.hpp"
#include "rothe/stepper.hpp"

namespace rothe {

namespace csv {

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline const char* ledger_header() {
    return "step,time,kinetic,elastic,entropy,dissipation_visc,dissipation_div,friction,"
           "velocity_diff,remainder,eps_dissipation,cutoff_slack,upwind_slack,pressure_slack,"
           "energy_margin,entropy_margin,mass,mass_gap,rho_min,rho_max,sum_dissipation,"
           "telescoped_margin,sum_velocity_remainder,sum_density_increments,sum_h1_velocity,"
           "picard_iters,restarts,theta_used,lin_iters_continuity,lin_iters_momentum,"
           "residual_continuity,residual_momentum,flag_mass,flag_positivity,flag_upper_bound,"
           "flag_energy,flag_entropy";
}

inline std::string ledger_row(const LedgerRow& r) {
    std::ostringstream os;
    os << r.step << ',' << num(r.time) << ',' << num(r.energy.kinetic_cur) << ','
       << num(r.energy.elastic_cur) << ',' << num(r.entropy) << ','
       << num(r.energy.dissipation_visc) << ',' << num(r.energy.dissipation_div) << ','
       << num(r.energy.friction) << ',' << num(r.energy.velocity_diff) << ','
       << num(r.energy.remainder) << ',' << num(r.energy.eps_dissipation) << ','
       << num(r.energy.cutoff_slack) << ',' << num(r.energy.upwind_slack) << ','
       << num(r.energy.pressure_slack) << ',' << num(r.energy.margin) << ','
       << num(r.entropy_margin) << ',' << num(r.mass) << ',' << num(r.mass_gap) << ','
       << num(r.rho_min) << ',' << num(r.rho_max) << ',' << num(r.sum_dissipation) << ','
       << num(r.telescoped_margin) << ',' << num(r.sum_velocity_remainder) << ','
       << num(r.sum_density_increments) << ',' << num(r.sum_h1_velocity) << ','
       << r.picard_iterations << ',' << r.restarts << ',' << num(r.theta_used) << ','
       << r.lin_iters_continuity << ',' << r.lin_iters_momentum << ','
       << num(r.residual_continuity) << ',' << num(r.residual_momentum) << ','
       << (r.flag_mass ? 1 : 0) << ',' << (r.flag_positivity ? 1 : 0) << ','
       << (r.flag_upper_bound ? 1 : 0) << ',' << (r.flag_energy ? 1 : 0) << ','
       << (r.flag_entropy ? 1 : 0);
    return os.str();
}

/// Least-squares slope of log(y) against log(x), skipping nonpositive pairs.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0)) continue;
        const double x = std::log(xs[k]), y = std::log(ys[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace csv

namespace fsys = std::filesystem;

inline void write_text_file(const fsys::path& path, const std::string& body) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << body;
}

inline void dump_state_fields(const fsys::path& dir, const State& s) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), "%06d", s.step_index);
    dump_scalar((dir / (std::string("rho_") + tag + ".dat")).string(), s.rho, "rho");
    dump_vector((dir / (std::string("u_") + tag + ".dat")).string(),
                (dir / (std::string("v_") + tag + ".dat")).string(), s.v);
}

struct RunArtifacts {
    RunResult result;
    EnergyLedger ledger;
    bool flags_pass = false;
};

/// Single run: ledger.csv, summary.csv, resolved config copy, field dumps.
/// `start` overrides the preset initial state (used by prepared dt sweeps).
inline RunArtifacts execute_run(const ExperimentConfig& cfg, const fsys::path& dir,
                                const State* start = nullptr) {
    fsys::create_directories(dir / "fields");
    {
        std::ofstream os(dir / "config.txt");
        write_config(os, cfg);
    }
    RunArtifacts art;
    const State init = start ? *start : make_initial_state(cfg);
    art.result = run(init, cfg.steps, cfg.params);

    const size_t converged_states =
        art.result.completed ? art.result.states.size()
                             : art.result.states.size() - 1;  // drop the failed attempt
    std::vector<State> good(art.result.states.begin(),
                            art.result.states.begin() + converged_states);
    if (good.size() >= 2) art.ledger = build_ledger(good, cfg.params);
    else art.ledger.initial_energy = kinetic_energy(init.rho, init.v) + elastic_energy(init.rho, cfg.params);

    // field dumps: every dump_interval-th step and its predecessor (so verify
    // always has consecutive pairs), plus the first and the final pair
    for (size_t k = 0; k < good.size(); ++k) {
        const bool interval_hit =
            cfg.dump_interval > 0 &&
            (k % cfg.dump_interval == 0 || (k + 1) % cfg.dump_interval == 0);
        if (k == 0 || k + 1 == good.size() || k + 2 == good.size() || interval_hit)
            dump_state_fields(dir / "fields", good[k]);
    }

    std::ostringstream led;
    led << csv::ledger_header() << '\n';
    for (const auto& r : art.ledger.rows) led << csv::ledger_row(r) << '\n';
    write_text_file(dir / "ledger.csv", led.str());

    art.flags_pass = art.result.completed && art.ledger.all_flags_pass();
    std::ostringstream sum;
    sum << "key,value\n";
    sum << "completed," << (art.result.completed ? 1 : 0) << '\n';
    sum << "failed_step," << art.result.failed_step << '\n';
    sum << "all_flags_pass," << (art.flags_pass ? 1 : 0) << '\n';
    sum << "initial_energy," << csv::num(art.ledger.initial_energy) << '\n';
    if (!art.ledger.rows.empty()) {
        const auto& last = art.ledger.rows.back();
        sum << "final_energy," << csv::num(last.energy.kinetic_cur + last.energy.elastic_cur)
            << '\n';
        sum << "total_dissipation," << csv::num(last.sum_dissipation) << '\n';
        sum << "telescoped_margin," << csv::num(last.telescoped_margin) << '\n';
        double min_margin = std::numeric_limits<double>::infinity();
        double min_entropy = std::numeric_limits<double>::infinity();
        for (const auto& r : art.ledger.rows) {
            min_margin = std::min(min_margin, r.energy.margin);
            min_entropy = std::min(min_entropy, r.entropy_margin);
        }
        sum << "min_energy_margin," << csv::num(min_margin) << '\n';
        sum << "min_entropy_margin," << csv::num(min_entropy) << '\n';
        sum << "telescoped_entropy_margin," << csv::num(telescoped_entropy_margin(good, cfg.params))
            << '\n';
    }
    write_text_file(dir / "summary.csv", sum.str());
    return art;
}

/// Eps sweep: one step from the initial state re-solved at each eps
/// (sequential by construction: each point warm-starts from the previous).
inline EpsContinuation execute_sweep_eps(const ExperimentConfig& cfg, const fsys::path& dir) {
    fsys::create_directories(dir);
    {
        std::ofstream os(dir / "config.txt");
        write_config(os, cfg);
    }
    const State init = make_initial_state(cfg);
    const auto eps_seq = cfg.resolved_eps_sequence();
    const auto thresholds = cfg.resolved_thresholds();
    const auto cont = epsilon_continuation(init, cfg.params, eps_seq, thresholds);

    for (size_t k = 0; k < cont.states.size(); ++k) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "point_%03zu", k);
        const fsys::path pdir = dir / tag;
        fsys::create_directories(pdir);
        if (cont.trace[k].converged) dump_state_fields(pdir, cont.states[k]);
    }

    std::vector<double> xs, ys;
    for (const auto& t : cont.trace) {
        xs.push_back(t.eps);
        ys.push_back(t.eps * t.grad_rho_l2);
    }
    const double slope = csv::loglog_slope(xs, ys);

    std::ostringstream os;
    os << "index,eps,converged,grad_rho_l2,eps_grad_rho,sqrt_eps_grad_rho,p_l2,rho_max";
    for (size_t m = 0; m < thresholds.size(); ++m) os << ",superlevel_" << m;
    os << ",g_diff_prev,g_diff_ref,slope_eps_grad\n";
    for (size_t k = 0; k < cont.trace.size(); ++k) {
        const auto& t = cont.trace[k];
        os << k << ',' << csv::num(t.eps) << ',' << (t.converged ? 1 : 0) << ','
           << csv::num(t.grad_rho_l2) << ',' << csv::num(t.eps * t.grad_rho_l2) << ','
           << csv::num(std::sqrt(t.eps) * t.grad_rho_l2) << ',' << csv::num(t.p_l2) << ','
           << csv::num(t.rho_max);
        for (size_t m = 0; m < thresholds.size(); ++m)
            os << ',' << csv::num(m < t.superlevel.size() ? t.superlevel[m] : -1.0);
        os << ',' << csv::num(t.g_diff_prev) << ',' << csv::num(t.g_diff_ref) << ','
           << csv::num(slope) << '\n';
    }
    write_text_file(dir / "summary.csv", os.str());
    return cont;
}

struct DtSweepPoint {
    double dt = 0.0;
    int steps = 0;
    bool completed = false;
    DtDifferenceNorms norms;
    double rho_max = 0.0;
    double telescoped_margin = 0.0;   ///< telescoped energy margin over the run
    double initial_energy = 0.0;
    double dist_prev = -1.0;          ///< interpolant distance to the previous (coarser) run
    double linf_law_constant = 0.0;   ///< max rho / dt^(3/(1-gamma))
};

struct DtSweepArtifacts {
    std::vector<DtSweepPoint> points;
    bool all_completed = false;
};

/// Dt sweep at fixed final time; points are independent and may run in
/// parallel. Each point writes a complete run directory.
inline DtSweepArtifacts execute_sweep_dt(const ExperimentConfig& cfg, const fsys::path& dir) {
    fsys::create_directories(dir);
    {
        std::ofstream os(dir / "config.txt");
        write_config(os, cfg);
    }
    const double T = cfg.resolved_final_time();
    const size_t npts = cfg.dt_sequence.size();
    std::vector<RunArtifacts> arts(npts);
    std::vector<ExperimentConfig> cfgs(npts, cfg);
    for (size_t k = 0; k < npts; ++k) {
        cfgs[k].params.dt = cfg.dt_sequence[k];
        const double ratio = T / cfgs[k].params.dt;
        cfgs[k].steps = static_cast<int>(std::round(ratio));
        if (std::abs(ratio - cfgs[k].steps) > 1e-9)
            throw ConfigError("final_time is not an integer multiple of every dt in the sweep");
        cfgs[k].final_time = T;
    }

    // optional preparation: shed the stiff initial transient at the coarsest
    // dt so every point starts from the same smooth state
    State prepared;
    bool have_prepared = false;
    if (cfg.dt_warmup_steps > 0) {
        Params pw = cfg.params;
        pw.dt = *std::max_element(cfg.dt_sequence.begin(), cfg.dt_sequence.end());
        prepared = make_initial_state(cfg);
        for (int k = 0; k < cfg.dt_warmup_steps; ++k) {
            prepared = advance_step(prepared, pw);
            if (!prepared.report.converged)
                throw std::runtime_error("sweep-dt warmup step failed to converge");
        }
        prepared.step_index = 0;
        prepared.report = StepReport{};
        have_prepared = true;
    }

    auto run_point = [&](size_t k) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), "dt_%03zu", k);
        arts[k] = execute_run(cfgs[k], dir / tag, have_prepared ? &prepared : nullptr);
    };
    const int workers = std::min<int>(cfg.parallel, static_cast<int>(npts));
    if (workers > 1) {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (size_t k = next.fetch_add(1); k < npts; k = next.fetch_add(1)) run_point(k);
            });
        for (auto& t : pool) t.join();
    } else {
        for (size_t k = 0; k < npts; ++k) run_point(k);
    }

    DtSweepArtifacts out;
    out.all_completed = true;
    std::vector<TimeSeries> series;
    series.reserve(npts);
    for (size_t k = 0; k < npts; ++k) {
        DtSweepPoint pt;
        pt.dt = cfgs[k].params.dt;
        pt.steps = cfgs[k].steps;
        pt.completed = arts[k].result.completed;
        out.all_completed = out.all_completed && pt.completed;
        pt.initial_energy = arts[k].ledger.initial_energy;
        if (pt.completed) {
            TimeSeries ts(pt.dt, arts[k].result.states);
            pt.norms = dt_difference_norms(ts, cfgs[k].params);
            pt.rho_max = 0.0;
            for (const auto& s : arts[k].result.states)
                pt.rho_max = std::max(pt.rho_max,
                                      lp_norm(s.rho, std::numeric_limits<double>::infinity()));
            pt.telescoped_margin = arts[k].ledger.rows.back().telescoped_margin;
            pt.linf_law_constant =
                pt.rho_max / std::pow(pt.dt, 3.0 / (1.0 - cfgs[k].params.gamma));
            if (!series.empty())
                pt.dist_prev = interpolant_distance(series.back(), ts, cfgs[k].params);
            series.push_back(std::move(ts));
        }
        out.points.push_back(pt);
    }

    std::ostringstream os;
    os << "index,dt,steps,completed,q59,q63_pow,q63_norm,q64,q63_norm_ratio,rho_max,"
          "telescoped_margin,initial_energy,dist_prev,linf_law_constant\n";
    for (size_t k = 0; k < out.points.size(); ++k) {
        const auto& pt = out.points[k];
        const double ratio =
            (k > 0 && out.points[k - 1].norms.q63_norm > 0.0 && pt.completed)
                ? pt.norms.q63_norm / out.points[k - 1].norms.q63_norm
                : -1.0;
        os << k << ',' << csv::num(pt.dt) << ',' << pt.steps << ',' << (pt.completed ? 1 : 0)
           << ',' << csv::num(pt.norms.q59) << ',' << csv::num(pt.norms.q63_pow) << ','
           << csv::num(pt.norms.q63_norm) << ',' << csv::num(pt.norms.q64) << ','
           << csv::num(ratio) << ',' << csv::num(pt.rho_max) << ','
           << csv::num(pt.telescoped_margin) << ',' << csv::num(pt.initial_energy) << ','
           << csv::num(pt.dist_prev) << ',' << csv::num(pt.linf_law_constant) << '\n';
    }
    write_text_file(dir / "summary.csv", os.str());
    return out;
}

// ---------------------------------------------------------------------------
// Verify mode.
// ---------------------------------------------------------------------------

struct VerifyReport {
    int rows_checked = 0;
    int mismatches = 0;
    std::vector<std::string> details;
    bool ok() const { return rows_checked > 0 && mismatches == 0; }
};

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const fsys::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("missing file: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline int column_index(const std::vector<std::string>& header, const std::string& name) {
    for (size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<int>(k);
    throw std::runtime_error("column not found in ledger: " + name);
}

}  // namespace detail

/// Recomputes every diagnostics-derived ledger column from the dumped fields
/// and compares against ledger.csv. Values are compared as the exact decimal
/// strings both sides print, so agreement is bit-for-bit.
inline VerifyReport verify_run_dir(const fsys::path& dir) {
    VerifyReport rep;
    ExperimentConfig cfg;
    {
        std::ifstream is(dir / "config.txt");
        if (!is) throw std::runtime_error("missing config.txt in " + dir.string());
        cfg = parse_config(is, (dir / "config.txt").string());
        validate_config(cfg);
    }
    const auto csv_rows = detail::read_csv(dir / "ledger.csv");
    if (csv_rows.size() < 2) {
        rep.details.push_back("ledger.csv holds no step rows");
        return rep;
    }
    const auto& header = csv_rows.front();
    const int c_step = detail::column_index(header, "step");

    auto load_state = [&](int step) -> State {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "%06d", step);
        const fsys::path f = dir / "fields";
        const auto rho = scalar_from_dump(read_dump((f / (std::string("rho_") + tag + ".dat")).string()));
        const auto vel = vector_from_dumps(read_dump((f / (std::string("u_") + tag + ".dat")).string()),
                                           read_dump((f / (std::string("v_") + tag + ".dat")).string()));
        State s(rho, vel, step, cfg.params.eps);
        return s;
    };
    auto have_state = [&](int step) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "%06d", step);
        return fsys::exists(dir / "fields" / (std::string("rho_") + tag + ".dat"));
    };

    const LameOperator op(Grid(cfg.params.nx, cfg.params.ny, cfg.params.domain_lx,
                               cfg.params.domain_ly),
                          cfg.params);
    if (!have_state(0)) {
        rep.details.push_back("initial state dump missing; cannot verify");
        return rep;
    }
    const State initial = load_state(0);
    const double e0 = kinetic_energy(initial.rho, initial.v) + elastic_energy(initial.rho, cfg.params);
    const double mass0 = integrate(initial.rho);
    const double entropy_scale = lp_norm(initial.rho, std::numeric_limits<double>::infinity()) *
                                 initial.rho.grid.lx() * initial.rho.grid.ly() / cfg.params.dt;

    for (size_t r = 1; r < csv_rows.size(); ++r) {
        const auto& row = csv_rows[r];
        const int step = std::stoi(row[c_step]);
        if (!have_state(step) || !have_state(step - 1)) continue;
        const State prev = load_state(step - 1);
        const State cur = load_state(step);
        const EnergyBreakdown e =
            energy_inequality_check(prev.rho, prev.v, cur.rho, cur.v, op, cfg.params);
        const double entropy = entropy_functional(cur.rho);
        const double entropy_margin = entropy_step_check(prev.rho, cur.rho, cur.v, cfg.params);
        const double mass = integrate(cur.rho);
        const double mass_gap = mass - integrate(prev.rho);
        const double rho_min = *std::min_element(cur.rho.v.begin(), cur.rho.v.end());
        const double rho_max = *std::max_element(cur.rho.v.begin(), cur.rho.v.end());
        bool flag_mass = mass_gap <= 1e-8;
        if (rho_max < cfg.params.m1)
            flag_mass = flag_mass && std::abs(mass_gap) <= 1e-8 * std::max(mass0, 1e-300);
        const bool flag_positivity = rho_min >= -1e-12 * cfg.params.m2;
        const bool flag_upper = rho_max <= cfg.params.m2 + 1e-8;
        const bool flag_energy = e.margin >= -1e-6 * std::max(e0, 1e-300);
        const bool flag_entropy = entropy_margin >= -1e-6 * std::max(entropy_scale, 1e-300);

        auto expect = [&](const std::string& col, const std::string& value) {
            const int idx = detail::column_index(header, col);
            if (row[idx] != value) {
                rep.mismatches++;
                rep.details.push_back("step " + std::to_string(step) + " column " + col +
                                      ": ledger=" + row[idx] + " recomputed=" + value);
            }
        };
        expect("kinetic", csv::num(e.kinetic_cur));
        expect("elastic", csv::num(e.elastic_cur));
        expect("entropy", csv::num(entropy));
        expect("dissipation_visc", csv::num(e.dissipation_visc));
        expect("dissipation_div", csv::num(e.dissipation_div));
        expect("friction", csv::num(e.friction));
        expect("velocity_diff", csv::num(e.velocity_diff));
        expect("remainder", csv::num(e.remainder));
        expect("eps_dissipation", csv::num(e.eps_dissipation));
        expect("cutoff_slack", csv::num(e.cutoff_slack));
        expect("upwind_slack", csv::num(e.upwind_slack));
        expect("pressure_slack", csv::num(e.pressure_slack));
        expect("energy_margin", csv::num(e.margin));
        expect("entropy_margin", csv::num(entropy_margin));
        expect("mass", csv::num(mass));
        expect("mass_gap", csv::num(mass_gap));
        expect("rho_min", csv::num(rho_min));
        expect("rho_max", csv::num(rho_max));
        expect("flag_mass", flag_mass ? "1" : "0");
        expect("flag_positivity", flag_positivity ? "1" : "0");
        expect("flag_upper_bound", flag_upper ? "1" : "0");
        expect("flag_energy", flag_energy ? "1" : "0");
        expect("flag_entropy", flag_entropy ? "1" : "0");
        rep.rows_checked++;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Plot data.
// ---------------------------------------------------------------------------

/// Emits two-column text files for whatever the run directory contains.
/// Returns the list of files written; throws when none of the expected inputs
/// are present.
inline std::vector<std::string> emit_plot_data(const fsys::path& dir) {
    std::vector<std::string> written;
    std::vector<std::string> missing;

    const fsys::path ledger = dir / "ledger.csv";
    if (fsys::exists(ledger)) {
        const auto rows = detail::read_csv(ledger);
        const auto& header = rows.front();
        const int c_time = detail::column_index(header, "time");
        const int c_kin = detail::column_index(header, "kinetic");
        const int c_ela = detail::column_index(header, "elastic");
        std::ostringstream os;
        os << "# time  energy(kinetic+elastic)\n";
        for (size_t r = 1; r < rows.size(); ++r)
            os << rows[r][c_time] << "  "
               << csv::num(std::stod(rows[r][c_kin]) + std::stod(rows[r][c_ela])) << "\n";
        write_text_file(dir / "energy_vs_time.dat", os.str());
        written.push_back("energy_vs_time.dat");
    } else {
        missing.push_back("ledger.csv");
    }

    const fsys::path summary = dir / "summary.csv";
    if (fsys::exists(summary)) {
        const auto rows = detail::read_csv(summary);
        const auto& header = rows.front();
        auto maybe = [&](const std::string& name) {
            for (size_t k = 0; k < header.size(); ++k)
                if (header[k] == name) return static_cast<int>(k);
            return -1;
        };
        const int c_eps = maybe("eps");
        if (c_eps >= 0) {
            const int c_grad = maybe("eps_grad_rho");
            const int c_sup = maybe("superlevel_0");
            std::vector<double> xs, ys, sup;
            for (size_t r = 1; r < rows.size(); ++r) {
                xs.push_back(std::stod(rows[r][c_eps]));
                ys.push_back(std::stod(rows[r][c_grad]));
                if (c_sup >= 0) sup.push_back(std::stod(rows[r][c_sup]));
            }
            {
                std::ostringstream os;
                os << "# eps  eps*||grad rho||_2   (log-log)\n";
                for (size_t k = 0; k < xs.size(); ++k)
                    os << csv::num(xs[k]) << "  " << csv::num(ys[k]) << "\n";
                os << "# fitted_slope = " << csv::num(csv::loglog_slope(xs, ys)) << "\n";
                write_text_file(dir / "eps_grad_vs_eps.dat", os.str());
                written.push_back("eps_grad_vs_eps.dat");
            }
            if (c_sup >= 0) {
                std::ostringstream os;
                os << "# eps  superlevel_measure(threshold 0)   (log-log)\n";
                for (size_t k = 0; k < xs.size(); ++k)
                    os << csv::num(xs[k]) << "  " << csv::num(sup[k]) << "\n";
                os << "# fitted_slope = " << csv::num(csv::loglog_slope(xs, sup)) << "\n";
                write_text_file(dir / "superlevel_vs_eps.dat", os.str());
                written.push_back("superlevel_vs_eps.dat");
            }
        }
        const int c_dt = maybe("dt");
        if (c_dt >= 0) {
            const int c_q63 = maybe("q63_norm");
            std::vector<double> xs, ys;
            for (size_t r = 1; r < rows.size(); ++r) {
                xs.push_back(std::stod(rows[r][c_dt]));
                ys.push_back(std::stod(rows[r][c_q63]));
            }
            std::ostringstream os;
            os << "# dt  ||rho_hat - rho_hat(.-dt)||_LgLg   (log-log)\n";
            for (size_t k = 0; k < xs.size(); ++k)
                os << csv::num(xs[k]) << "  " << csv::num(ys[k]) << "\n";
            os << "# fitted_slope = " << csv::num(csv::loglog_slope(xs, ys)) << "\n";
            write_text_file(dir / "q63_vs_dt.dat", os.str());
            written.push_back("q63_vs_dt.dat");
        }
    } else {
        missing.push_back("summary.csv");
    }

    if (written.empty()) {
        std::string msg = "no plottable inputs in " + dir.string() + "; expected:";
        for (const auto& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }
    return written;
}

/// Dispatch on cfg.mode. Returns a process exit status: 0 when every enforced
/// invariant held, 1 on invariant failure, 2 on solver failure.
inline int run_experiment(const ExperimentConfig& cfg) {
    const fsys::path dir = cfg.out_dir;
    if (cfg.mode == "run") {
        const RunArtifacts art = execute_run(cfg, dir);
        if (!art.result.completed) return 2;
        return art.flags_pass ? 0 : 1;
    }
    if (cfg.mode == "sweep-eps") {
        const auto cont = execute_sweep_eps(cfg, dir);
        return cont.all_converged ? 0 : 2;
    }
    if (cfg.mode == "sweep-dt") {
        const auto sweep = execute_sweep_dt(cfg, dir);
        if (!sweep.all_completed) return 2;
        return 0;
    }
    if (cfg.mode == "verify") {
        const VerifyReport rep = verify_run_dir(dir);
        return rep.ok() ? 0 : 1;
    }
    throw ConfigError("unknown mode '" + cfg.mode + "'");
}

}  // namespace rothe
