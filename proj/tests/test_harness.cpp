/// Harness tests: config parsing and validation, preset construction, run
/// artifacts, byte-level determinism, verify round trips, and plot data.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rothe/config.hpp"
#include "rothe/experiment.hpp"

using namespace rothe;
namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& extra = "") {
    return "# test configuration\n"
           "preset = gaussian-bump\n"
           "nx = 16\n"
           "ny = 16\n"
           "dt = 0.01\n"
           "steps = 3\n"
           "rho0 = 0.1\n"
           "bump_amp = 0.05\n" +
           extra;
}

ExperimentConfig from_string(const std::string& body) {
    std::istringstream is(body);
    ExperimentConfig cfg = parse_config(is);
    validate_config(cfg);
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal config parses with defaults filled") {
    const ExperimentConfig cfg = from_string(small_config());
    CHECK(cfg.params.nx == 16);
    CHECK(cfg.params.gamma == 3.0);
    CHECK(cfg.params.m1 == 3.0);  // m2 default 4, m1 derived
    CHECK(cfg.params.eps == doctest::Approx(cfg.params.hx() * cfg.params.hy()));
    CHECK(cfg.steps == 3);
    CHECK(cfg.resolved_eps_sequence().size() == 5);
    CHECK(cfg.resolved_thresholds().size() == 3);
}

TEST_CASE("validation errors name the offending fields, all at once") {
    std::istringstream is(small_config("gamma = 1.5\nm1 = 2.0\n"));
    ExperimentConfig cfg = parse_config(is);
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gamma") != std::string::npos);
        CHECK(msg.find("m2 - m1") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line information; unknown keys are rejected") {
    std::istringstream bad("nx = 16\nthis line has no equals\n");
    CHECK_THROWS_WITH_AS(parse_config(bad, "cfg"), doctest::Contains("cfg:2"), ConfigError);

    std::istringstream unknown("nx = 16\nnosuchkey = 3\n");
    CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("nosuchkey"), ConfigError);

    CHECK_THROWS_AS(load_config("/nonexistent/rothe.cfg"), ConfigError);
}

TEST_CASE("presets are admissible and respect the density ceiling") {
    for (const char* preset :
         {"equilibrium", "gaussian-bump", "shear-slip", "compressive-pulse"}) {
        const ExperimentConfig cfg = from_string(small_config("preset = " + std::string(preset) + "\n"));
        const State s = make_initial_state(cfg);
        CHECK(s.v.is_admissible());
        double mx = 0.0;
        for (double x : s.rho.v) mx = std::max(mx, x);
        CHECK(mx < cfg.params.m1);
        if (std::string(preset) == "shear-slip") CHECK(l2_norm(s.v) > 0.0);
        if (std::string(preset) == "compressive-pulse") {
            // genuinely compressive somewhere
            const ScalarField d = divergence(s.v);
            double dmin = 0.0;
            for (double x : d.v) dmin = std::min(dmin, x);
            CHECK(dmin < -1e-3);
        }
    }
}

TEST_CASE("config writes back in a round-trippable form") {
    const ExperimentConfig cfg = from_string(small_config());
    std::ostringstream os;
    write_config(os, cfg);
    std::istringstream is(os.str());
    const ExperimentConfig cfg2 = parse_config(is);
    CHECK(cfg2.params.dt == cfg.params.dt);
    CHECK(cfg2.params.eps == cfg.params.eps);
    CHECK(cfg2.preset == cfg.preset);
    CHECK(cfg2.resolved_eps_sequence() == cfg.resolved_eps_sequence());
}

TEST_CASE("run mode writes artifacts, equilibrium ledger is flat, exit 0") {
    TempDir tmp("rothe_run_test");
    ExperimentConfig cfg = from_string(small_config("preset = equilibrium\nrho0 = 0.5\n"));
    cfg.out_dir = (tmp.path / "eq").string();
    cfg.mode = "run";
    CHECK(run_experiment(cfg) == 0);
    CHECK(fs::exists(tmp.path / "eq" / "ledger.csv"));
    CHECK(fs::exists(tmp.path / "eq" / "summary.csv"));
    CHECK(fs::exists(tmp.path / "eq" / "config.txt"));
    CHECK(fs::exists(tmp.path / "eq" / "fields" / "rho_000000.dat"));
    CHECK(fs::exists(tmp.path / "eq" / "fields" / "rho_000003.dat"));

    // constant energy column on the equilibrium run
    const auto rows = rothe::detail::read_csv(tmp.path / "eq" / "ledger.csv");
    REQUIRE(rows.size() == 4);  // header + 3 steps
    const int c_kin = rothe::detail::column_index(rows[0], "kinetic");
    const int c_diss = rothe::detail::column_index(rows[0], "dissipation_visc");
    for (size_t r = 2; r < rows.size(); ++r) {
        CHECK(rows[r][c_kin] == rows[1][c_kin]);
        CHECK(std::stod(rows[r][c_diss]) == 0.0);
    }
}

TEST_CASE("determinism: identical config and seed give byte-identical CSV bodies") {
    TempDir tmp("rothe_dtm_test");
    ExperimentConfig cfg = from_string(small_config("preset = shear-slip\nv_amp = 0.05\n"));
    cfg.mode = "run";
    cfg.out_dir = (tmp.path / "a").string();
    REQUIRE(run_experiment(cfg) == 0);
    cfg.out_dir = (tmp.path / "b").string();
    REQUIRE(run_experiment(cfg) == 0);
    CHECK(read_file(tmp.path / "a" / "ledger.csv") == read_file(tmp.path / "b" / "ledger.csv"));
    CHECK(read_file(tmp.path / "a" / "summary.csv") == read_file(tmp.path / "b" / "summary.csv"));
}

TEST_CASE("verify mode reproduces the recorded ledger bit-for-bit") {
    TempDir tmp("rothe_verify_test");
    ExperimentConfig cfg = from_string(small_config("preset = gaussian-bump\n"));
    cfg.mode = "run";
    cfg.out_dir = (tmp.path / "r").string();
    REQUIRE(run_experiment(cfg) == 0);

    const VerifyReport rep = verify_run_dir(tmp.path / "r");
    CHECK(rep.rows_checked == 3);
    CHECK(rep.mismatches == 0);
    CHECK(rep.ok());

    // corrupting a dumped field must surface as a mismatch
    const fs::path f = tmp.path / "r" / "fields" / "rho_000002.dat";
    auto dumped = read_dump(f.string());
    dumped.values[5] += 1e-3;
    ScalarField tampered = scalar_from_dump(dumped);
    dump_scalar(f.string(), tampered, "rho");
    const VerifyReport bad = verify_run_dir(tmp.path / "r");
    CHECK(bad.mismatches > 0);
}

TEST_CASE("verify works with sparse field dumps") {
    TempDir tmp("rothe_sparse_dump_test");
    ExperimentConfig cfg = from_string(small_config("steps = 6\ndump_interval = 3\n"));
    cfg.mode = "run";
    cfg.out_dir = (tmp.path / "r").string();
    REQUIRE(run_experiment(cfg) == 0);
    // interval hits at steps 3 and 6, each with its predecessor dumped
    CHECK(fs::exists(tmp.path / "r" / "fields" / "rho_000002.dat"));
    CHECK(fs::exists(tmp.path / "r" / "fields" / "rho_000003.dat"));
    CHECK_FALSE(fs::exists(tmp.path / "r" / "fields" / "rho_000004.dat"));
    const VerifyReport rep = verify_run_dir(tmp.path / "r");
    CHECK(rep.rows_checked == 2);  // the dumped pairs (2,3) and (5,6)
    CHECK(rep.ok());

    // dumps off: only the first state and the final pair, still verifiable
    ExperimentConfig cfg2 = from_string(small_config("steps = 4\ndump_interval = 0\n"));
    cfg2.mode = "run";
    cfg2.out_dir = (tmp.path / "r2").string();
    REQUIRE(run_experiment(cfg2) == 0);
    const VerifyReport rep2 = verify_run_dir(tmp.path / "r2");
    CHECK(rep2.rows_checked == 1);
    CHECK(rep2.ok());
}

TEST_CASE("sweep-eps writes per-point directories and a trace summary") {
    TempDir tmp("rothe_eps_test");
    ExperimentConfig cfg = from_string(small_config("preset = compressive-pulse\nsteps = 1\n"));
    cfg.mode = "sweep-eps";
    cfg.eps_sequence = {1e-3, 5e-4, 2.5e-4};
    cfg.out_dir = (tmp.path / "s").string();
    CHECK(run_experiment(cfg) == 0);
    CHECK(fs::exists(tmp.path / "s" / "summary.csv"));
    CHECK(fs::exists(tmp.path / "s" / "point_000" / "rho_000001.dat"));
    const auto rows = rothe::detail::read_csv(tmp.path / "s" / "summary.csv");
    CHECK(rows.size() == 4);
    const int c_eps = rothe::detail::column_index(rows[0], "eps");
    CHECK(std::stod(rows[1][c_eps]) == 1e-3);
}

TEST_CASE("sweep-dt runs points (optionally in parallel) and summarizes") {
    TempDir tmp("rothe_dt_test");
    ExperimentConfig cfg = from_string(small_config("preset = shear-slip\nv_amp = 0.05\n"));
    cfg.mode = "sweep-dt";
    cfg.dt_sequence = {0.02, 0.01};
    cfg.final_time = 0.04;
    cfg.parallel = 2;
    cfg.out_dir = (tmp.path / "d").string();
    CHECK(run_experiment(cfg) == 0);
    CHECK(fs::exists(tmp.path / "d" / "dt_000" / "ledger.csv"));
    CHECK(fs::exists(tmp.path / "d" / "dt_001" / "ledger.csv"));
    const auto rows = rothe::detail::read_csv(tmp.path / "d" / "summary.csv");
    REQUIRE(rows.size() == 3);
    const int c_ratio = rothe::detail::column_index(rows[0], "q63_norm_ratio");
    CHECK(std::stod(rows[2][c_ratio]) > 0.0);
}

TEST_CASE("plot data: equilibrium energy file is constant; missing inputs error") {
    TempDir tmp("rothe_plot_test");
    ExperimentConfig cfg = from_string(small_config("preset = equilibrium\nrho0 = 0.4\n"));
    cfg.mode = "run";
    cfg.out_dir = (tmp.path / "p").string();
    REQUIRE(run_experiment(cfg) == 0);
    const auto files = emit_plot_data(tmp.path / "p");
    CHECK(files.size() >= 1);
    const std::string body = read_file(tmp.path / "p" / "energy_vs_time.dat");
    std::istringstream is(body);
    std::string line;
    std::getline(is, line);  // comment
    std::string first_energy;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string t, e;
        ls >> t >> e;
        if (first_energy.empty()) first_energy = e;
        CHECK(e == first_energy);
    }

    fs::create_directories(tmp.path / "empty");
    CHECK_THROWS_AS(emit_plot_data(tmp.path / "empty"), std::runtime_error);
}
