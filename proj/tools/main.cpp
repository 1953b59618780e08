/// Command-line driver: run <config>, sweep-eps <config>, sweep-dt <config>,
/// verify <run-dir>, plot-data <run-dir>.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "rothe/config.hpp"
#include "rothe/experiment.hpp"

namespace {

struct CommonFlags {
    std::string out;
    int parallel = 0;
    unsigned long long seed = 0;
    bool seed_set = false;
};

void apply_flags(rothe::ExperimentConfig& cfg, const CommonFlags& flags) {
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    if (flags.parallel > 0) cfg.parallel = flags.parallel;
    if (flags.seed_set) cfg.seed = flags.seed;
}

int run_mode(const std::string& config_path, const std::string& mode, const CommonFlags& flags) {
    rothe::ExperimentConfig cfg = rothe::load_config(config_path);
    cfg.mode = mode;
    apply_flags(cfg, flags);
    rothe::validate_config(cfg);
    const int status = rothe::run_experiment(cfg);
    if (status == 0)
        std::cout << mode << " finished: all enforced invariants held (" << cfg.out_dir << ")\n";
    else if (status == 1)
        std::cout << mode << " finished with invariant failures (" << cfg.out_dir << ")\n";
    else
        std::cout << mode << " aborted on a solver failure (" << cfg.out_dir << ")\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D compressible barotropic flow solver with slip walls and a verification harness"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string config_path, dir_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", flags.out, "output directory (overrides the config)");
        sub->add_option("--parallel", flags.parallel, "concurrent sweep points");
        sub->add_option("--seed", flags.seed, "seed for test-function families")
            ->each([&](const std::string&) { flags.seed_set = true; });
    };

    CLI::App* cmd_run = app.add_subcommand("run", "single time-stepping run");
    cmd_run->add_option("config", config_path, "configuration file")->required();
    add_common(cmd_run);

    CLI::App* cmd_eps = app.add_subcommand("sweep-eps", "regularization sweep on one step");
    cmd_eps->add_option("config", config_path, "configuration file")->required();
    add_common(cmd_eps);

    CLI::App* cmd_dt = app.add_subcommand("sweep-dt", "time-step refinement sweep at fixed final time");
    cmd_dt->add_option("config", config_path, "configuration file")->required();
    add_common(cmd_dt);

    CLI::App* cmd_verify = app.add_subcommand("verify", "recompute ledger checks from dumped fields");
    cmd_verify->add_option("run-dir", dir_path, "completed run directory")->required();

    CLI::App* cmd_plot = app.add_subcommand("plot-data", "emit two-column plot files");
    cmd_plot->add_option("run-dir", dir_path, "completed run or sweep directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) return run_mode(config_path, "run", flags);
        if (cmd_eps->parsed()) return run_mode(config_path, "sweep-eps", flags);
        if (cmd_dt->parsed()) return run_mode(config_path, "sweep-dt", flags);
        if (cmd_verify->parsed()) {
            const rothe::VerifyReport rep = rothe::verify_run_dir(dir_path);
            std::cout << "verify: " << rep.rows_checked << " rows checked, " << rep.mismatches
                      << " mismatches\n";
            for (const auto& d : rep.details) std::cout << "  " << d << "\n";
            return rep.ok() ? 0 : 1;
        }
        if (cmd_plot->parsed()) {
            const auto files = rothe::emit_plot_data(dir_path);
            for (const auto& f : files) std::cout << "wrote " << f << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
