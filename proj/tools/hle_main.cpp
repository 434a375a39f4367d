#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "hle/errors.hpp"
#include "hle/log.hpp"
#include "hle/runner.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInadmissible = 2;
constexpr int kExitSolver = 3;
constexpr int kExitChecksFailed = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "random seed (overrides the config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

void apply_overrides(hle::RunConfig& config, const CommonArgs& args) {
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.seed_set) config.seed = args.seed;
}

int run_solve_cmd(const CommonArgs& args) {
    hle::RunConfig config = hle::RunConfig::load(args.config_path);
    apply_overrides(config, args);
    const hle::ResultRecord record = hle::run_solve(config);
    hle::write_result_files(config, record);
    std::printf("solved: %s, %d eigenvalue(s), mu_1 = %.12g\n",
                record.solver_used.c_str(),
                static_cast<int>(record.eigenvalues.size()), record.eigenvalues(0));
    return 0;
}

int run_verify_cmd(const CommonArgs& args, bool override_guard) {
    hle::VerifyConfig config = hle::VerifyConfig::load(args.config_path);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.seed_set) config.seed = args.seed;
    config.override_threshold_guard = override_guard;
    if (config.used_default_checks && override_guard)
        config.checks.push_back(hle::VerifyConfig::rellich_default_check());

    const hle::VerifyManifest manifest = hle::run_verify(config);
    hle::write_verify_files(config, manifest);
    for (size_t i = 0; i < manifest.reports.size(); ++i)
        std::printf("[%s] %s (margin %.3g)\n",
                    manifest.reports[i].pass ? "PASS" : "FAIL",
                    manifest.reports[i].name.c_str(), manifest.reports[i].margin);
    return manifest.all_pass ? 0 : kExitChecksFailed;
}

int run_sweep_cmd(const CommonArgs& args, int workers) {
    hle::SweepConfig config = hle::SweepConfig::load(args.config_path);
    apply_overrides(config.base, args);
    config.workers = workers;
    const auto rows = hle::run_sweep(config);
    hle::write_sweep_files(config, rows);
    int ok = 0, rejected = 0, failed = 0;
    for (const auto& row : rows) {
        if (row.status == "ok") ++ok;
        else if (row.status == "rejected") ++rejected;
        else ++failed;
    }
    std::printf("sweep: %zu points (%d ok, %d rejected, %d failed)\n", rows.size(),
                ok, rejected, failed);
    return 0;
}

int run_converge_cmd(const CommonArgs& args) {
    hle::ConvergenceConfig config = hle::ConvergenceConfig::load(args.config_path);
    apply_overrides(config.base, args);
    const auto table = hle::run_convergence(config.base, config.cells_list);
    hle::write_convergence_files(config.base, table);
    std::printf("convergence: observed order %.4f, extrapolated mu_1 = %.12g\n",
                table.observed_order, table.extrapolated);
    return 0;
}

int run_dump_grid_cmd(const CommonArgs& args) {
    hle::RunConfig config = hle::RunConfig::load(args.config_path);
    apply_overrides(config, args);
    hle::dump_grid_file(config);
    std::printf("grid dumped to %s/grid.json\n", config.output_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted Navier eigensolver for Henon-Lane-Emden systems"};
    app.require_subcommand(1);

    CommonArgs solve_args, verify_args, sweep_args, converge_args, dump_args;
    bool override_guard = false;
    int workers = 1;

    auto* solve = app.add_subcommand("solve", "compute the spectrum for one configuration");
    attach_common(solve, solve_args);

    auto* verify = app.add_subcommand("verify", "run the property-certificate suite");
    attach_common(verify, verify_args);
    verify->add_flag("--override-threshold-guard", override_guard,
                     "allow the admissibility-threshold equality case (Rellich check)");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep over a, b or p");
    attach_common(sweep, sweep_args);
    sweep->add_option("--workers", workers, "worker threads for sweep points")
        ->check(CLI::PositiveNumber);

    auto* converge = app.add_subcommand("converge", "grid convergence study");
    attach_common(converge, converge_args);

    auto* dump = app.add_subcommand("dump-grid", "write grid and operator diagnostics");
    attach_common(dump, dump_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (solve->parsed()) return run_solve_cmd(solve_args);
        if (verify->parsed()) return run_verify_cmd(verify_args, override_guard);
        if (sweep->parsed()) return run_sweep_cmd(sweep_args, workers);
        if (converge->parsed()) return run_converge_cmd(converge_args);
        if (dump->parsed()) return run_dump_grid_cmd(dump_args);
    } catch (const hle::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const hle::InadmissibleError& e) {
        std::fprintf(stderr, "inadmissible parameters: %s\n", e.what());
        return kExitInadmissible;
    } catch (const hle::SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
