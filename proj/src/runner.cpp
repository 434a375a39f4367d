#include "hle/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hle/errors.hpp"
#include "hle/log.hpp"
#include "hle/spectrum.hpp"

namespace hle {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary); // fixed newline policy across platforms
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Discretization {
    Grid grid;
    DiscreteOperator op;
    PoissonSolver solver;
    Discretization(const ProblemSpec& spec, int cells)
        : grid(build_grid(spec.domain, spec.n, cells)),
          op(assemble_laplacian(grid)),
          solver(op, grid) {}
};

bool use_linear(const RunConfig& config) {
    switch (config.solver.mode) {
        case SolverMode::linear:
            if (config.problem.p != 2.0)
                throw ConfigError("linear solver requires p = 2");
            return true;
        case SolverMode::nonlinear: return false;
        case SolverMode::automatic: return config.problem.p == 2.0;
    }
    return false;
}

nlohmann::ordered_json admissibility_json(const AdmissibilityReport& report) {
    nlohmann::ordered_json conditions = nlohmann::ordered_json::array();
    for (const auto& c : report.conditions)
        conditions.push_back({{"condition", c.name},
                              {"margin", c.margin},
                              {"pass", c.pass},
                              {"implied", c.implied}});
    return {{"admissible", report.admissible},
            {"low_dimension_automatic", report.low_dimension_automatic},
            {"conditions", conditions}};
}

} // namespace

ResultRecord run_solve(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    const AdmissibilityReport report = validate(config.problem);
    if (!report.admissible)
        throw InadmissibleError("inadmissible problem: " + report.summary());

    Discretization d(config.problem, config.cells);
    const bool linear = use_linear(config);

    ResultRecord record;
    record.radial_class = d.grid.radial_class();

    if (linear) {
        record.solver_used = "linear";
        const auto pencil = assemble_pencil(config.problem, d.grid, d.op);
        SpectrumOptions opts;
        opts.dense_threshold = config.solver.dense_threshold;
        opts.seed = static_cast<unsigned>(config.seed ^ 0x9e3779b9u);
        const auto spectrum = compute_spectrum(pencil, d.grid, d.solver,
                                               config.solver.eigenvalue_count, opts);
        record.eigenvalues = spectrum.eigenvalues;
        record.eigenvectors = spectrum.eigenvectors;
        record.partners = spectrum.partners;
        record.gap = spectrum.gap;
    } else {
        record.solver_used = "nonlinear";
        IterationOptions opts;
        opts.tol = config.solver.tol;
        opts.max_iter = config.solver.max_iterations;
        opts.dense_threshold = config.solver.dense_threshold;
        const auto pair = inverse_iteration(config.problem, d.grid, d.op, d.solver,
                                            std::nullopt, opts);
        record.eigenvalues = Eigen::VectorXd::Constant(1, pair.mu);
        record.eigenvectors = pair.u;
        record.partners = pair.v;
        record.trace = pair.trace;
    }

    nlohmann::ordered_json doc;
    doc["artifact_version"] = "0.1.0";
    doc["config_hash"] = config.hash();
    doc["config"] = config.to_json();
    doc["grid"] = {{"kind", domain_to_json(config.problem.domain)["kind"]},
                   {"n", config.problem.n},
                   {"cells", config.cells},
                   {"node_count", d.grid.node_count()},
                   {"radial_class", record.radial_class}};
    doc["admissibility"] = admissibility_json(report);
    doc["solver_used"] = record.solver_used;

    nlohmann::ordered_json eigen_rows = nlohmann::ordered_json::array();
    for (int k = 0; k < record.eigenvalues.size(); ++k) {
        const double mu = record.eigenvalues(k);
        nlohmann::ordered_json splits = nlohmann::ordered_json::array();
        for (double ratio : config.split_ratios) {
            const auto split = split_eigenvalue(mu, config.problem.p, ratio);
            splits.push_back({{"ratio", ratio},
                              {"lambda1", split.lambda1},
                              {"lambda2", split.lambda2}});
        }
        const Eigen::VectorXd u = record.eigenvectors.col(k);
        const Eigen::VectorXd au = d.op.matrix * u;
        eigen_rows.push_back({{"k", k + 1},
                              {"mu", mu},
                              {"cells", config.cells},
                              {"splittings", splits},
                              {"min_u", u.minCoeff()},
                              {"min_neg_laplacian", au.minCoeff()}});
    }
    doc["eigenvalues"] = eigen_rows;
    if (record.eigenvalues.size() >= 2) doc["gap"] = record.gap;
    if (!linear) {
        doc["iteration"] = {{"iterations", record.trace.iterations()},
                            {"converged", record.trace.converged},
                            {"final_increment",
                             record.trace.steps.empty()
                                 ? 0.0
                                 : record.trace.steps.back().increment},
                            {"final_mu_estimate",
                             record.trace.steps.empty()
                                 ? 0.0
                                 : record.trace.steps.back().mu_estimate}};
        if (config.solver.multistart > 0) {
            IterationOptions opts;
            opts.tol = config.solver.tol;
            opts.max_iter = config.solver.max_iterations;
            const auto spread = multistart_spread(
                config.problem, d.grid, d.op, d.solver, config.solver.multistart,
                static_cast<unsigned>(config.seed), opts);
            doc["multistart"] = {{"starts", config.solver.multistart},
                                 {"values", spread.values},
                                 {"spread_rel", spread.spread_rel}};
        }
    }
    nlohmann::ordered_json notes = nlohmann::ordered_json::array();
    if (record.radial_class)
        notes.push_back("ball spectra cover the radial symmetry class only");
    doc["notes"] = notes;
    record.document = std::move(doc);

    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    log::info("solve finished in %.3f s (solver=%s, cells=%d)", elapsed.count(),
              record.solver_used.c_str(), config.cells);
    return record;
}

void write_result_files(const RunConfig& config, const ResultRecord& record) {
    ensure_dir(config.output_dir);
    const fs::path dir(config.output_dir);

    auto json_out = open_out(dir / "result.json");
    json_out << record.document.dump(2) << "\n";

    auto csv = open_out(dir / "eigenvalues.csv");
    csv << "config_hash,k,cells,mu,lambda1,lambda2\n";
    const std::string hash = config.hash();
    for (int k = 0; k < record.eigenvalues.size(); ++k) {
        const auto split =
            split_eigenvalue(record.eigenvalues(k), config.problem.p, 1.0);
        csv << hash << "," << k + 1 << "," << config.cells << ","
            << fmt(record.eigenvalues(k)) << "," << fmt(split.lambda1) << ","
            << fmt(split.lambda2) << "\n";
    }

    if (record.solver_used == "nonlinear") {
        auto trace = open_out(dir / "trace.csv");
        trace << "config_hash,iteration,rayleigh_q,mu_estimate,increment\n";
        int i = 1;
        for (const auto& step : record.trace.steps)
            trace << hash << "," << i++ << "," << fmt(step.rayleigh_q) << ","
                  << fmt(step.mu_estimate) << "," << fmt(step.increment) << "\n";
    }
}

namespace {

PropertyReport dispatch_check(const VerifyCheckConfig& check, std::uint64_t seed,
                              bool override_guard) {
    const auto& p = check.params;
    if (check.name == "symmetry") {
        return check_symmetry(p.at("n").get<int>(), p.at("a").get<double>(),
                              p.at("b").get<double>(), p.at("p").get<double>(),
                              domain_from_json(p.at("domain")), p.at("cells").get<int>(),
                              p.value("tol", 2e-2));
    }
    if (check.name == "positivity") {
        ProblemSpec spec;
        spec.n = p.at("n").get<int>();
        spec.p = p.at("p").get<double>();
        spec.a = p.at("a").get<double>();
        spec.b = p.at("b").get<double>();
        spec.domain = domain_from_json(p.at("domain"));
        RunConfig cfg;
        cfg.problem = spec;
        cfg.cells = p.at("cells").get<int>();
        cfg.solver.eigenvalue_count = 1;
        const auto record = run_solve(cfg);
        const Grid grid = build_grid(spec.domain, spec.n, cfg.cells);
        const DiscreteOperator op = assemble_laplacian(grid);
        auto report = check_positivity(record.eigenvalues.size() > 0
                                           ? Eigen::VectorXd(record.eigenvectors.col(0))
                                           : Eigen::VectorXd(),
                                       op);
        report.parameters["cells"] = cfg.cells;
        report.parameters["problem"] = {{"n", spec.n}, {"p", spec.p}, {"a", spec.a},
                                        {"b", spec.b}};
        return report;
    }
    if (check.name == "scaling_slope") {
        std::vector<int> ks = p.at("k_list").get<std::vector<int>>();
        return scaling_slope(p.at("n").get<int>(), p.at("s").get<double>(),
                             p.at("b").get<double>(), p.at("p").get<double>(),
                             p.at("cells").get<int>(), ks, p.value("slope_tol", 0.05),
                             p.value("r2_min", 0.99));
    }
    if (check.name == "low_dim_inequality") {
        return check_low_dimension_inequality(
            p.at("n").get<int>(), p.at("a").get<double>(), p.at("p").get<double>(),
            p.at("samples").get<int>(), p.at("cells").get<int>(),
            static_cast<unsigned>(seed ^ 0xabcdefu));
    }
    if (check.name == "rellich") {
        if (!override_guard)
            throw ConfigError(
                "rellich check runs at the admissibility threshold equality; pass "
                "--override-threshold-guard to acknowledge");
        return estimate_rellich_constant(p.at("s").get<double>(), p.at("p").get<double>(),
                                         p.at("n").get<int>(), p.at("cells").get<int>());
    }
    if (check.name == "equivalence") {
        ProblemSpec spec;
        spec.n = p.at("n").get<int>();
        spec.p = p.at("p").get<double>();
        spec.a = p.at("a").get<double>();
        spec.b = p.at("b").get<double>();
        spec.domain = domain_from_json(p.at("domain"));
        const int cells = p.at("cells").get<int>();
        Discretization d(spec, cells);
        double mu = 0.0;
        Eigen::VectorXd u;
        if (spec.p == 2.0) {
            const auto pencil = assemble_pencil(spec, d.grid, d.op);
            const auto spectrum = compute_spectrum(pencil, d.grid, d.solver, 1);
            mu = spectrum.eigenvalues(0);
            u = spectrum.eigenvectors.col(0);
        } else {
            IterationOptions opts;
            opts.tol = 1e-12;
            const auto pair =
                inverse_iteration(spec, d.grid, d.op, d.solver, std::nullopt, opts);
            mu = pair.mu;
            u = pair.u;
        }
        auto report = check_equivalence(spec, d.grid, d.op, mu, u,
                                        p.value("tol", 1e-6));
        report.parameters["cells"] = cells;
        return report;
    }
    if (check.name == "finite_energy") {
        ProblemSpec spec;
        spec.n = p.at("n").get<int>();
        spec.p = p.at("p").get<double>();
        spec.a = p.at("a").get<double>();
        spec.b = p.at("b").get<double>();
        spec.domain = domain_from_json(p.at("domain"));
        return finite_energy_report(spec, p.at("cells").get<int>());
    }
    throw ConfigError("unknown verify check: " + check.name);
}

} // namespace

VerifyManifest run_verify(const VerifyConfig& config) {
    VerifyManifest manifest;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    int index = 0;
    for (const auto& check : config.checks) {
        PropertyReport report = dispatch_check(check, config.seed,
                                               config.override_threshold_guard);
        entries.push_back({{"index", index},
                           {"check", check.name},
                           {"report_name", report.name},
                           {"pass", report.pass},
                           {"margin", report.margin}});
        manifest.all_pass = manifest.all_pass && report.pass;
        manifest.reports.push_back(std::move(report));
        ++index;
    }
    manifest.document = {{"artifact_version", "0.1.0"},
                         {"config_hash", config.hash()},
                         {"seed", config.seed},
                         {"check_count", static_cast<int>(config.checks.size())},
                         {"all_pass", manifest.all_pass},
                         {"checks", entries}};
    return manifest;
}

void write_verify_files(const VerifyConfig& config, const VerifyManifest& manifest) {
    ensure_dir(config.output_dir);
    const fs::path dir(config.output_dir);
    const std::string hash = config.hash();
    for (size_t i = 0; i < manifest.reports.size(); ++i) {
        auto doc = manifest.reports[i].to_json();
        doc["config_hash"] = hash;
        auto out = open_out(dir / ("verify_" + std::to_string(i) + "_" +
                                   manifest.reports[i].name + ".json"));
        out << doc.dump(2) << "\n";
    }
    auto mout = open_out(dir / "verify_manifest.json");
    mout << manifest.document.dump(2) << "\n";

    auto csv = open_out(dir / "verify_summary.csv");
    csv << "config_hash,index,check,pass,margin\n";
    for (size_t i = 0; i < manifest.reports.size(); ++i)
        csv << hash << "," << i << "," << manifest.reports[i].name << ","
            << (manifest.reports[i].pass ? 1 : 0) << ","
            << fmt(manifest.reports[i].margin) << "\n";
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
    // cartesian product of the axes over the base config
    std::vector<RunConfig> points;
    std::vector<std::array<double, 3>> abp; // resolved (a, b, p) per point
    points.push_back(config.base);
    for (const auto& axis : config.axes) {
        std::vector<RunConfig> expanded;
        for (const auto& point : points) {
            for (double value : axis.values) {
                RunConfig next = point;
                if (axis.parameter == "a") next.problem.a = value;
                else if (axis.parameter == "b") next.problem.b = value;
                else next.problem.p = value;
                expanded.push_back(std::move(next));
            }
        }
        points = std::move(expanded);
    }

    std::vector<SweepRow> rows(points.size());
    std::atomic<size_t> cursor{0};
    const int workers = std::max(1, config.workers);

    auto work = [&]() {
        for (size_t i = cursor.fetch_add(1); i < points.size(); i = cursor.fetch_add(1)) {
            const RunConfig& point = points[i];
            SweepRow row;
            row.index = static_cast<int>(i);
            row.a = point.problem.a;
            row.b = point.problem.b;
            row.p = point.problem.p;
            const double p_conj = point.problem.p / (point.problem.p - 1.0);
            row.weight_sum_margin =
                point.problem.a / p_conj + point.problem.b / point.problem.p + 2.0;
            try {
                if (!validate(point.problem).admissible) {
                    row.status = "rejected";
                } else {
                    RunConfig solo = point;
                    solo.solver.eigenvalue_count = 1;
                    const auto record = run_solve(solo);
                    row.status = "ok";
                    row.mu_1 = record.eigenvalues(0);
                    row.residual_1 =
                        record.solver_used == "nonlinear" && !record.trace.steps.empty()
                            ? record.trace.steps.back().increment
                            : 0.0;
                }
            } catch (const InadmissibleError&) {
                row.status = "rejected";
            } catch (const ConfigError&) {
                row.status = "rejected"; // e.g. a p-axis point swept below 1
            } catch (const SolverError&) {
                row.status = "solver_failed";
            }
            rows[i] = std::move(row);
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

void write_sweep_files(const SweepConfig& config, const std::vector<SweepRow>& rows) {
    ensure_dir(config.base.output_dir);
    auto csv = open_out(fs::path(config.base.output_dir) / "sweep.csv");
    const std::string hash = config.base.hash();
    csv << "config_hash,index,n,p,a,b,cells,weight_sum_margin,status,mu_1\n";
    for (const auto& row : rows) {
        csv << hash << "," << row.index << "," << config.base.problem.n << ","
            << fmt(row.p) << "," << fmt(row.a) << "," << fmt(row.b) << ","
            << config.base.cells << "," << fmt(row.weight_sum_margin) << ","
            << row.status << ",";
        if (row.status == "ok") csv << fmt(row.mu_1);
        csv << "\n";
    }
}

ConvergenceTable run_convergence(const RunConfig& config,
                                 const std::vector<int>& cells_list) {
    if (cells_list.size() < 3)
        throw ConfigError("convergence study needs at least 3 grid sizes");
    for (size_t i = 1; i < cells_list.size(); ++i)
        if (cells_list[i] <= cells_list[i - 1])
            throw ConfigError("convergence cells list must be strictly ascending");
    const double ratio0 =
        static_cast<double>(cells_list[1]) / static_cast<double>(cells_list[0]);
    for (size_t i = 2; i < cells_list.size(); ++i) {
        const double r = static_cast<double>(cells_list[i]) /
                         static_cast<double>(cells_list[i - 1]);
        if (std::abs(r - ratio0) > 1e-12 * ratio0)
            throw ConfigError("convergence cells list must use a constant refinement ratio");
    }

    ConvergenceTable table;
    for (int cells : cells_list) {
        RunConfig point = config;
        point.cells = cells;
        point.solver.eigenvalue_count = 1;
        const auto record = run_solve(point);
        table.rows.push_back({cells, record.eigenvalues(0)});
    }

    const size_t m = table.rows.size();
    const double m1 = table.rows[m - 3].mu_1;
    const double m2 = table.rows[m - 2].mu_1;
    const double m3 = table.rows[m - 1].mu_1;
    table.observed_order = std::log(std::abs((m2 - m1) / (m3 - m2))) / std::log(ratio0);
    const double factor = std::pow(ratio0, table.observed_order);
    table.extrapolated = m3 + (m3 - m2) / (factor - 1.0);
    return table;
}

void write_convergence_files(const RunConfig& config, const ConvergenceTable& table) {
    ensure_dir(config.output_dir);
    auto csv = open_out(fs::path(config.output_dir) / "convergence.csv");
    const std::string hash = config.hash();
    csv << "config_hash,cells,mu_1,observed_order,extrapolated\n";
    for (size_t i = 0; i < table.rows.size(); ++i) {
        csv << hash << "," << table.rows[i].cells << "," << fmt(table.rows[i].mu_1) << ",";
        if (i + 1 == table.rows.size())
            csv << fmt(table.observed_order) << "," << fmt(table.extrapolated);
        else
            csv << ",";
        csv << "\n";
    }
}

void dump_grid_file(const RunConfig& config) {
    Discretization d(config.problem, config.cells);
    ensure_dir(config.output_dir);

    nlohmann::ordered_json doc;
    doc["config_hash"] = config.hash();
    doc["kind"] = domain_to_json(config.problem.domain)["kind"];
    doc["n"] = config.problem.n;
    doc["cells"] = config.cells;
    doc["node_count"] = d.grid.node_count();

    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (int i = 0; i < d.grid.node_count(); ++i) {
        if (d.grid.coords().cols() == 1) nodes.push_back(d.grid.coords()(i, 0));
        else nodes.push_back({d.grid.coords()(i, 0), d.grid.coords()(i, 1)});
    }
    doc["nodes"] = nodes;
    doc["quad_weights"] = std::vector<double>(
        d.grid.quad_weights().data(),
        d.grid.quad_weights().data() + d.grid.node_count());

    nlohmann::ordered_json triplets = nlohmann::ordered_json::array();
    for (int col = 0; col < d.op.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(d.op.matrix, col); it; ++it)
            triplets.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()),
                                it.value()});
    doc["operator"] = {{"tag", d.op.tag},
                       {"rows", static_cast<int>(d.op.matrix.rows())},
                       {"cols", static_cast<int>(d.op.matrix.cols())},
                       {"triplets", triplets}};

    auto out = open_out(fs::path(config.output_dir) / "grid.json");
    out << doc.dump(2) << "\n";
}

} // namespace hle
