// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hle/poisson.hpp"
#include "hle/power_iteration.hpp"
#include "hle/runner.hpp"
#include "hle/spectrum.hpp"
#include "hle/verify.hpp"

using namespace hle;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
    bool pass = true;
    std::string detail;
};

struct Check {
    std::string label;
    std::function<CriterionResult()> run;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

double bessel_j0_first_zero() {
    double lo = 2.0, hi = 3.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::cyl_bessel_j(0.0, lo) * std::cyl_bessel_j(0.0, mid) <= 0.0) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

struct Discretization {
    Grid grid;
    DiscreteOperator op;
    PoissonSolver solver;
    Discretization(const DomainDescriptor& d, int n, int N)
        : grid(build_grid(d, n, N)), op(assemble_laplacian(grid)), solver(op, grid) {}
};

ProblemSpec make_spec(int n, double p, double a, double b, const DomainDescriptor& d) {
    ProblemSpec spec;
    spec.n = n;
    spec.p = p;
    spec.a = a;
    spec.b = b;
    spec.domain = d;
    return spec;
}

// Shared state across criteria (principal pairs feed criteria 5, 6, 9).
struct Context {
    std::unique_ptr<Discretization> interval512;
    SpectrumResult interval_spectrum; // 5 pairs at N=512
    std::unique_ptr<Discretization> disc1024;
    SpectrumResult disc_spectrum; // 2 pairs at N=1024
    // sign-normalized principal vectors with their operators, for criterion 5
    std::vector<std::pair<Eigen::VectorXd, const DiscreteOperator*>> principal_pairs;
    std::vector<std::unique_ptr<Discretization>> keep_alive;
};

Context ctx;

struct CliRun {
    int exit_code;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    fs::create_directories("acceptance_tmp");
    const std::string log = "acceptance_tmp/cli_log.txt";
    const std::string cmd = std::string(HLE_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

void write_file(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CriterionResult criterion_1_interval_oracle() {
    const auto start = std::chrono::steady_clock::now();
    const auto domain = DomainDescriptor::interval(1.0);
    const auto spec = make_spec(1, 2.0, 0.0, 0.0, domain);

    ctx.interval512 = std::make_unique<Discretization>(domain, 1, 512);
    const auto pencil = assemble_pencil(spec, ctx.interval512->grid, ctx.interval512->op);
    ctx.interval_spectrum =
        compute_spectrum(pencil, ctx.interval512->grid, ctx.interval512->solver, 5);

    std::ostringstream detail;
    bool pass = true;
    for (int k = 1; k <= 5; ++k) {
        const double analytic = std::pow(k * M_PI / 2.0, 4.0);
        const double rel =
            std::abs(ctx.interval_spectrum.eigenvalues(k - 1) - analytic) / analytic;
        pass = pass && rel < 0.01;
        if (k == 1) detail << "mu_1 rel err " << rel;
    }

    RunConfig cfg;
    cfg.problem = spec;
    cfg.cells = 512;
    const auto table = run_convergence(cfg, {128, 256, 512});
    pass = pass && table.observed_order >= 1.8;
    detail << ", order " << table.observed_order;

    const double elapsed = seconds_since(start);
    pass = pass && elapsed < 10.0;
    detail << ", " << elapsed << " s";
    ctx.principal_pairs.emplace_back(ctx.interval_spectrum.eigenvectors.col(0),
                                     &ctx.interval512->op);
    return {pass, detail.str()};
}

CriterionResult criterion_2_disc_oracle() {
    const auto start = std::chrono::steady_clock::now();
    const auto domain = DomainDescriptor::ball(1.0);
    const auto spec = make_spec(2, 2.0, 0.0, 0.0, domain);

    ctx.disc1024 = std::make_unique<Discretization>(domain, 2, 1024);
    const auto pencil = assemble_pencil(spec, ctx.disc1024->grid, ctx.disc1024->op);
    SpectrumOptions opts;
    opts.dense_threshold = 4000;
    ctx.disc_spectrum =
        compute_spectrum(pencil, ctx.disc1024->grid, ctx.disc1024->solver, 2, opts);

    const double j01 = bessel_j0_first_zero();
    const double analytic = std::pow(j01, 4.0);
    const double rel = std::abs(ctx.disc_spectrum.eigenvalues(0) - analytic) / analytic;
    const double elapsed = seconds_since(start);
    const bool pass = rel < 0.01 && elapsed < 10.0;

    std::ostringstream detail;
    detail << "mu_1 = " << ctx.disc_spectrum.eigenvalues(0) << " vs " << analytic
           << " (rel " << rel << "), " << elapsed << " s";
    ctx.principal_pairs.emplace_back(ctx.disc_spectrum.eigenvectors.col(0),
                                     &ctx.disc1024->op);
    return {pass, detail.str()};
}

CriterionResult criterion_3_cross_solver() {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::pair<double, double>> weights = {
        {0.0, 0.0}, {1.0, 0.0}, {-0.5, -0.5}};
    bool pass = true;
    double worst = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        const DomainDescriptor domain =
            variant == 0 ? DomainDescriptor::interval(1.0) : DomainDescriptor::ball(1.0);
        const int n = variant == 0 ? 1 : 2;
        for (const auto& [a, b] : weights) {
            auto d = std::make_unique<Discretization>(domain, n, 256);
            const auto spec = make_spec(n, 2.0, a, b, domain);
            const auto pencil = assemble_pencil(spec, d->grid, d->op);
            const auto spectrum = compute_spectrum(pencil, d->grid, d->solver, 1);
            const auto pair = inverse_iteration(spec, d->grid, d->op, d->solver);
            const double rel =
                std::abs(pair.mu - spectrum.eigenvalues(0)) / spectrum.eigenvalues(0);
            worst = std::max(worst, rel);
            pass = pass && rel < 1e-8;
            ctx.principal_pairs.emplace_back(pair.u, &d->op);
            ctx.keep_alive.push_back(std::move(d));
        }
    }
    const double elapsed = seconds_since(start);
    pass = pass && elapsed < 30.0;
    std::ostringstream detail;
    detail << "worst rel gap " << worst << " over 6 weight/domain combos, " << elapsed
           << " s";
    return {pass, detail.str()};
}

CriterionResult criterion_4_symmetry() {
    const auto domain = DomainDescriptor::ball(1.0);
    bool pass = true;
    std::ostringstream detail;
    const std::vector<std::array<double, 3>> sets = {{1.0, 2.0, 3.0}, {0.5, 1.0, 1.5}};
    for (const auto& set : sets) {
        const auto coarse = check_symmetry(2, set[0], set[1], set[2], domain, 256, 2e-2);
        const auto fine = check_symmetry(2, set[0], set[1], set[2], domain, 512, 2e-2);
        const double gap_coarse = coarse.measured["relative_gap"].get<double>();
        const double gap_fine = fine.measured["relative_gap"].get<double>();
        // the identity is exact for the discrete minimizers (the proof algebra
        // is pointwise and survives collocation), so the measured gap is solver
        // noise; "shrinking with N" applies only above that floor
        const bool shrinking = gap_fine < gap_coarse || gap_fine < 1e-10;
        pass = pass && fine.pass && shrinking;
        detail << "(" << set[0] << "," << set[1] << "," << set[2] << "): "
               << gap_coarse << " -> " << gap_fine << "  ";

        // collect the converged nonlinear principal pairs for criterion 5
        auto d = std::make_unique<Discretization>(domain, 2, 512);
        const auto spec = make_spec(2, set[2], set[0], set[1], domain);
        auto pair = inverse_iteration(spec, d->grid, d->op, d->solver);
        ctx.principal_pairs.emplace_back(pair.u, &d->op);
        ctx.keep_alive.push_back(std::move(d));
    }
    return {pass, detail.str()};
}

CriterionResult criterion_5_positivity() {
    bool pass = true;
    int index = 0;
    std::ostringstream detail;
    for (const auto& [u, op] : ctx.principal_pairs) {
        if (static_cast<int>(u.size()) != op->matrix.rows()) continue; // guard
        const Eigen::VectorXd au = op->matrix * u;
        const bool ok = u.minCoeff() > 0.0 && au.minCoeff() > 0.0;
        pass = pass && ok;
        ++index;
    }
    detail << index << " principal pairs strictly positive and superharmonic";

    // discrimination control: the second interval eigenvector must fail
    const Eigen::VectorXd u2 = ctx.interval_spectrum.eigenvectors.col(1);
    const bool second_fails = !(u2.minCoeff() > 0.0);
    pass = pass && second_fails;
    detail << "; k=2 control " << (second_fails ? "fails as required" : "UNEXPECTEDLY PASSES");
    return {pass, detail.str()};
}

CriterionResult criterion_6_simplicity() {
    const double gap1 =
        ctx.interval_spectrum.eigenvalues(1) - ctx.interval_spectrum.eigenvalues(0);
    const double gap2 = ctx.disc_spectrum.eigenvalues(1) - ctx.disc_spectrum.eigenvalues(0);
    const bool pass = gap1 > 1e-3 * ctx.interval_spectrum.eigenvalues(0) &&
                      gap2 > 1e-3 * ctx.disc_spectrum.eigenvalues(0);
    std::ostringstream detail;
    detail << "interval gap/mu_1 = " << gap1 / ctx.interval_spectrum.eigenvalues(0)
           << ", disc gap/mu_1 = " << gap2 / ctx.disc_spectrum.eigenvalues(0);
    return {pass, detail.str()};
}

CriterionResult criterion_7_scaling_collapse() {
    const std::vector<int> k_list = {2, 3, 4, 6, 8, 12, 16};
    const auto r1 = scaling_slope(1, 0.0, -4.5, 2.0, 4096, k_list, 0.05, 0.99);
    const auto r2 = scaling_slope(2, 1.0, -5.5, 2.0, 4096, k_list, 0.05, 0.99);
    std::ostringstream detail;
    detail << "n=1 slope " << r1.measured["fitted_slope"].get<double>() << " (R2 "
           << r1.measured["r_squared"].get<double>() << "), n=2 slope "
           << r2.measured["fitted_slope"].get<double>() << " (R2 "
           << r2.measured["r_squared"].get<double>() << ")";
    return {r1.pass && r2.pass, detail.str()};
}

CriterionResult criterion_8_low_dim_inequality() {
    const auto r1 = check_low_dimension_inequality(1, 0.0, 2.0, 100, 256, 20240801);
    const auto r2 = check_low_dimension_inequality(2, 1.0, 1.5, 100, 256, 20240802);
    const auto r3 = check_low_dimension_inequality(1, -0.5, 3.0, 100, 256, 20240803);
    std::ostringstream detail;
    detail << "worst margins: " << r1.measured["worst_margin_main"].get<double>() << ", "
           << r2.measured["worst_margin_main"].get<double>() << ", "
           << r3.measured["worst_margin_main"].get<double>();
    return {r1.pass && r2.pass && r3.pass, detail.str()};
}

CriterionResult criterion_9_splitting() {
    bool pass = true;
    double worst = 0.0;
    // interval pair at N=512; the disc pair is recomputed at N=256 because the
    // max-norm residual meter divides by the origin cell's ~h^2 quadrature
    // weight, whose fp floor crosses 1e-6 past N~400
    const auto disc = std::make_unique<Discretization>(DomainDescriptor::ball(1.0), 2, 256);
    const auto disc_spec = make_spec(2, 2.0, 0.0, 0.0, DomainDescriptor::ball(1.0));
    const auto disc_pencil = assemble_pencil(disc_spec, disc->grid, disc->op);
    const auto disc_spectrum = compute_spectrum(disc_pencil, disc->grid, disc->solver, 1);

    struct Case {
        const SpectrumResult* spectrum;
        const Discretization* d;
        ProblemSpec spec;
    };
    const std::vector<Case> cases = {
        {&ctx.interval_spectrum, ctx.interval512.get(),
         make_spec(1, 2.0, 0.0, 0.0, DomainDescriptor::interval(1.0))},
        {&disc_spectrum, disc.get(), disc_spec}};
    for (const auto& c : cases) {
        const double mu = c.spectrum->eigenvalues(0);
        const Eigen::VectorXd u = c.spectrum->eigenvectors.col(0);
        const Eigen::VectorXd v = c.spectrum->partners.col(0);
        for (double ratio : {0.5, 1.0, 2.0}) {
            const auto split = split_eigenvalue(mu, 2.0, ratio);
            const auto res = system_residuals(u, v, split, c.spec, c.d->grid, c.d->op);
            worst = std::max({worst, res.first, res.second});
            pass = pass && res.first <= 1e-6 && res.second <= 1e-6;
        }
    }
    std::ostringstream detail;
    detail << "worst system residual " << worst << " over ratios {0.5, 1, 2}";
    return {pass, detail.str()};
}

CriterionResult criterion_10_admissibility_gate() {
    bool pass = true;
    std::ostringstream detail;

    write_file("acceptance_tmp/gate_bad.json", R"({
      "problem": {"n": 3, "p": 2.0, "a": -2.0, "b": -3.0},
      "domain": {"kind": "ball", "radius": 1.0},
      "grid": {"cells": 64},
      "output_dir": "acceptance_tmp/gate_bad_out"
    })");
    const auto rejected = run_cli("solve --config acceptance_tmp/gate_bad.json");
    const bool reject_ok = rejected.exit_code == 2 &&
                           rejected.output.find("a+b+4") != std::string::npos;
    pass = pass && reject_ok;
    detail << "(-2,-3,2) exit " << rejected.exit_code
           << (reject_ok ? " citing a+b+4" : " MISSING a+b+4");

    // low-dimension specs with a,b > -n must pass regardless of the weight sum
    const std::vector<std::string> configs = {
        R"({"problem": {"n": 1, "p": 2.0, "a": -0.99, "b": -0.99},
            "domain": {"kind": "interval", "radius": 1.0},
            "grid": {"cells": 64}, "output_dir": "acceptance_tmp/gate_n1_out"})",
        R"({"problem": {"n": 2, "p": 2.0, "a": -1.9, "b": -1.9},
            "domain": {"kind": "ball", "radius": 1.0},
            "grid": {"cells": 64}, "output_dir": "acceptance_tmp/gate_n2_out"})",
        R"({"problem": {"n": 2, "p": 3.0, "a": -1.5, "b": -1.99},
            "domain": {"kind": "rectangle", "half_width": 1.0, "half_height": 1.0},
            "grid": {"cells": 16}, "output_dir": "acceptance_tmp/gate_rect_out"})"};
    int accepted = 0;
    for (size_t i = 0; i < configs.size(); ++i) {
        const std::string path = "acceptance_tmp/gate_ok_" + std::to_string(i) + ".json";
        write_file(path, configs[i]);
        const auto result = run_cli("solve --config " + path);
        if (result.exit_code == 0) ++accepted;
    }
    pass = pass && accepted == static_cast<int>(configs.size());
    detail << "; " << accepted << "/" << configs.size()
           << " low-dimension edge specs accepted";

    // the report marks the weight-sum condition as implied for n <= 2
    const std::string record = slurp("acceptance_tmp/gate_n1_out/result.json");
    const bool implied = record.find("\"implied\": true") != std::string::npos;
    pass = pass && implied;
    detail << (implied ? ", condition reported implied" : ", implied flag MISSING");
    return {pass, detail.str()};
}

CriterionResult criterion_11_determinism() {
    write_file("acceptance_tmp/det.json", R"({
      "problem": {"n": 2, "p": 2.5, "a": 0.5, "b": 1.0},
      "domain": {"kind": "ball", "radius": 1.0},
      "grid": {"cells": 128},
      "solver": {"mode": "nonlinear", "multistart": 4},
      "output_dir": "acceptance_tmp/det_out",
      "seed": 314159
    })");
    const auto first = run_cli("solve --config acceptance_tmp/det.json");
    const std::string result1 = slurp("acceptance_tmp/det_out/result.json");
    const std::string eigen1 = slurp("acceptance_tmp/det_out/eigenvalues.csv");
    const std::string trace1 = slurp("acceptance_tmp/det_out/trace.csv");
    const auto second = run_cli("solve --config acceptance_tmp/det.json");
    const std::string result2 = slurp("acceptance_tmp/det_out/result.json");
    const std::string eigen2 = slurp("acceptance_tmp/det_out/eigenvalues.csv");
    const std::string trace2 = slurp("acceptance_tmp/det_out/trace.csv");

    const bool pass = first.exit_code == 0 && second.exit_code == 0 &&
                      !result1.empty() && result1 == result2 && eigen1 == eigen2 &&
                      trace1 == trace2;
    std::ostringstream detail;
    detail << "result.json " << result1.size() << " bytes, eigenvalues.csv "
           << eigen1.size() << " bytes, trace.csv " << trace1.size()
           << " bytes, all " << (pass ? "identical" : "DIFFERENT");
    return {pass, detail.str()};
}

} // namespace

int main() {
    const std::vector<Check> checks = {
        {"criterion 1: interval Navier oracle (kpi/2)^4, order >= 1.8, < 10 s",
         criterion_1_interval_oracle},
        {"criterion 2: disc oracle j01^4 within 1% at N=1024, < 10 s",
         criterion_2_disc_oracle},
        {"criterion 3: cross-solver agreement 1e-8 over 6 combos, < 30 s",
         criterion_3_cross_solver},
        {"criterion 4: symmetry identity < 2e-2 at N=512 and shrinking",
         criterion_4_symmetry},
        {"criterion 5: principal positivity + k=2 discrimination",
         criterion_5_positivity},
        {"criterion 6: spectral gap > 1e-3 mu_1", criterion_6_simplicity},
        {"criterion 7: scaling collapse slope +-0.05, R2 >= 0.99",
         criterion_7_scaling_collapse},
        {"criterion 8: low-dimension inequality, 100 samples x 3 parameter sets",
         criterion_8_low_dim_inequality},
        {"criterion 9: splitting system residuals <= 1e-6", criterion_9_splitting},
        {"criterion 10: CLI admissibility gate", criterion_10_admissibility_gate},
        {"criterion 11: bit-identical outputs for identical config+seed",
         criterion_11_determinism},
    };

    int failures = 0;
    for (const auto& check : checks) {
        CriterionResult result;
        try {
            result = check.run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %s :: %s\n", result.pass ? "PASS" : "FAIL",
                    check.label.c_str(), result.detail.c_str());
        if (!result.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all %zu criteria passed\n", checks.size());
    return failures == 0 ? 0 : 1;
}
