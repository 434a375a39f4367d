#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>
#include <vector>

#include "hle/config.hpp"
#include "hle/power_iteration.hpp"
#include "hle/verify.hpp"

namespace hle {

/// Outcome of one solve: the serializable record plus the numeric fields the
/// test suites assert on without reparsing JSON.
struct ResultRecord {
    nlohmann::ordered_json document;
    std::string solver_used; // "linear" | "nonlinear"
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    Eigen::MatrixXd partners;
    double gap = 0.0;
    bool radial_class = false;
    IterationTrace trace; // nonlinear runs only
};

/// Validates, builds the grid, dispatches to the pencil (p = 2) or the inverse
/// iteration, and assembles the record. Throws InadmissibleError/SolverError.
ResultRecord run_solve(const RunConfig& config);

/// Writes result.json + eigenvalues.csv (+ trace.csv for nonlinear runs) into
/// config.output_dir. Timing goes to the log stream, never into the files, so
/// identical config + seed reproduces the bytes.
void write_result_files(const RunConfig& config, const ResultRecord& record);

struct VerifyManifest {
    std::vector<PropertyReport> reports;
    bool all_pass = true;
    nlohmann::ordered_json document;
};

VerifyManifest run_verify(const VerifyConfig& config);
void write_verify_files(const VerifyConfig& config, const VerifyManifest& manifest);

struct SweepRow {
    int index = 0;
    double a = 0.0, b = 0.0, p = 0.0;
    std::string status; // "ok" | "rejected" | "solver_failed"
    double weight_sum_margin = 0.0; // a/p' + b/p + 2
    double mu_1 = 0.0;              // valid when status == "ok"
    double residual_1 = 0.0;
};

std::vector<SweepRow> run_sweep(const SweepConfig& config);
void write_sweep_files(const SweepConfig& config, const std::vector<SweepRow>& rows);

struct ConvergenceRow {
    int cells = 0;
    double mu_1 = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double observed_order = 0.0;
    double extrapolated = 0.0;
};

/// mu_1 across the ascending cells list (>= 3 entries, constant refinement
/// ratio), with the three-point Richardson order and limit.
ConvergenceTable run_convergence(const RunConfig& config, const std::vector<int>& cells_list);
void write_convergence_files(const RunConfig& config, const ConvergenceTable& table);

/// Diagnostic dump: nodes, quadrature weights and the operator in coordinate
/// triplet form.
void dump_grid_file(const RunConfig& config);

} // namespace hle
