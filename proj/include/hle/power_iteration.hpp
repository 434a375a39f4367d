#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "hle/errors.hpp"
#include "hle/grid.hpp"
#include "hle/poisson.hpp"
#include "hle/problem.hpp"

namespace hle {

struct IterationStep {
    double rayleigh_q;  // quotient at the new iterate
    double mu_estimate; // homogeneity meter ||T u||^{-(p-1)}
    double increment;   // b-weighted p-norm of the iterate change
};

struct IterationTrace {
    std::vector<IterationStep> steps;
    bool converged = false;
    int iterations() const { return static_cast<int>(steps.size()); }
};

/// Converged principal pair: mu with the discrete eigenfunctions (u, v)
/// solving the second-order system, plus the per-step trace.
struct PrincipalPair {
    double mu = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    IterationTrace trace;
};

struct IterationOptions {
    double tol = 1e-10;
    int max_iter = 500;
    int dense_threshold = 4000; // for the p = 2 pencil used by the auto start
    /// Relaxes only the s+b+2p > 0 margin to >= 0 (Rellich equality case).
    bool allow_threshold_equality = false;
};

/// Raised when max_iter runs out; carries the partial trace for diagnosis.
struct IterationDidNotConverge : SolverError {
    IterationTrace trace;
    IterationDidNotConverge(const std::string& message, IterationTrace partial)
        : SolverError(message), trace(std::move(partial)) {}
};

/// Weighted quotient sum omega |x|^{-s} |Lap_h u|^p / sum omega |x|^b |u|^p,
/// s = a(p-1). Throws ConfigError for a zero denominator.
double rayleigh_quotient(const Eigen::VectorXd& u, const ProblemSpec& spec,
                         const Grid& grid, const DiscreteOperator& op);

/// Scales u to unit b-weighted p-norm and orients the largest-modulus entry
/// positive. Throws ConfigError on zero input.
Eigen::VectorXd normalize_to_constraint(const Eigen::VectorXd& u,
                                        const ProblemSpec& spec, const Grid& grid);

/// Inverse power iteration u <- normalize(T u) on the 1-homogeneous cascade.
/// Stops when the b-weighted increment and the gap between the two eigenvalue
/// meters both drop below tol; exceeding max_iter raises SolverError carrying
/// the trace in its message.
PrincipalPair inverse_iteration(const ProblemSpec& spec, const Grid& grid,
                                const DiscreteOperator& op, const PoissonSolver& solver,
                                std::optional<Eigen::VectorXd> initial = std::nullopt,
                                const IterationOptions& options = {});

struct MultistartResult {
    std::vector<double> values; // converged mu per start
    double spread_rel = 0.0;    // (max - min) / min
};

/// Diagnostic: runs `starts` seeded random positive starts and reports the
/// spread of converged principal eigenvalues.
MultistartResult multistart_spread(const ProblemSpec& spec, const Grid& grid,
                                   const DiscreteOperator& op, const PoissonSolver& solver,
                                   int starts, unsigned seed,
                                   const IterationOptions& options = {});

} // namespace hle
