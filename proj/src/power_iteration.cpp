#include "hle/power_iteration.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hle/errors.hpp"
#include "hle/spectrum.hpp"

namespace hle {

double rayleigh_quotient(const Eigen::VectorXd& u, const ProblemSpec& spec,
                         const Grid& grid, const DiscreteOperator& op) {
    const DerivedExponents d = derive_exponents(spec);
    const Eigen::VectorXd au = op.matrix * u;
    const double num =
        (grid.weight_vector(-d.s).array() * au.array().abs().pow(spec.p)).sum();
    const double den =
        (grid.weight_vector(spec.b).array() * u.array().abs().pow(spec.p)).sum();
    if (den == 0.0) throw ConfigError("rayleigh_quotient: zero denominator");
    return num / den;
}

Eigen::VectorXd normalize_to_constraint(const Eigen::VectorXd& u,
                                        const ProblemSpec& spec, const Grid& grid) {
    const double norm = grid.weighted_norm(spec.b, u, spec.p);
    if (norm == 0.0) throw ConfigError("normalize: zero vector");
    Eigen::VectorXd out = u / norm;
    sign_normalize(out);
    return out;
}

namespace {

Eigen::VectorXd auto_start(const ProblemSpec& spec, const Grid& grid,
                           const DiscreteOperator& op, const PoissonSolver& solver,
                           const IterationOptions& options) {
    // Positive principal eigenvector of the p = 2 pencil with the same (a, b)
    // targets the principal eigenfunction; fall back to the interior indicator.
    ProblemSpec linear = spec;
    linear.p = 2.0;
    const bool pencil_viable = validate(linear).admissible &&
                               linear.a + linear.b + 4.0 > 1e-6 &&
                               grid.node_count() <= options.dense_threshold;
    if (pencil_viable) {
        const GeneralizedPencil pencil = assemble_pencil(linear, grid, op);
        SpectrumOptions sopt;
        sopt.dense_threshold = options.dense_threshold;
        const SpectrumResult spectrum = compute_spectrum(pencil, grid, solver, 1, sopt);
        return spectrum.eigenvectors.col(0);
    }
    return Eigen::VectorXd::Ones(grid.node_count());
}

} // namespace

PrincipalPair inverse_iteration(const ProblemSpec& spec, const Grid& grid,
                                const DiscreteOperator& op, const PoissonSolver& solver,
                                std::optional<Eigen::VectorXd> initial,
                                const IterationOptions& options) {
    const AdmissibilityReport report = validate(spec);
    if (!report.admissible) {
        const DerivedExponents der = derive_exponents(spec);
        const bool only_threshold_blocks =
            spec.a > -spec.n && spec.b > -spec.n &&
            der.s + spec.b + 2.0 * spec.p > -1e-12;
        if (!(options.allow_threshold_equality && only_threshold_blocks))
            throw InadmissibleError("inverse_iteration: " + report.summary());
    }
    if (!(options.tol > 0.0)) throw ConfigError("inverse_iteration: tol must be positive");

    Eigen::VectorXd u = initial ? std::move(*initial)
                                : auto_start(spec, grid, op, solver, options);
    u = normalize_to_constraint(u, spec, grid);

    IterationTrace trace;
    double mu_hat = 0.0;
    Eigen::VectorXd t_of_u;

    for (int it = 0; it < options.max_iter; ++it) {
        const CascadePair cascade = cascade_solve(spec, grid, solver, u);
        t_of_u = cascade.u;
        const double magnitude = grid.weighted_norm(spec.b, t_of_u, spec.p);
        if (magnitude == 0.0)
            throw SolverError("inverse_iteration: cascade collapsed to zero");
        // 1-homogeneity: at a fixed point mu = ||T u||^{-(p-1)}
        mu_hat = std::pow(magnitude, -(spec.p - 1.0));

        Eigen::VectorXd next = normalize_to_constraint(t_of_u, spec, grid);
        const double increment = grid.weighted_norm(spec.b, next - u, spec.p);
        u = std::move(next);
        const double q = rayleigh_quotient(u, spec, grid, op);
        trace.steps.push_back({q, mu_hat, increment});

        if (increment < options.tol && std::abs(q - mu_hat) < options.tol * mu_hat) {
            trace.converged = true;
            break;
        }
    }

    if (!trace.converged) {
        std::ostringstream os;
        os << "inverse_iteration did not converge in " << trace.steps.size()
           << " iterations (last increment "
           << (trace.steps.empty() ? 0.0 : trace.steps.back().increment) << ")";
        throw IterationDidNotConverge(os.str(), std::move(trace));
    }

    PrincipalPair pair;
    pair.mu = trace.steps.back().rayleigh_q;
    pair.trace = std::move(trace);

    // Scale the final cascade partner onto the system: -Lap v = mu |x|^b Phi_p(u).
    const CascadePair final_cascade = cascade_solve(spec, grid, solver, u);
    pair.u = std::move(u);
    pair.v = pair.mu * final_cascade.v;
    return pair;
}

MultistartResult multistart_spread(const ProblemSpec& spec, const Grid& grid,
                                   const DiscreteOperator& op, const PoissonSolver& solver,
                                   int starts, unsigned seed,
                                   const IterationOptions& options) {
    MultistartResult result;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd u0(grid.node_count());
        for (Eigen::Index i = 0; i < u0.size(); ++i) u0(i) = unif(rng);
        const PrincipalPair pair =
            inverse_iteration(spec, grid, op, solver, u0, options);
        result.values.push_back(pair.mu);
    }
    if (!result.values.empty()) {
        const auto [lo, hi] = std::minmax_element(result.values.begin(), result.values.end());
        result.spread_rel = (*hi - *lo) / *lo;
    }
    return result;
}

} // namespace hle
