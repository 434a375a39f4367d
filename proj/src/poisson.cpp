#include "hle/poisson.hpp"

#include "hle/errors.hpp"

namespace hle {

PoissonSolver::PoissonSolver(const DiscreteOperator& op, const Grid& grid)
    : matrix_(op.matrix) {
    const Eigen::VectorXd& w = grid.quad_weights();
    w_sqrt_ = w.array().sqrt();
    w_inv_sqrt_ = w_sqrt_.cwiseInverse();

    // S = W^{1/2} A W^{-1/2} is symmetric positive definite because W A is.
    symmetrized_ = w_sqrt_.asDiagonal() * matrix_ * w_inv_sqrt_.asDiagonal();
    symmetrized_ = 0.5 * (Eigen::SparseMatrix<double>(symmetrized_.transpose()) + symmetrized_);
    symmetrized_.makeCompressed();

    ldlt_.compute(symmetrized_);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("Dirichlet Laplacian factorization failed (operator not SPD?)");
    if ((ldlt_.vectorD().array() <= 0.0).any())
        throw SolverError("Dirichlet Laplacian is not positive definite");
}

PoissonSolution PoissonSolver::solve(const Eigen::VectorXd& f) const {
    if (f.size() != matrix_.rows())
        throw ConfigError("solve_poisson: rhs does not match operator size");

    Eigen::VectorXd u = w_inv_sqrt_.cwiseProduct(ldlt_.solve(w_sqrt_.cwiseProduct(f)));
    // one refinement step tightens the residual toward the evaluation floor
    Eigen::VectorXd r = f - matrix_ * u;
    u += w_inv_sqrt_.cwiseProduct(ldlt_.solve(w_sqrt_.cwiseProduct(r)));
    r = f - matrix_ * u;

    PoissonSolution sol;
    sol.u = std::move(u);
    sol.residual_inf = r.lpNorm<Eigen::Infinity>();
    return sol;
}

PoissonSolution solve_poisson(const PoissonSolver& solver, const Eigen::VectorXd& f) {
    return solver.solve(f);
}

CascadePair cascade_solve(const ProblemSpec& spec, const Grid& grid,
                          const PoissonSolver& solver, const Eigen::VectorXd& f) {
    const DerivedExponents d = derive_exponents(spec);
    const Eigen::ArrayXd r = grid.radii().array();

    Eigen::VectorXd g1(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        g1(i) = signed_power(f(i), spec.p);
    g1 = g1.cwiseProduct(r.pow(spec.b).matrix());
    PoissonSolution v = solver.solve(g1);

    Eigen::VectorXd g2(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        g2(i) = signed_power(v.u(i), d.p_conjugate);
    g2 = g2.cwiseProduct(r.pow(spec.a).matrix());
    PoissonSolution u = solver.solve(g2);

    CascadePair pair;
    pair.u = std::move(u.u);
    pair.v = std::move(v.u);
    pair.residual_u = u.residual_inf;
    pair.residual_v = v.residual_inf;
    return pair;
}

} // namespace hle
