#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "hle/grid.hpp"
#include "hle/problem.hpp"

namespace hle {

struct PoissonSolution {
    Eigen::VectorXd u;
    double residual_inf = 0.0; // max-norm of A u - f
};

/// Solution pair of the two-step cascade: -Lap v = |x|^b |f|^{p-2} f followed
/// by -Lap u = |x|^a |v|^{p'-2} v, with the algebraic residual of each solve.
struct CascadePair {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double residual_u = 0.0;
    double residual_v = 0.0;
};

/// |t|^{q-2} t with the continuous extension 0 at t = 0 (any q > 1).
inline double signed_power(double t, double q) {
    if (t == 0.0) return 0.0;
    const double mag = std::pow(std::abs(t), q - 1.0);
    return t > 0.0 ? mag : -mag;
}

/// Direct solver for the discrete Dirichlet Poisson problem. Factorizes the
/// weight-symmetrized operator once (sparse LDLT); the factorization is
/// immutable and solves are reentrant.
class PoissonSolver {
  public:
    PoissonSolver(const DiscreteOperator& op, const Grid& grid);

    /// Solves A u = f with one step of iterative refinement. Deterministic for
    /// fixed inputs. Throws SolverError if the factorization failed.
    PoissonSolution solve(const Eigen::VectorXd& f) const;

    const Eigen::SparseMatrix<double>& op_matrix() const { return matrix_; }

  private:
    Eigen::SparseMatrix<double> matrix_;      // -Lap_h
    Eigen::SparseMatrix<double> symmetrized_; // W^{1/2} A W^{-1/2}
    Eigen::VectorXd w_sqrt_;
    Eigen::VectorXd w_inv_sqrt_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

PoissonSolution solve_poisson(const PoissonSolver& solver, const Eigen::VectorXd& f);

/// Two-step cascade of Poisson solves through the pointwise weighted
/// nonlinearities. 1-homogeneous in f.
CascadePair cascade_solve(const ProblemSpec& spec, const Grid& grid,
                          const PoissonSolver& solver, const Eigen::VectorXd& f);

} // namespace hle
