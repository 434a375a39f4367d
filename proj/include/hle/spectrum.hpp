#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hle/grid.hpp"
#include "hle/poisson.hpp"
#include "hle/problem.hpp"

namespace hle {

/// Symmetric-definite pencil (K, B) for the p = 2 fourth-order problem:
/// K = A^T diag(omega |x|^{-a}) A (structurally symmetric triple product),
/// B = diag(omega |x|^b).
struct GeneralizedPencil {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd mass_diag;
    double a = 0.0;
    double b = 0.0;
};

struct PencilOptions {
    /// Permits the threshold equality case a+b+4 = 0 (verifier override); by
    /// default specs with margin <= 1e-6 are rejected as numerically singular.
    bool allow_threshold_equality = false;
};

GeneralizedPencil assemble_pencil(const ProblemSpec& spec, const Grid& grid,
                                  const DiscreteOperator& op,
                                  const PencilOptions& options = {});

struct SpectrumResult {
    Eigen::VectorXd eigenvalues;  // ascending, all positive
    Eigen::MatrixXd eigenvectors; // columns, B-orthonormal, sign-normalized
    Eigen::MatrixXd partners;     // recovered v_k = |x|^{-a} (A u_k)
    Eigen::VectorXd residuals;    // ||K u - mu B u||_2 / (mu ||B u||_2)
    double gap = 0.0;             // mu_2 - mu_1 (0 if a single pair requested)
    bool radial_class = false;    // ball grids cover the radial class only
};

struct SpectrumOptions {
    int dense_threshold = 4000; // dense symmetric solve up to this size
    int refine_steps = 6;       // inverse-iteration polish of leading pairs
    int subspace_max_iter = 400;
    double subspace_tol = 1e-10;
    unsigned seed = 0x5eed;     // deterministic start for the sparse path
};

/// Solves K u = mu B u for the lowest `count` pairs: dense symmetric reduction
/// B^{-1/2} K B^{-1/2} at desk scale, B-orthogonal subspace iteration above.
/// Leading pairs are polished by inverse iteration through the shared Poisson
/// factorization so residuals reach <= 1e-8 mu_k.
SpectrumResult compute_spectrum(const GeneralizedPencil& pencil, const Grid& grid,
                                const PoissonSolver& solver, int count,
                                const SpectrumOptions& options = {});

/// Partner field of the fourth-order eigenfunction: v = |x|^{-a} (-Lap_h u).
Eigen::VectorXd recover_pair(const Eigen::VectorXd& u, const Grid& grid, double a,
                             const DiscreteOperator& op);

struct SystemResiduals {
    double first = 0.0;  // ||-Lap u - lambda1 |x|^a v~||_inf / scale
    double second = 0.0; // ||-Lap v~ - lambda2 |x|^b u||_inf / scale
};

/// Residuals of the second-order system at the rescaled partner v~ = v/lambda1
/// (p = 2 splitting lambda1 lambda2 = mu).
SystemResiduals system_residuals(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const EigenvalueSplit& split, const ProblemSpec& spec,
                                 const Grid& grid, const DiscreteOperator& op);

/// Flips the sign so the largest-modulus entry is positive (first index wins
/// ties); the deterministic orientation used for every eigenvector output.
void sign_normalize(Eigen::VectorXd& u);

} // namespace hle
