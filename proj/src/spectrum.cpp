#include "hle/spectrum.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "hle/errors.hpp"

namespace hle {

void sign_normalize(Eigen::VectorXd& u) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double m = std::abs(u(i));
        if (m > best) {
            best = m;
            imax = i;
        }
    }
    if (u(imax) < 0.0) u = -u;
}

GeneralizedPencil assemble_pencil(const ProblemSpec& spec, const Grid& grid,
                                  const DiscreteOperator& op,
                                  const PencilOptions& options) {
    if (spec.p != 2.0)
        throw ConfigError("assemble_pencil requires p = 2 (use the nonlinear solver otherwise)");

    const AdmissibilityReport report = validate(spec);
    const double threshold_margin = spec.a + spec.b + 4.0; // s + b + 2p at p = 2
    if (!report.admissible) {
        const bool only_threshold_blocks =
            spec.a > -spec.n && spec.b > -spec.n && threshold_margin > -1e-12;
        if (!(options.allow_threshold_equality && only_threshold_blocks))
            throw InadmissibleError("inadmissible parameters: " + report.summary());
    }
    if (!options.allow_threshold_equality && threshold_margin <= 1e-6) {
        std::ostringstream os;
        os << "parameters too close to the admissibility threshold: a+b+4 = "
           << threshold_margin
           << " <= 1e-6; the pencil degenerates there (principal eigenvalue -> 0)";
        throw InadmissibleError(os.str());
    }

    GeneralizedPencil pencil;
    pencil.a = spec.a;
    pencil.b = spec.b;
    pencil.mass_diag = grid.weight_vector(spec.b);

    // K = M^T M with M = diag(omega |x|^{-a})^{1/2} A: symmetric by construction.
    const Eigen::VectorXd half = grid.weight_vector(-spec.a).array().sqrt();
    const Eigen::SparseMatrix<double> scaled = half.asDiagonal() * op.matrix;
    pencil.stiffness = Eigen::SparseMatrix<double>(scaled.transpose()) * scaled;
    pencil.stiffness.makeCompressed();
    return pencil;
}

namespace {

// Inverse of the pencil operator through the Poisson factorization:
// T f = A^{-1}(|x|^a . A^{-1}(|x|^b . f)); eigenpairs of (K, B) are fixed
// points with mu = 1/||T u||.
Eigen::VectorXd apply_inverse(const GeneralizedPencil& pencil, const Grid& grid,
                              const PoissonSolver& solver, const Eigen::VectorXd& f) {
    const Eigen::ArrayXd r = grid.radii().array();
    Eigen::VectorXd stage = solver.solve(r.pow(pencil.b).matrix().cwiseProduct(f)).u;
    stage = r.pow(pencil.a).matrix().cwiseProduct(stage);
    return solver.solve(stage).u;
}

double rayleigh_p2(const GeneralizedPencil& pencil, const Grid& grid,
                   const PoissonSolver& solver, const Eigen::VectorXd& u) {
    const Eigen::VectorXd au = solver.op_matrix() * u;
    const double num = grid.weight_vector(-pencil.a).cwiseProduct(au).dot(au);
    const double den = pencil.mass_diag.cwiseProduct(u).dot(u);
    return num / den;
}

double b_dot(const GeneralizedPencil& pencil, const Eigen::VectorXd& x,
             const Eigen::VectorXd& y) {
    return pencil.mass_diag.cwiseProduct(x).dot(y);
}

// Deflated inverse-iteration polish; prior columns of `basis` are converged
// B-orthonormal eigenvectors the iterate is kept orthogonal to.
void refine_pair(const GeneralizedPencil& pencil, const Grid& grid,
                 const PoissonSolver& solver, const Eigen::MatrixXd& basis, int k,
                 Eigen::VectorXd& u, int steps) {
    for (int step = 0; step < steps; ++step) {
        Eigen::VectorXd z = apply_inverse(pencil, grid, solver, u);
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < k; ++j)
                z -= b_dot(pencil, basis.col(j), z) * basis.col(j);
        z /= std::sqrt(b_dot(pencil, z, z));
        if (b_dot(pencil, z, u) < 0.0) z = -z;
        const double incr = std::sqrt(b_dot(pencil, z - u, z - u));
        u = z;
        if (incr < 1e-13) break;
    }
}

} // namespace

SpectrumResult compute_spectrum(const GeneralizedPencil& pencil, const Grid& grid,
                                const PoissonSolver& solver, int count,
                                const SpectrumOptions& options) {
    const int size = static_cast<int>(pencil.stiffness.rows());
    if (count < 1 || count > size)
        throw ConfigError("compute_spectrum: eigenvalue count out of range");

    const Eigen::VectorXd b_inv_sqrt = pencil.mass_diag.array().rsqrt();
    Eigen::MatrixXd vectors(size, count);

    if (size <= options.dense_threshold) {
        Eigen::MatrixXd dense =
            b_inv_sqrt.asDiagonal() * Eigen::MatrixXd(pencil.stiffness) *
            b_inv_sqrt.asDiagonal();
        dense = 0.5 * (dense + dense.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
        if (eig.info() != Eigen::Success)
            throw SolverError("dense symmetric eigensolver failed");
        for (int k = 0; k < count; ++k)
            vectors.col(k) = b_inv_sqrt.cwiseProduct(eig.eigenvectors().col(k));
    } else {
        // B-orthogonal subspace iteration on the inverse operator.
        const int m = std::min(size, count + std::max(8, count));
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        Eigen::MatrixXd X(size, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < size; ++i) X(i, j) = unif(rng);

        Eigen::VectorXd ritz = Eigen::VectorXd::Zero(m);
        bool converged = false;
        int iter = 0;
        for (; iter < options.subspace_max_iter && !converged; ++iter) {
            Eigen::MatrixXd Y(size, m);
            for (int j = 0; j < m; ++j)
                Y.col(j) = apply_inverse(pencil, grid, solver, X.col(j));
            // B-orthonormalize (two Gram-Schmidt passes)
            for (int pass = 0; pass < 2; ++pass) {
                for (int j = 0; j < m; ++j) {
                    for (int i = 0; i < j; ++i)
                        Y.col(j) -= b_dot(pencil, Y.col(i), Y.col(j)) * Y.col(i);
                    Y.col(j) /= std::sqrt(b_dot(pencil, Y.col(j), Y.col(j)));
                }
            }
            Eigen::MatrixXd projected(m, m);
            Eigen::MatrixXd KY = pencil.stiffness * Y;
            projected = Y.transpose() * KY;
            projected = 0.5 * (projected + projected.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
            X = Y * small.eigenvectors();

            // Ritz-value stagnation: a residual test would sit below the
            // floating-point floor eps*||K|| of the fourth-order stiffness.
            converged = iter >= 2;
            for (int k = 0; k < count && converged; ++k)
                converged = std::abs(small.eigenvalues()(k) - ritz(k)) <=
                            options.subspace_tol * small.eigenvalues()(k);
            ritz = small.eigenvalues();
        }
        if (!converged) {
            std::ostringstream os;
            os << "subspace iteration did not converge in " << iter << " iterations";
            throw SolverError(os.str());
        }
        vectors = X.leftCols(count);
    }

    // Polish leading pairs through the shared factorization; dense QR alone
    // leaves ~eps*mu_max absolute error, short of the 1e-8 mu_k residual bound.
    SpectrumResult result;
    result.eigenvalues.resize(count);
    result.eigenvectors.resize(size, count);
    result.partners.resize(size, count);
    result.residuals.resize(count);
    result.radial_class = grid.radial_class();

    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd u = vectors.col(k);
        u /= std::sqrt(b_dot(pencil, u, u));
        refine_pair(pencil, grid, solver, result.eigenvectors, k, u, options.refine_steps);
        sign_normalize(u);
        u /= std::sqrt(b_dot(pencil, u, u)); // sign flip does not change the norm
        result.eigenvectors.col(k) = u;
        result.eigenvalues(k) = rayleigh_p2(pencil, grid, solver, u);
    }

    // refinement can reorder near-degenerate pairs; restore ascending order
    for (int k = 1; k < count; ++k) {
        if (result.eigenvalues(k) < result.eigenvalues(k - 1)) {
            std::swap(result.eigenvalues(k), result.eigenvalues(k - 1));
            result.eigenvectors.col(k).swap(result.eigenvectors.col(k - 1));
        }
    }

    const Eigen::ArrayXd r_pow = grid.radii().array().pow(-pencil.a);
    for (int k = 0; k < count; ++k) {
        const Eigen::VectorXd& u = result.eigenvectors.col(k);
        const Eigen::VectorXd au = solver.op_matrix() * u;
        result.partners.col(k) = r_pow.matrix().cwiseProduct(au);
        const Eigen::VectorXd resid =
            pencil.stiffness * u -
            result.eigenvalues(k) * pencil.mass_diag.cwiseProduct(u);
        result.residuals(k) =
            resid.norm() /
            (result.eigenvalues(k) * pencil.mass_diag.cwiseProduct(u).norm());
    }
    result.gap = count >= 2 ? result.eigenvalues(1) - result.eigenvalues(0) : 0.0;
    return result;
}

Eigen::VectorXd recover_pair(const Eigen::VectorXd& u, const Grid& grid, double a,
                             const DiscreteOperator& op) {
    const Eigen::VectorXd au = op.matrix * u;
    return grid.radii().array().pow(-a).matrix().cwiseProduct(au);
}

SystemResiduals system_residuals(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const EigenvalueSplit& split, const ProblemSpec& spec,
                                 const Grid& grid, const DiscreteOperator& op) {
    if (std::abs(split.lambda1 * split.lambda2 - split.mu) >
        1e-10 * std::max(1.0, split.mu))
        throw ConfigError("system_residuals: split violates lambda1*lambda2 = mu (p = 2)");

    const Eigen::ArrayXd r = grid.radii().array();
    const Eigen::VectorXd v_tilde = v / split.lambda1;

    const Eigen::VectorXd lhs1 = op.matrix * u;
    const Eigen::VectorXd rhs1 =
        split.lambda1 * r.pow(spec.a).matrix().cwiseProduct(v_tilde);
    const Eigen::VectorXd lhs2 = op.matrix * v_tilde;
    const Eigen::VectorXd rhs2 =
        split.lambda2 * r.pow(spec.b).matrix().cwiseProduct(u);

    auto rel = [](const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
        const double scale = std::max(lhs.lpNorm<Eigen::Infinity>(),
                                      rhs.lpNorm<Eigen::Infinity>());
        if (scale == 0.0) return 0.0;
        return (lhs - rhs).lpNorm<Eigen::Infinity>() / scale;
    };

    return {rel(lhs1, rhs1), rel(lhs2, rhs2)};
}

} // namespace hle
