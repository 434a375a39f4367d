#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>
#include <vector>

#include "hle/grid.hpp"
#include "hle/poisson.hpp"
#include "hle/problem.hpp"

namespace hle {

/// Outcome of one numerical certificate. Reports are reproducible from the
/// recorded parameters (they embed every input including seeds).
struct PropertyReport {
    std::string name;
    nlohmann::ordered_json parameters;
    nlohmann::ordered_json measured;
    bool pass = false;
    double margin = 0.0;

    nlohmann::ordered_json to_json() const;
};

/// mu(b, a, p')^p == mu(a, b, p)^{p'}: computes both principal eigenvalues on
/// the same grid (pencil when the exponent is 2, inverse iteration otherwise)
/// and reports the relative gap.
PropertyReport check_symmetry(int n, double a, double b, double p,
                              const DomainDescriptor& domain, int N,
                              double tol = 2e-2);

/// Positivity and discrete superharmonicity of a sign-normalized principal
/// eigenvector: min u_i > 0 and min (-Lap_h u)_i > 0.
PropertyReport check_positivity(const Eigen::VectorXd& u, const DiscreteOperator& op);

/// Dilation law of the quotient: Q(psi_k) = C k^{s+2p+b} for a bump supported
/// away from the origin. Fits log Q against log k and compares the slope with
/// s+2p+b; R^2 of the fit must reach r2_min. Throws ConfigError when the
/// dilated support covers fewer than 8 cells.
PropertyReport scaling_slope(int n, double s, double b, double p, int N,
                             const std::vector<int>& k_list, double slope_tol = 0.05,
                             double r2_min = 0.99);

/// Low-dimension second-order inequality with the explicit constant
/// c = [(p-1)((a+n)/p)^2]^p, plus the intermediate gradient inequality
/// (p-1) sum |grad u|^2 |u|^{p-2} <= sum |Lap u| |u|^{p-1}, over seeded random
/// test functions with Lap u = 0 near the origin.
PropertyReport check_low_dimension_inequality(int n, double a, double p, int sample_count,
                                         int N, unsigned seed);

/// Weighted Rellich quotient minimum over the radial class in the regime
/// s < n - 2p with b = -s-2p (threshold equality); reports the estimate at two
/// refinement levels, requiring both above `floor` and a coarse/fine ratio in
/// [0.5, 2].
PropertyReport estimate_rellich_constant(double s, double p, int n, int N,
                                         double floor_value = 1e-4);

/// Both formulations on the same data: the fourth-order weak residual and the
/// second-order system residuals at the recovered partner.
PropertyReport check_equivalence(const ProblemSpec& spec, const Grid& grid,
                                 const DiscreteOperator& op, double mu,
                                 const Eigen::VectorXd& u, double tol);

/// The four finite-energy norms at N and 2N; passes when each norm ratio stays
/// within [0.8, 1.25] under refinement.
PropertyReport finite_energy_report(const ProblemSpec& spec, int N);

/// Centered-difference gradient magnitude at cell centers, matching the
/// Laplacian's ghost conventions (odd reflection at Dirichlet walls, even at
/// the radial origin).
Eigen::VectorXd gradient_magnitude(const Grid& grid, const Eigen::VectorXd& u);

/// The explicit constant of the low-dimension inequality proof chain.
double low_dimension_inequality_constant(int n, double a, double p);

} // namespace hle
