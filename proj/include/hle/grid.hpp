#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "hle/problem.hpp"

namespace hle {

/// Cell-centered structured grid for one of the three domain variants.
/// No node ever coincides with the origin, so the singular weights |x|^t are
/// finite at every node for any real t. Immutable after construction except
/// for the internal weight-vector cache, which is mutex-protected.
class Grid {
  public:
    DomainKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int cells_per_axis() const { return cells_; }
    int node_count() const { return static_cast<int>(radii_.size()); }

    /// Mesh spacing; (h) for interval/ball, (hx, hy) for rectangle.
    const Eigen::VectorXd& spacing() const { return spacing_; }

    /// Node coordinates, node_count x dim (radial grids store the radius).
    const Eigen::MatrixXd& coords() const { return coords_; }

    /// Distances |x_i| to the origin, all strictly positive.
    const Eigen::VectorXd& radii() const { return radii_; }

    /// Per-node quadrature weights (units length^n); sums to the domain measure.
    const Eigen::VectorXd& quad_weights() const { return quad_weights_; }

    double domain_measure() const { return domain_measure_; }
    double domain_extent_x() const { return extent_x_; }
    double domain_extent_y() const { return extent_y_; }

    /// True for the ball variant: spectra computed on this grid cover the
    /// radial symmetry class only.
    bool radial_class() const { return kind_ == DomainKind::ball; }

    /// Cached weighted quadrature vector (omega_i |x_i|^t)_i.
    const Eigen::VectorXd& weight_vector(double t) const;

    /// (sum_i omega_i |x_i|^t |values_i|^power)^(1/power), power >= 1.
    double weighted_norm(double t, const Eigen::VectorXd& values, double power) const;

    /// Rectangle node index helpers (row-major: ix + iy * N).
    int rect_index(int ix, int iy) const { return ix + iy * cells_; }

    friend Grid build_grid(const DomainDescriptor& domain, int n, int N);

  private:
    DomainKind kind_ = DomainKind::interval;
    int dim_ = 1;
    int cells_ = 0;
    double extent_x_ = 1.0;
    double extent_y_ = 1.0;
    double domain_measure_ = 0.0;
    Eigen::VectorXd spacing_;
    Eigen::MatrixXd coords_;
    Eigen::VectorXd radii_;
    Eigen::VectorXd quad_weights_;

    struct WeightCache {
        std::mutex mutex;
        std::unordered_map<std::uint64_t, std::unique_ptr<Eigen::VectorXd>> entries;
    };
    std::unique_ptr<WeightCache> cache_ = std::make_unique<WeightCache>();
};

/// Builds the cell-centered grid: interval and rectangle require an even
/// number of cells per axis (a cell center would otherwise land on the
/// origin); N < 8 or a domain/dimension mismatch is a configuration error.
Grid build_grid(const DomainDescriptor& domain, int n, int N);

/// Surface area of the unit sphere S^{n-1}.
double unit_sphere_area(int n);

/// Sparse realization of -Laplace with zero Dirichlet data on the grid
/// boundary. The matrix is symmetrizable by the quadrature weights:
/// diag(omega) * matrix is symmetric.
struct DiscreteOperator {
    Eigen::SparseMatrix<double> matrix;
    std::string tag = "dirichlet_laplacian";
    bool weight_symmetric = true;
};

/// Assembles -Laplace_h: 3-point/5-point stencils for interval/rectangle with
/// half-cell Dirichlet closure, flux-form radial operator for the ball with a
/// zero-flux origin face (radial regularity) and Dirichlet at r = R.
DiscreteOperator assemble_laplacian(const Grid& grid);

} // namespace hle
