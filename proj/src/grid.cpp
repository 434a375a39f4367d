#include "hle/grid.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include "hle/errors.hpp"

namespace hle {

double unit_sphere_area(int n) {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    const double nd = static_cast<double>(n);
    return 2.0 * std::pow(M_PI, 0.5 * nd) / std::tgamma(0.5 * nd);
}

namespace {

std::uint64_t key_bits(double t) {
    std::uint64_t k;
    std::memcpy(&k, &t, sizeof(k));
    return k;
}

} // namespace

Grid build_grid(const DomainDescriptor& domain, int n, int N) {
    if (N < 8) throw ConfigError("grid too coarse: need at least 8 cells per axis");

    Grid g;
    g.kind_ = domain.kind;
    g.cells_ = N;
    g.extent_x_ = domain.extent_x;
    g.extent_y_ = domain.extent_y;
    if (!(domain.extent_x > 0.0) || !(domain.extent_y > 0.0))
        throw ConfigError("domain extents must be positive");

    switch (domain.kind) {
        case DomainKind::interval: {
            if (n != 1) throw ConfigError("interval domain requires n = 1");
            if (N % 2 != 0)
                throw ConfigError("interval grids need an even cell count (origin node otherwise)");
            g.dim_ = 1;
            const double R = domain.extent_x;
            const double h = 2.0 * R / N;
            g.spacing_ = Eigen::VectorXd::Constant(1, h);
            g.coords_.resize(N, 1);
            g.radii_.resize(N);
            g.quad_weights_ = Eigen::VectorXd::Constant(N, h);
            for (int i = 0; i < N; ++i) {
                const double x = -R + (i + 0.5) * h;
                g.coords_(i, 0) = x;
                g.radii_(i) = std::abs(x);
            }
            g.domain_measure_ = 2.0 * R;
            break;
        }
        case DomainKind::ball: {
            if (n < 2) throw ConfigError("ball domain requires n >= 2");
            g.dim_ = n;
            const double R = domain.extent_x;
            const double h = R / N;
            const double area = unit_sphere_area(n);
            g.spacing_ = Eigen::VectorXd::Constant(1, h);
            g.coords_.resize(N, 1);
            g.radii_.resize(N);
            g.quad_weights_.resize(N);
            for (int i = 0; i < N; ++i) {
                const double r = (i + 0.5) * h;
                const double r_lo = i * h;
                const double r_hi = (i + 1) * h;
                g.coords_(i, 0) = r;
                g.radii_(i) = r;
                // exact shell volume keeps W*A symmetric with the flux form
                g.quad_weights_(i) =
                    area * (std::pow(r_hi, n) - std::pow(r_lo, n)) / n;
            }
            g.domain_measure_ = area * std::pow(R, n) / n;
            break;
        }
        case DomainKind::rectangle: {
            if (n != 2) throw ConfigError("rectangle domain requires n = 2");
            if (N % 2 != 0)
                throw ConfigError("rectangle grids need an even cell count per axis");
            g.dim_ = 2;
            const double Lx = domain.extent_x;
            const double Ly = domain.extent_y;
            const double hx = 2.0 * Lx / N;
            const double hy = 2.0 * Ly / N;
            g.spacing_.resize(2);
            g.spacing_ << hx, hy;
            const int count = N * N;
            g.coords_.resize(count, 2);
            g.radii_.resize(count);
            g.quad_weights_ = Eigen::VectorXd::Constant(count, hx * hy);
            for (int iy = 0; iy < N; ++iy) {
                const double y = -Ly + (iy + 0.5) * hy;
                for (int ix = 0; ix < N; ++ix) {
                    const double x = -Lx + (ix + 0.5) * hx;
                    const int idx = g.rect_index(ix, iy);
                    g.coords_(idx, 0) = x;
                    g.coords_(idx, 1) = y;
                    g.radii_(idx) = std::hypot(x, y);
                }
            }
            g.domain_measure_ = 4.0 * Lx * Ly;
            break;
        }
    }
    return g;
}

const Eigen::VectorXd& Grid::weight_vector(double t) const {
    const std::uint64_t key = key_bits(t);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return *it->second;

    // Plain midpoint sampling omega_i |x_i|^t throughout. The pointwise form
    // is what cancels exactly against the collocated nonlinearities, keeping
    // the pencil, the cascade and the recovered pairs one and the same
    // discrete eigenproblem; near the origin it costs O(h^{n+t}) quadrature
    // error for singular t, which the convergence tolerances account for.
    auto vec = std::make_unique<Eigen::VectorXd>(
        quad_weights_.cwiseProduct(radii_.array().pow(t).matrix()));
    return *cache_->entries.emplace(key, std::move(vec)).first->second;
}

double Grid::weighted_norm(double t, const Eigen::VectorXd& values, double power) const {
    if (!(power >= 1.0)) throw ConfigError("weighted_norm: power must be >= 1");
    if (values.size() != radii_.size())
        throw ConfigError("weighted_norm: value vector does not match grid");
    const Eigen::VectorXd& w = weight_vector(t);
    const double sum = (w.array() * values.array().abs().pow(power)).sum();
    return std::pow(sum, 1.0 / power);
}

DiscreteOperator assemble_laplacian(const Grid& grid) {
    const int count = grid.node_count();
    std::vector<Eigen::Triplet<double>> trip;

    switch (grid.kind()) {
        case DomainKind::interval: {
            const double h = grid.spacing()(0);
            const double c = 1.0 / (h * h);
            const int N = grid.cells_per_axis();
            trip.reserve(3 * N);
            for (int i = 0; i < N; ++i) {
                double diag = 2.0 * c;
                if (i > 0) trip.emplace_back(i, i - 1, -c);
                else diag += c; // half-cell Dirichlet closure at the wall
                if (i < N - 1) trip.emplace_back(i, i + 1, -c);
                else diag += c;
                trip.emplace_back(i, i, diag);
            }
            break;
        }
        case DomainKind::ball: {
            const int N = grid.cells_per_axis();
            const int n = grid.dim();
            const double h = grid.spacing()(0);
            trip.reserve(3 * N);
            for (int i = 0; i < N; ++i) {
                const double r_lo = i * h;
                const double r_hi = (i + 1) * h;
                const double vol = (std::pow(r_hi, n) - std::pow(r_lo, n)) / n;
                // face transmissibilities r^{n-1}/dist; inner face at r=0 has
                // zero area, which encodes the zero-flux regularity condition
                const double t_lo = std::pow(r_lo, n - 1) / h;
                const double t_hi = i < N - 1 ? std::pow(r_hi, n - 1) / h
                                              : std::pow(r_hi, n - 1) / (0.5 * h);
                double diag = 0.0;
                if (i > 0) {
                    trip.emplace_back(i, i - 1, -t_lo / vol);
                    diag += t_lo / vol;
                }
                if (i < N - 1) trip.emplace_back(i, i + 1, -t_hi / vol);
                diag += t_hi / vol;
                trip.emplace_back(i, i, diag);
            }
            break;
        }
        case DomainKind::rectangle: {
            const int N = grid.cells_per_axis();
            const double hx = grid.spacing()(0);
            const double hy = grid.spacing()(1);
            const double cx = 1.0 / (hx * hx);
            const double cy = 1.0 / (hy * hy);
            trip.reserve(5 * count);
            for (int iy = 0; iy < N; ++iy) {
                for (int ix = 0; ix < N; ++ix) {
                    const int idx = grid.rect_index(ix, iy);
                    double diag = 2.0 * cx + 2.0 * cy;
                    if (ix > 0) trip.emplace_back(idx, grid.rect_index(ix - 1, iy), -cx);
                    else diag += cx;
                    if (ix < N - 1) trip.emplace_back(idx, grid.rect_index(ix + 1, iy), -cx);
                    else diag += cx;
                    if (iy > 0) trip.emplace_back(idx, grid.rect_index(ix, iy - 1), -cy);
                    else diag += cy;
                    if (iy < N - 1) trip.emplace_back(idx, grid.rect_index(ix, iy + 1), -cy);
                    else diag += cy;
                    trip.emplace_back(idx, idx, diag);
                }
            }
            break;
        }
    }

    DiscreteOperator op;
    op.matrix.resize(count, count);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

} // namespace hle
