#include "mixbgk/grid.hpp"

#include <cmath>
#include <string>

#include "mixbgk/errors.hpp"

namespace mixbgk {

std::size_t VelocityGrid::opposite_index(std::size_t j) const {
    const std::size_t n = std::size_t(n_per_axis);
    const std::size_t iz = j % n;
    const std::size_t iy = (j / n) % n;
    const std::size_t ix = j / (n * n);
    return ((n - 1 - ix) * n + (n - 1 - iy)) * n + (n - 1 - iz);
}

VelocityGrid make_velocity_grid(double v_max, int n_per_axis) {
    if (v_max <= 0.0) {
        throw invalid_input("make_velocity_grid: v_max must be positive, got " +
                            std::to_string(v_max));
    }
    if (n_per_axis < 2 || n_per_axis % 2 != 0) {
        throw invalid_input(
            "make_velocity_grid: n_per_axis must be even and >= 2 (midpoint nodes "
            "must pair under v -> -v), got " + std::to_string(n_per_axis));
    }

    VelocityGrid g;
    g.v_max = v_max;
    g.n_per_axis = n_per_axis;
    g.h = 2.0 * v_max / n_per_axis;

    const int n = n_per_axis;
    std::vector<double> axis(n);
    for (int i = 0; i < n; ++i) axis[i] = g.axis_coord(i);

    g.nodes.reserve(std::size_t(n) * n * n);
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) g.nodes.push_back({axis[ix], axis[iy], axis[iz]});

    g.weights.assign(g.nodes.size(), g.h * g.h * g.h);
    return g;
}

double default_v_max(double m2) { return 8.0 / std::sqrt(m2); }

int default_n_per_axis(double mass_ratio, bool for_verify) {
    const int base = for_verify ? 24 : 16;
    int n = int(std::ceil(base * std::sqrt(std::max(mass_ratio, 1.0))));
    if (n % 2 != 0) ++n;
    return n;
}

SpatialGrid SpatialGrid::homogeneous(double length) {
    SpatialGrid s;
    s.n_cells = 1;
    s.length = length;
    s.dim = 0;
    return s;
}

SpatialGrid SpatialGrid::periodic_line(int n_cells, double length) {
    if (n_cells < 1 || length <= 0.0) {
        throw invalid_input("SpatialGrid: need n_cells >= 1 and length > 0");
    }
    SpatialGrid s;
    s.n_cells = n_cells;
    s.length = length;
    s.dim = 1;
    return s;
}

DistributionPair DistributionPair::zeros(const PhaseGrid& grid, PairKind kind) {
    return {GridFunction(grid), GridFunction(grid), kind};
}

double inner_product_v(std::span<const double> g, std::span<const double> h,
                       const VelocityGrid& grid) {
    if (g.size() != grid.size() || h.size() != grid.size()) {
        throw invalid_input("inner_product_v: array size does not match velocity grid");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) acc += grid.weights[j] * g[j] * h[j];
    return acc;
}

double inner_product_xv(const DistributionPair& a, const DistributionPair& b,
                        const PhaseGrid& grid) {
    const std::size_t nv = grid.velocity.size();
    if (a.f1.size() != grid.size() || a.f2.size() != grid.size() ||
        b.f1.size() != grid.size() || b.f2.size() != grid.size()) {
        throw invalid_input("inner_product_xv: pair does not live on the given grid");
    }
    const double dx = grid.space.cell_width();
    double acc = 0.0;
    for (int c = 0; c < grid.space.n_cells; ++c) {
        auto a1 = a.f1.cell(c), a2 = a.f2.cell(c);
        auto b1 = b.f1.cell(c), b2 = b.f2.cell(c);
        double cell_acc = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            cell_acc += grid.velocity.weights[j] * (a1[j] * b1[j] + a2[j] * b2[j]);
        }
        acc += dx * cell_acc;
    }
    return acc;
}

}  // namespace mixbgk
