#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixbgk/vec3.hpp"

namespace mixbgk {

/// Truncated 3-D velocity lattice on [-v_max, v_max]^3.
///
/// Midpoint rule on a uniform tensor lattice: per-axis coordinates
/// -v_max + (i + 1/2) h with h = 2 v_max / n_per_axis, so no node sits at
/// v = 0 and the node set is exactly its own negation. All weights are h^3.
struct VelocityGrid {
    double v_max = 0.0;
    int n_per_axis = 0;
    double h = 0.0;                 // lattice spacing
    std::vector<Vec3> nodes;        // lexicographic in (ix, iy, iz)
    std::vector<double> weights;    // all equal to h^3

    std::size_t size() const { return nodes.size(); }

    /// Signed offset from the origin so that axis_coord(n-1-i) is the exact
    /// floating-point negation of axis_coord(i).
    double axis_coord(int i) const { return (i - 0.5 * n_per_axis + 0.5) * h; }

    /// Index of -v for node j (per-axis flip; exact by construction).
    std::size_t opposite_index(std::size_t j) const;
};

/// Throws invalid_input for odd n_per_axis (breaks the +-v pairing) or
/// nonpositive v_max. n_per_axis >= 8 is the intended working range;
/// smaller even values are accepted for direct construction checks.
VelocityGrid make_velocity_grid(double v_max, int n_per_axis);

/// Default velocity cutoff: 8 standard deviations of the lighter species
/// (variance T/m with T = 1), wide enough that Gaussian-tail truncation
/// stays below the verification tolerances.
double default_v_max(double m2);

/// Default per-axis resolution. The cutoff is sized by the lighter species
/// but the lattice spacing must resolve the heavier (narrower) one, so the
/// base counts (16 for simulation, 24 for verification) scale with
/// sqrt(m1/m2), rounded up to even.
int default_n_per_axis(double mass_ratio, bool for_verify);

/// Periodic spatial lattice (a torus circle), or a single cell when dim = 0
/// (spatially homogeneous; transport disabled).
struct SpatialGrid {
    int n_cells = 1;
    double length = 1.0;
    int dim = 0;  // 0 or 1

    double cell_width() const { return length / n_cells; }

    static SpatialGrid homogeneous(double length = 1.0);
    static SpatialGrid periodic_line(int n_cells, double length);

    /// Center of cell c.
    double cell_center(int c) const { return (c + 0.5) * cell_width(); }
};

struct PhaseGrid {
    SpatialGrid space;
    VelocityGrid velocity;

    std::size_t size() const { return std::size_t(space.n_cells) * velocity.size(); }
};

/// A scalar field on a PhaseGrid, stored cell-major:
/// values[cell * nodes_per_cell + velocity_node].
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(int n_cells, std::size_t nodes_per_cell)
        : n_cells_(n_cells), nv_(nodes_per_cell),
          values_(std::size_t(n_cells) * nodes_per_cell, 0.0) {}
    explicit GridFunction(const PhaseGrid& grid)
        : GridFunction(grid.space.n_cells, grid.velocity.size()) {}

    int n_cells() const { return n_cells_; }
    std::size_t nodes_per_cell() const { return nv_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> cell(int c) { return {values_.data() + std::size_t(c) * nv_, nv_}; }
    std::span<const double> cell(int c) const {
        return {values_.data() + std::size_t(c) * nv_, nv_};
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    int n_cells_ = 0;
    std::size_t nv_ = 0;
    std::vector<double> values_;
};

enum class PairKind { absolute, perturbation };

/// The pair (F1, F2) of gridded distributions, or (f1, f2) of perturbations.
struct DistributionPair {
    GridFunction f1;
    GridFunction f2;
    PairKind kind = PairKind::absolute;

    static DistributionPair zeros(const PhaseGrid& grid, PairKind kind);
};

/// Discrete L^2_v inner product at one spatial cell: sum_j w_j g_j h_j.
/// Bilinear and symmetric; throws invalid_input on size mismatch.
double inner_product_v(std::span<const double> g, std::span<const double> h,
                       const VelocityGrid& grid);

/// Discrete L^2_{x,v} inner product of two pairs: cell-width-weighted sum
/// over cells of the two per-species velocity inner products added together.
double inner_product_xv(const DistributionPair& a, const DistributionPair& b,
                        const PhaseGrid& grid);

inline double norm2_xv(const DistributionPair& a, const PhaseGrid& grid) {
    return inner_product_xv(a, a, grid);
}

}  // namespace mixbgk
