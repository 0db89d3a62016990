#include <doctest.h>

#include <cmath>
#include <random>

#include "mixbgk/errors.hpp"
#include "mixbgk/grid.hpp"
#include "mixbgk/linear.hpp"
#include "mixbgk/mixture.hpp"
#include "oracles.hpp"

using namespace mixbgk;

TEST_CASE("make_velocity_grid: direct construction at v_max=1, n=2") {
    const VelocityGrid g = make_velocity_grid(1.0, 2);
    REQUIRE(g.size() == 8);
    for (const auto& v : g.nodes) {
        CHECK(std::abs(v.x) == 0.5);
        CHECK(std::abs(v.y) == 0.5);
        CHECK(std::abs(v.z) == 0.5);
    }
    for (double w : g.weights) CHECK(w == 1.0);
}

TEST_CASE("make_velocity_grid: rejects odd n and bad v_max") {
    CHECK_THROWS_AS(make_velocity_grid(1.0, 5), invalid_input);
    CHECK_THROWS_AS(make_velocity_grid(1.0, 0), invalid_input);
    CHECK_THROWS_AS(make_velocity_grid(-2.0, 8), invalid_input);
}

TEST_CASE("velocity grid: node set equals its own negation, weights sum to cube volume") {
    for (int n : {2, 8, 10}) {
        const VelocityGrid g = make_velocity_grid(3.0, n);
        double wsum = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const std::size_t k = g.opposite_index(j);
            CHECK(g.nodes[k].x == -g.nodes[j].x);
            CHECK(g.nodes[k].y == -g.nodes[j].y);
            CHECK(g.nodes[k].z == -g.nodes[j].z);
            CHECK(g.weights[k] == g.weights[j]);
            CHECK(g.weights[j] > 0.0);
            wsum += g.weights[j];
        }
        CHECK(wsum == doctest::Approx(std::pow(2.0 * 3.0, 3)).epsilon(1e-13));
    }
}

TEST_CASE("inner_product_v: zero, cube volume, size mismatch") {
    const VelocityGrid g = make_velocity_grid(4.0, 16);
    std::vector<double> zero(g.size(), 0.0), one(g.size(), 1.0);
    CHECK(inner_product_v(zero, zero, g) == 0.0);
    CHECK(inner_product_v(one, one, g) == doctest::Approx(512.0).epsilon(1e-13));
    std::vector<double> bad(3, 1.0);
    CHECK_THROWS_AS(inner_product_v(bad, one, g), invalid_input);
}

TEST_CASE("inner_product_v: sampled sqrt(mu) against Gauss-Legendre oracle") {
    const VelocityGrid g = make_velocity_grid(6.0, 24);
    const auto mu = maxwellian(1.0, Vec3{}, 1.0, 1.0, g);
    std::vector<double> root(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) root[j] = std::sqrt(mu[j]);

    const double got = inner_product_v(root, root, g);
    const double want = oracles::integrate_box(
        [](const Vec3& v) { return oracles::maxwellian_value(1.0, {}, 1.0, 1.0, v); }, 6.0);
    // Oracle (cube-truncated mass) computed to ~1e-15: 1 - 5.92e-9. The
    // midpoint sum differs from the cube integral by the Euler-Maclaurin
    // boundary term ~ h^2 g'(6)/8 per axis, about 2e-9 here.
    CHECK(want == doctest::Approx(1.0 - 5.9195e-9).epsilon(1e-12));
    CHECK(std::abs(got - want) < 5e-9);
    CHECK(std::abs(got - 1.0) < 1e-8);
}

TEST_CASE("make_velocity_grid: Gaussian tail check at v_max=6, n=24") {
    const VelocityGrid g = make_velocity_grid(6.0, 24);
    const auto mu = maxwellian(1.0, Vec3{}, 1.0, 1.0, g);
    double mass = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) mass += g.weights[j] * mu[j];
    CHECK(std::abs(mass - 1.0) < 1e-7);
}

TEST_CASE("inner_product_v: symmetric and bilinear on random arrays") {
    const VelocityGrid g = make_velocity_grid(2.0, 4);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::vector<double> a(g.size()), b(g.size()), c(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        a[j] = gauss(rng);
        b[j] = gauss(rng);
        c[j] = gauss(rng);
    }
    const double ab = inner_product_v(a, b, g);
    CHECK(inner_product_v(b, a, g) == doctest::Approx(ab).epsilon(1e-14));
    std::vector<double> lin(g.size());
    const double alpha = 1.7, beta = -0.3;
    for (std::size_t j = 0; j < g.size(); ++j) lin[j] = alpha * a[j] + beta * b[j];
    CHECK(inner_product_v(lin, c, g) ==
          doctest::Approx(alpha * inner_product_v(a, c, g) + beta * inner_product_v(b, c, g))
              .epsilon(1e-12));
}

TEST_CASE("quadrature error of the sampled Maxwellian decreases as n doubles") {
    // Discretization error dominates until n = 16, where the Gaussian-tail
    // truncation floor of the 6-sigma box (5.9e-9) takes over.
    double prev = 1e300;
    for (int n : {4, 8, 16}) {
        const VelocityGrid g = make_velocity_grid(6.0, n);
        const auto mu = maxwellian(1.0, Vec3{}, 1.0, 1.0, g);
        double mass = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) mass += g.weights[j] * mu[j];
        const double err = std::abs(mass - 1.0);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-7);
}

TEST_CASE("odd moments of radial samples vanish by +-v symmetry") {
    const VelocityGrid g = make_velocity_grid(6.0, 16);
    for (double m : {1.0, 2.5}) {
        const auto mu = maxwellian(1.3, Vec3{}, 0.9, m, g);
        for (int d = 0; d < 3; ++d) {
            double acc = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                acc += g.weights[j] * g.nodes[j][d] * mu[j];
            }
            CHECK(std::abs(acc) < 1e-12);
        }
    }
}

TEST_CASE("inner_product_xv: zero pair and grid mismatch") {
    const PhaseGrid grid{SpatialGrid::homogeneous(), make_velocity_grid(4.0, 8)};
    const auto z = DistributionPair::zeros(grid, PairKind::perturbation);
    CHECK(inner_product_xv(z, z, grid) == 0.0);

    const PhaseGrid other{SpatialGrid::periodic_line(4, 1.0), make_velocity_grid(4.0, 8)};
    const auto w = DistributionPair::zeros(other, PairKind::perturbation);
    CHECK_THROWS_AS(inner_product_xv(z, w, other), invalid_input);
}

TEST_CASE("inner_product_xv: mixture basis orthonormality on the raw sampled basis") {
    MixtureParams p;
    p.m1 = 1.8;
    p.m2 = 1.0;
    p.n10 = 1.4;
    p.n20 = 0.7;
    const PhaseGrid grid{
        SpatialGrid::homogeneous(),
        make_velocity_grid(default_v_max(p.m2), default_n_per_axis(p.mass_ratio(), true))};
    const LinearOps L = LinearOps::build(p, grid, BasisMode::sampled);

    DistributionPair Ei = DistributionPair::zeros(grid, PairKind::perturbation);
    DistributionPair Ej = DistributionPair::zeros(grid, PairKind::perturbation);
    for (int i = 1; i <= 6; ++i) {
        for (int j = 1; j <= 6; ++j) {
            const auto& B = L.mixture_basis();
            std::copy(B.comp1(i).begin(), B.comp1(i).end(), Ei.f1.cell(0).begin());
            std::copy(B.comp2(i).begin(), B.comp2(i).end(), Ei.f2.cell(0).begin());
            std::copy(B.comp1(j).begin(), B.comp1(j).end(), Ej.f1.cell(0).begin());
            std::copy(B.comp2(j).begin(), B.comp2(j).end(), Ej.f2.cell(0).begin());
            const double want = i == j ? 1.0 : 0.0;
            CHECK(std::abs(inner_product_xv(Ei, Ej, grid) - want) < 1e-8);
        }
    }
}

TEST_CASE("inner_product_xv: (sqrt(mu1), sqrt(mu2)) pair integrates to n10 + n20") {
    MixtureParams p;
    p.n10 = 1.25;
    p.n20 = 0.75;
    const PhaseGrid grid{SpatialGrid::periodic_line(8, 1.0),
                         make_velocity_grid(default_v_max(p.m2), 24)};
    DistributionPair s = DistributionPair::zeros(grid, PairKind::perturbation);
    const auto mu1 = maxwellian(p.n10, Vec3{}, 1.0, p.m1, grid.velocity);
    const auto mu2 = maxwellian(p.n20, Vec3{}, 1.0, p.m2, grid.velocity);
    for (int c = 0; c < grid.space.n_cells; ++c) {
        auto s1 = s.f1.cell(c), s2 = s.f2.cell(c);
        for (std::size_t j = 0; j < grid.velocity.size(); ++j) {
            s1[j] = std::sqrt(mu1[j]);
            s2[j] = std::sqrt(mu2[j]);
        }
    }
    CHECK(std::abs(inner_product_xv(s, s, grid) - (p.n10 + p.n20)) < 1e-8);
}

TEST_CASE("spatial grid: dim 0 forces a single cell, cell width positive") {
    const SpatialGrid h = SpatialGrid::homogeneous(2.0);
    CHECK(h.n_cells == 1);
    CHECK(h.cell_width() == 2.0);
    const SpatialGrid line = SpatialGrid::periodic_line(10, 1.0);
    CHECK(line.cell_width() == doctest::Approx(0.1));
    CHECK_THROWS_AS(SpatialGrid::periodic_line(0, 1.0), invalid_input);
}
