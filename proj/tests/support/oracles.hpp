#pragma once

// Test-side oracles, independent of the library's quadrature and operator
// paths: tensorized Gauss-Legendre integration, analytic Gaussian moments,
// Gram-Schmidt residuals, and log-log order fits.

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "mixbgk/vec3.hpp"

namespace oracles {

struct Quadrature1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
inline Quadrature1D gauss_legendre(int n, double a, double b) {
    Quadrature1D q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
        q.nodes[i] = mid - half * x;
        q.nodes[n - 1 - i] = mid + half * x;
        q.weights[i] = q.weights[n - 1 - i] = 2.0 * half / ((1.0 - x * x) * pp * pp);
    }
    return q;
}

/// Tensorized integral of f over the cube [-v_max, v_max]^3. The default
/// point count is sized for Gaussians as narrow as one eighth of the box.
inline double integrate_box(const std::function<double(const mixbgk::Vec3&)>& f, double v_max,
                            int n_per_axis = 96) {
    const Quadrature1D q = gauss_legendre(n_per_axis, -v_max, v_max);
    double acc = 0.0;
    for (int i = 0; i < n_per_axis; ++i)
        for (int j = 0; j < n_per_axis; ++j)
            for (int k = 0; k < n_per_axis; ++k) {
                acc += q.weights[i] * q.weights[j] * q.weights[k] *
                       f({q.nodes[i], q.nodes[j], q.nodes[k]});
            }
    return acc;
}

inline double maxwellian_value(double n, const mixbgk::Vec3& U, double T, double m,
                               const mixbgk::Vec3& v) {
    const double a = m / (2.0 * T);
    return n * std::pow(m / (2.0 * std::numbers::pi * T), 1.5) *
           std::exp(-a * norm2(v - U));
}

/// Exact full-space moments of the Maxwellian: mass n, momentum nU,
/// m|v|^2-weighted energy 3nT + m n |U|^2.
struct GaussianMoments {
    double mass;
    mixbgk::Vec3 momentum;
    double energy;
};

inline GaussianMoments analytic_moments(double n, const mixbgk::Vec3& U, double T, double m) {
    return {n, n * U, 3.0 * n * T + m * n * norm2(U)};
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
