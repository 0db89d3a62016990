#include "mixbgk/mixture.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mixbgk/errors.hpp"

namespace mixbgk {

ParamCheck validate_params(const MixtureParams& p, bool allow_unit_rates) {
    ParamCheck out;
    auto fail = [&out](const std::string& msg) {
        out.admissible = false;
        out.violations.push_back(msg);
    };
    const double hi = allow_unit_rates ? 1.0 + 1e-15 : 1.0;

    std::ostringstream os;
    if (!(p.m2 > 0.0) || !(p.m1 >= p.m2)) {
        os << "masses must satisfy m1 >= m2 > 0 (got m1=" << p.m1 << ", m2=" << p.m2 << ")";
        fail(os.str());
        return out;  // remaining bounds are meaningless without valid masses
    }
    if (!(p.n10 > 0.0)) fail("reference density n10 must be positive");
    if (!(p.n20 > 0.0)) fail("reference density n20 must be positive");

    const double dlo = p.delta_lower_bound();
    if (!(p.delta >= dlo && p.delta < hi)) {
        os.str("");
        os << "delta violates (m1/m2 - 1)/(1 + m1/m2) <= delta < 1: requires delta in ["
           << dlo << ", 1), got " << p.delta;
        fail(os.str());
    }
    if (!(p.omega >= 0.0 && p.omega < hi)) {
        os.str("");
        os << "omega violates 0 <= omega < 1, got " << p.omega;
        fail(os.str());
    }
    // gamma's upper bound only makes sense once delta is in range.
    if (p.delta >= dlo && p.delta < hi) {
        const double gub = p.gamma_upper_bound();
        if (!(p.gamma >= 0.0 && p.gamma <= gub)) {
            os.str("");
            os << "gamma violates 0 <= gamma <= (m1/3)(1-delta)[(1+m1/m2)delta + 1 - m1/m2]"
               << " = " << gub << ", got " << p.gamma;
            fail(os.str());
        }
    }
    return out;
}

SpeciesMoments compute_moments(std::span<const double> F, double mass,
                               const VelocityGrid& grid) {
    if (F.size() != grid.size()) {
        throw invalid_input("compute_moments: array size does not match velocity grid");
    }
    double n = 0.0;
    Vec3 flux;
    for (std::size_t j = 0; j < F.size(); ++j) {
        const double wf = grid.weights[j] * F[j];
        n += wf;
        flux += wf * grid.nodes[j];
    }
    if (!(n > 0.0)) {
        throw degenerate_cell_error("compute_moments: nonpositive mass " + std::to_string(n));
    }
    const Vec3 U = flux / n;
    double q = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j) {
        q += grid.weights[j] * F[j] * norm2(grid.nodes[j] - U);
    }
    const double T = mass * q / (3.0 * n);
    if (!(T > 0.0)) {
        throw degenerate_cell_error("compute_moments: nonpositive temperature " +
                                    std::to_string(T));
    }
    return {n, U, T};
}

std::pair<Vec3, Vec3> mix_velocities(const Vec3& U1, const Vec3& U2, const MixtureParams& p) {
    const double r = p.mass_ratio() * (1.0 - p.delta);
    const Vec3 U12 = p.delta * U1 + (1.0 - p.delta) * U2;
    const Vec3 U21 = r * U1 + (1.0 - r) * U2;
    return {U12, U21};
}

namespace detail {
std::pair<double, double> mix_temperatures_signed(const SpeciesMoments& mom1,
                                                  const SpeciesMoments& mom2,
                                                  const MixtureParams& p,
                                                  double t21_gamma_sign) {
    const double du2 = norm2(mom2.U - mom1.U);
    const double T12 = p.omega * mom1.T + (1.0 - p.omega) * mom2.T + p.gamma * du2;
    const double kappa =
        (p.m1 / 3.0) * (1.0 - p.delta) * (p.mass_ratio() * (p.delta - 1.0) + 1.0 + p.delta);
    const double T21 = (1.0 - p.omega) * mom1.T + p.omega * mom2.T +
                       (kappa - t21_gamma_sign * p.gamma) * du2;
    return {T12, T21};
}
}  // namespace detail

std::pair<double, double> mix_temperatures(const SpeciesMoments& mom1,
                                           const SpeciesMoments& mom2,
                                           const MixtureParams& p) {
    return detail::mix_temperatures_signed(mom1, mom2, p, +1.0);
}

MomentSet mix_moments(const SpeciesMoments& s1, const SpeciesMoments& s2,
                      const MixtureParams& p) {
    MomentSet m;
    m.s1 = s1;
    m.s2 = s2;
    std::tie(m.U12, m.U21) = mix_velocities(s1.U, s2.U, p);
    std::tie(m.T12, m.T21) = mix_temperatures(s1, s2, p);
    return m;
}

std::vector<double> maxwellian(double n, const Vec3& U, double T, double mass,
                               const VelocityGrid& grid) {
    if (!(n > 0.0) || !(T > 0.0)) {
        throw invalid_input("maxwellian: need n > 0 and T > 0");
    }
    const double a = mass / (2.0 * T);
    const double pref = n * std::pow(mass / (2.0 * std::numbers::pi * T), 1.5);
    std::vector<double> out(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out[j] = pref * std::exp(-a * norm2(grid.nodes[j] - U));
    }
    return out;
}

MomentTargets targets_from(const SpeciesMoments& mom, double mass) {
    MomentTargets t;
    t.n = mom.n;
    t.momentum = mom.n * mom.U;
    t.energy = 3.0 * mom.n * mom.T + mass * mom.n * norm2(mom.U);
    return t;
}

namespace {

struct ExpParams {
    double alpha;
    Vec3 beta;
    double g;  // |v|^2 coefficient, must stay negative
};

void sample_exp(const ExpParams& q, const VelocityGrid& grid, std::vector<double>& out) {
    out.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Vec3& v = grid.nodes[j];
        out[j] = std::exp(q.alpha + dot(q.beta, v) + q.g * norm2(v));
    }
}

/// Discrete moments (mass, momentum, m|v|^2-energy) of a sampled function.
void raw_moments(std::span<const double> G, double mass, const VelocityGrid& grid,
                 double& n, Vec3& P, double& E) {
    n = 0.0;
    P = Vec3{};
    E = 0.0;
    for (std::size_t j = 0; j < G.size(); ++j) {
        const double wg = grid.weights[j] * G[j];
        n += wg;
        P += wg * grid.nodes[j];
        E += wg * mass * norm2(grid.nodes[j]);
    }
}

}  // namespace

std::vector<double> discrete_maxwellian(const MomentTargets& targets, double mass,
                                        const VelocityGrid& grid) {
    if (!(targets.n > 0.0)) {
        throw infeasible_target_error("discrete_maxwellian: nonpositive mass target");
    }
    const Vec3 U = targets.momentum / targets.n;
    const double T = (targets.energy / targets.n - mass * norm2(U)) / 3.0;
    if (!(T > 0.0)) {
        throw infeasible_target_error(
            "discrete_maxwellian: targets have nonpositive internal energy");
    }

    // Warm start from the continuous Maxwellian parameters.
    ExpParams q;
    q.g = -mass / (2.0 * T);
    q.beta = (mass / T) * U;
    q.alpha = std::log(targets.n * std::pow(mass / (2.0 * std::numbers::pi * T), 1.5)) -
              mass * norm2(U) / (2.0 * T);

    const double mom_scale = std::sqrt(targets.n * targets.energy / mass);
    auto rel_residual = [&](double n, const Vec3& P, double E, Eigen::Matrix<double, 5, 1>& r) {
        r(0) = n - targets.n;
        r(1) = P.x - targets.momentum.x;
        r(2) = P.y - targets.momentum.y;
        r(3) = P.z - targets.momentum.z;
        r(4) = E - targets.energy;
        return std::max({std::abs(r(0)) / targets.n,
                         std::abs(r(1)) / mom_scale,
                         std::abs(r(2)) / mom_scale,
                         std::abs(r(3)) / mom_scale,
                         std::abs(r(4)) / targets.energy});
    };

    constexpr double tol = 1e-12;
    constexpr int max_iter = 100;

    std::vector<double> G;
    sample_exp(q, grid, G);
    double n, E;
    Vec3 P;
    raw_moments(G, mass, grid, n, P, E);
    Eigen::Matrix<double, 5, 1> r;
    double res = rel_residual(n, P, E, r);

    for (int iter = 0; iter < max_iter; ++iter) {
        if (res < tol) {
            if (!(q.g < 0.0)) {
                throw infeasible_target_error(
                    "discrete_maxwellian: converged with non-decaying exponent");
            }
            return G;
        }
        // J_{ab} = sum_j w_j G_j phi_a(v_j) psi_b(v_j) with observables
        // phi = (1, v, m|v|^2) and exponent basis psi = (1, v, |v|^2).
        Eigen::Matrix<double, 5, 5> J = Eigen::Matrix<double, 5, 5>::Zero();
        for (std::size_t j = 0; j < G.size(); ++j) {
            const Vec3& v = grid.nodes[j];
            const double v2 = norm2(v);
            const double wg = grid.weights[j] * G[j];
            const double phi[5] = {1.0, v.x, v.y, v.z, mass * v2};
            const double psi[5] = {1.0, v.x, v.y, v.z, v2};
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) J(a, b) += wg * phi[a] * psi[b];
        }
        Eigen::Matrix<double, 5, 1> dq = J.fullPivLu().solve(-r);

        // Damped step: halve until the residual stops increasing.
        double lambda = 1.0;
        ExpParams q_next = q;
        double res_next = res;
        std::vector<double> G_next;
        for (int halv = 0; halv < 40; ++halv) {
            q_next.alpha = q.alpha + lambda * dq(0);
            q_next.beta = q.beta + lambda * Vec3{dq(1), dq(2), dq(3)};
            q_next.g = q.g + lambda * dq(4);
            sample_exp(q_next, grid, G_next);
            raw_moments(G_next, mass, grid, n, P, E);
            Eigen::Matrix<double, 5, 1> r_next;
            res_next = rel_residual(n, P, E, r_next);
            if (std::isfinite(res_next) && res_next < res) {
                r = r_next;
                break;
            }
            lambda *= 0.5;
        }
        if (!(res_next < res)) {
            throw infeasible_target_error(
                "discrete_maxwellian: damped Newton stalled at relative residual " +
                std::to_string(res));
        }
        q = q_next;
        G.swap(G_next);
        res = res_next;
    }
    throw infeasible_target_error(
        "discrete_maxwellian: no convergence in 100 iterations (relative residual " +
        std::to_string(res) + ")");
}

DistributionPair global_equilibria(const MixtureParams& p, const PhaseGrid& grid) {
    DistributionPair out = DistributionPair::zeros(grid, PairKind::absolute);
    const auto mu1 = maxwellian(p.n10, Vec3{}, 1.0, p.m1, grid.velocity);
    const auto mu2 = maxwellian(p.n20, Vec3{}, 1.0, p.m2, grid.velocity);
    for (int c = 0; c < grid.space.n_cells; ++c) {
        std::copy(mu1.begin(), mu1.end(), out.f1.cell(c).begin());
        std::copy(mu2.begin(), mu2.end(), out.f2.cell(c).begin());
    }
    return out;
}

}  // namespace mixbgk
