#include "mixbgk/collision.hpp"

namespace mixbgk {

namespace detail {

CellMaxwellians cell_maxwellians(const MomentSet& mom, const MixtureParams& p,
                                 const VelocityGrid& grid, EquilibriumMode mode) {
    CellMaxwellians M;
    if (mode == EquilibriumMode::sampled) {
        M.M11 = maxwellian(mom.s1.n, mom.s1.U, mom.s1.T, p.m1, grid);
        M.M12 = maxwellian(mom.s1.n, mom.U12, mom.T12, p.m1, grid);
        M.M22 = maxwellian(mom.s2.n, mom.s2.U, mom.s2.T, p.m2, grid);
        M.M21 = maxwellian(mom.s2.n, mom.U21, mom.T21, p.m2, grid);
    } else {
        auto t = [](double n, const Vec3& U, double T, double m) {
            return targets_from(SpeciesMoments{n, U, T}, m);
        };
        M.M11 = discrete_maxwellian(t(mom.s1.n, mom.s1.U, mom.s1.T, p.m1), p.m1, grid);
        M.M12 = discrete_maxwellian(t(mom.s1.n, mom.U12, mom.T12, p.m1), p.m1, grid);
        M.M22 = discrete_maxwellian(t(mom.s2.n, mom.s2.U, mom.s2.T, p.m2), p.m2, grid);
        M.M21 = discrete_maxwellian(t(mom.s2.n, mom.U21, mom.T21, p.m2), p.m2, grid);
    }
    return M;
}

}  // namespace detail

DistributionPair bgk_rhs(const DistributionPair& F, const MixtureParams& p,
                         const PhaseGrid& grid, EquilibriumMode mode,
                         double rate_multiplier) {
    DistributionPair out = DistributionPair::zeros(grid, F.kind);
    const std::size_t nv = grid.velocity.size();
    for (int c = 0; c < grid.space.n_cells; ++c) {
        const auto F1 = F.f1.cell(c);
        const auto F2 = F.f2.cell(c);
        const auto s1 = compute_moments(F1, p.m1, grid.velocity);
        const auto s2 = compute_moments(F2, p.m2, grid.velocity);
        const MomentSet mom = mix_moments(s1, s2, p);
        const auto M = detail::cell_maxwellians(mom, p, grid.velocity, mode);

        const double nu1 = rate_multiplier * s1.n;
        const double nu2 = rate_multiplier * s2.n;
        auto r1 = out.f1.cell(c);
        auto r2 = out.f2.cell(c);
        for (std::size_t j = 0; j < nv; ++j) {
            r1[j] = nu1 * (M.M11[j] - F1[j]) + nu2 * (M.M12[j] - F1[j]);
            r2[j] = nu2 * (M.M22[j] - F2[j]) + nu1 * (M.M21[j] - F2[j]);
        }
    }
    return out;
}

ConservedTotals conserved_totals(const DistributionPair& F, const MixtureParams& p,
                                 const PhaseGrid& grid) {
    ConservedTotals t;
    const double dx = grid.space.cell_width();
    for (int c = 0; c < grid.space.n_cells; ++c) {
        const auto F1 = F.f1.cell(c);
        const auto F2 = F.f2.cell(c);
        for (std::size_t j = 0; j < grid.velocity.size(); ++j) {
            const double w = dx * grid.velocity.weights[j];
            const Vec3& v = grid.velocity.nodes[j];
            const double v2 = norm2(v);
            t.mass1 += w * F1[j];
            t.mass2 += w * F2[j];
            t.momentum += w * (p.m1 * F1[j] + p.m2 * F2[j]) * v;
            t.energy += w * (p.m1 * F1[j] + p.m2 * F2[j]) * v2;
        }
    }
    return t;
}

std::vector<ExchangeResiduals> exchange_diagnostics(const DistributionPair& F,
                                                    const MixtureParams& p,
                                                    const PhaseGrid& grid,
                                                    EquilibriumMode mode) {
    std::vector<ExchangeResiduals> out(grid.space.n_cells);
    for (int c = 0; c < grid.space.n_cells; ++c) {
        const auto F1 = F.f1.cell(c);
        const auto F2 = F.f2.cell(c);
        const auto s1 = compute_moments(F1, p.m1, grid.velocity);
        const auto s2 = compute_moments(F2, p.m2, grid.velocity);
        const MomentSet mom = mix_moments(s1, s2, p);
        const auto M = detail::cell_maxwellians(mom, p, grid.velocity, mode);

        ExchangeResiduals r;
        // The inter-species relaxation terms carry the opposite species'
        // density as collision frequency (n2 on species 1 and vice versa),
        // exactly as they enter the evolution equations; with these weights
        // the momentum and energy sums cancel.
        for (std::size_t j = 0; j < grid.velocity.size(); ++j) {
            const double w = grid.velocity.weights[j];
            const Vec3& v = grid.velocity.nodes[j];
            const double d12 = M.M12[j] - F1[j];
            const double d21 = M.M21[j] - F2[j];
            r.mass12 += w * d12;
            r.mass21 += w * d21;
            r.momentum_sum += w * (s2.n * p.m1 * d12 + s1.n * p.m2 * d21) * v;
            r.energy_sum += w * (s2.n * p.m1 * d12 + s1.n * p.m2 * d21) * norm2(v);
        }
        out[c] = r;
    }
    return out;
}

}  // namespace mixbgk
