#pragma once

#include <vector>

#include "mixbgk/grid.hpp"
#include "mixbgk/mixture.hpp"

namespace mixbgk {

/// Discrete versions of the conserved integrals: per-species mass, total
/// momentum sum int (m1 F1 + m2 F2) v, and total energy int (m1 F1 + m2 F2) |v|^2.
struct ConservedTotals {
    double mass1 = 0.0;
    double mass2 = 0.0;
    Vec3 momentum;
    double energy = 0.0;
};

/// Full nonlinear BGK right-hand side:
///   ( n1 (M11 - F1) + n2 (M12 - F1),  n2 (M22 - F2) + n1 (M21 - F2) )
/// with per-cell moments, the delta/omega/gamma mixing rules, and the four
/// Maxwellians realized per `mode`. rate_multiplier scales both collision
/// frequencies uniformly (default 1: frequencies are exactly n_i).
DistributionPair bgk_rhs(const DistributionPair& F, const MixtureParams& p,
                         const PhaseGrid& grid, EquilibriumMode mode,
                         double rate_multiplier = 1.0);

ConservedTotals conserved_totals(const DistributionPair& F, const MixtureParams& p,
                                 const PhaseGrid& grid);

/// Residuals of the inter-species cancellation identities at one cell:
///   int (M12 - F1) dv,  int (M21 - F2) dv,
///   int n2 (M12 - F1) m1 v dv + int n1 (M21 - F2) m2 v dv,
///   int n2 (M12 - F1) m1 |v|^2 dv + int n1 (M21 - F2) m2 |v|^2 dv,
/// with each exchange term weighted by the collision frequency it carries
/// in the evolution equations.
struct ExchangeResiduals {
    double mass12 = 0.0;
    double mass21 = 0.0;
    Vec3 momentum_sum;
    double energy_sum = 0.0;
};

std::vector<ExchangeResiduals> exchange_diagnostics(const DistributionPair& F,
                                                    const MixtureParams& p,
                                                    const PhaseGrid& grid,
                                                    EquilibriumMode mode);

namespace detail {
/// The four per-cell relaxation Maxwellians for a given moment set.
struct CellMaxwellians {
    std::vector<double> M11, M12, M22, M21;
};
CellMaxwellians cell_maxwellians(const MomentSet& mom, const MixtureParams& p,
                                 const VelocityGrid& grid, EquilibriumMode mode);
}  // namespace detail

}  // namespace mixbgk
