#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixbgk/grid.hpp"
#include "mixbgk/vec3.hpp"

namespace mixbgk {

/// Two-species mixture parameters. m1 >= m2 by convention; delta and omega
/// are the momentum and temperature interchange rates, gamma the velocity-
/// difference heating coefficient. Admissibility (validate_params) encodes
/// the positivity constraints on the inter-species temperatures:
///   (m1/m2 - 1)/(1 + m1/m2) <= delta < 1,   0 <= omega < 1,
///   0 <= gamma <= (m1/3)(1 - delta)[(1 + m1/m2) delta + 1 - m1/m2].
struct MixtureParams {
    double m1 = 1.0;
    double m2 = 1.0;
    double n10 = 1.0;
    double n20 = 1.0;
    double delta = 0.5;
    double omega = 0.5;
    double gamma = 0.0;

    double mass_ratio() const { return m1 / m2; }
    double delta_lower_bound() const { return (mass_ratio() - 1.0) / (1.0 + mass_ratio()); }
    double gamma_upper_bound() const {
        return (m1 / 3.0) * (1.0 - delta) * ((1.0 + mass_ratio()) * delta + 1.0 - mass_ratio());
    }
};

struct ParamCheck {
    bool admissible = true;
    std::vector<std::string> violations;
};

/// Returns the verdict and one message per violated constraint.
/// `allow_unit_rates` widens delta < 1 and omega < 1 to closed bounds;
/// the unit endpoints are meaningful only for kernel-structure studies.
ParamCheck validate_params(const MixtureParams& p, bool allow_unit_rates = false);

struct SpeciesMoments {
    double n = 0.0;
    Vec3 U;
    double T = 0.0;
};

/// Per-species moments plus the delta/omega/gamma-mixed inter-species
/// bulk velocities and temperatures.
struct MomentSet {
    SpeciesMoments s1, s2;
    Vec3 U12, U21;
    double T12 = 0.0, T21 = 0.0;
};

/// n = sum w F; U = (1/n) sum w F v; T = (1/3n) sum w F m |v - U|^2.
/// Throws degenerate_cell_error for nonpositive mass or temperature.
SpeciesMoments compute_moments(std::span<const double> F, double mass,
                               const VelocityGrid& grid);

/// U12 = delta U1 + (1-delta) U2;
/// U21 = (m1/m2)(1-delta) U1 + (1 - (m1/m2)(1-delta)) U2.
std::pair<Vec3, Vec3> mix_velocities(const Vec3& U1, const Vec3& U2, const MixtureParams& p);

/// T12 = omega T1 + (1-omega) T2 + gamma |U2-U1|^2;
/// T21 = (1-omega) T1 + omega T2
///       + ((1/3) m1 (1-delta)((m1/m2)(delta-1) + 1 + delta) - gamma) |U2-U1|^2.
std::pair<double, double> mix_temperatures(const SpeciesMoments& mom1,
                                           const SpeciesMoments& mom2,
                                           const MixtureParams& p);

namespace detail {
/// t21_gamma_sign is a fault-injection seam for the verification suite:
/// +1 is the model, -1 flips the sign of gamma in the T21 assembly only.
std::pair<double, double> mix_temperatures_signed(const SpeciesMoments& mom1,
                                                  const SpeciesMoments& mom2,
                                                  const MixtureParams& p,
                                                  double t21_gamma_sign);
}  // namespace detail

/// Assembles the full MomentSet from two per-species moment triples.
MomentSet mix_moments(const SpeciesMoments& s1, const SpeciesMoments& s2,
                      const MixtureParams& p);

/// Samples n (m/(2 pi T))^{3/2} exp(-m|v-U|^2 / (2T)) at every node.
/// Strictly positive; throws invalid_input for nonpositive n or T.
std::vector<double> maxwellian(double n, const Vec3& U, double T, double mass,
                               const VelocityGrid& grid);

/// Discrete moment targets: sum w G, sum w G v, sum w G m|v|^2.
struct MomentTargets {
    double n = 0.0;
    Vec3 momentum;   // n U
    double energy = 0.0;  // 3 n T + m n |U|^2
};

MomentTargets targets_from(const SpeciesMoments& mom, double mass);

/// Exponential-of-quadratic grid function exp(alpha + beta.v + g |v|^2)
/// whose *discrete* moments match the targets to 1e-12 relative (damped
/// Newton on the 5 parameters, warm-started from the continuous
/// Maxwellian). Restores exact conservation on the lattice.
/// Throws infeasible_target_error when no such function exists on this grid
/// (nonpositive mass or internal energy, or Newton non-convergence).
std::vector<double> discrete_maxwellian(const MomentTargets& targets, double mass,
                                        const VelocityGrid& grid);

/// Selects how relaxation targets are realized on the lattice: `sampled`
/// evaluates the continuous Maxwellian formulas at the nodes;
/// `moment_matched` uses discrete_maxwellian so the cancellation and
/// conservation identities hold to near machine precision.
enum class EquilibriumMode { sampled, moment_matched };

/// The global equilibria mu_k = n_k0 (m_k / 2 pi)^{3/2} exp(-m_k |v|^2 / 2),
/// sampled at every cell (spatially constant).
DistributionPair global_equilibria(const MixtureParams& p, const PhaseGrid& grid);

}  // namespace mixbgk
