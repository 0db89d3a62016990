#pragma once

#include <array>
#include <string>
#include <vector>

#include "mixbgk/collision.hpp"
#include "mixbgk/grid.hpp"
#include "mixbgk/mixture.hpp"

namespace mixbgk {

/// How the moment bases are realized on the lattice.
///
/// `sampled` evaluates the continuous formulas at the nodes and leaves them
/// as-is; the discrete Gram matrix then deviates from the identity by the
/// quadrature error, which is reported instead of hidden. `orthonormalized`
/// applies modified Gram-Schmidt in the discrete inner product, which makes
/// the projections exactly orthogonal so the dissipation inequality and the
/// linearized conservation laws hold to machine precision on any grid.
enum class BasisMode { sampled, orthonormalized };

/// Per-species orthonormal moment basis e_{k1}..e_{k5}: collision invariants
/// 1, v, |v|^2 weighted by sqrt(mu_k) and normalized.
class SpeciesBasis {
public:
    static SpeciesBasis build(int species, const MixtureParams& p, const VelocityGrid& grid,
                              BasisMode mode);

    /// Basis array e_{k,i}, i in 1..5.
    std::span<const double> e(int i) const { return e_.at(i - 1); }
    int species() const { return species_; }
    BasisMode mode() const { return mode_; }

    /// max |<e_i, e_j> - delta_ij| of the raw sampled basis (before any
    /// re-orthonormalization); honest measure of the grid's quadrature error.
    double raw_gram_defect() const { return raw_gram_defect_; }

private:
    std::array<std::vector<double>, 5> e_;
    int species_ = 0;
    BasisMode mode_ = BasisMode::sampled;
    double raw_gram_defect_ = 0.0;
};

/// The 6-dimensional mixture basis E_1..E_6 (two densities, joint momentum,
/// joint energy), assembled as exact linear combinations of the species
/// bases so orthonormality is inherited from them.
class MixtureBasis {
public:
    static MixtureBasis build(const SpeciesBasis& b1, const SpeciesBasis& b2,
                              const MixtureParams& p, const VelocityGrid& grid);

    std::span<const double> comp1(int i) const { return comp1_.at(i - 1); }
    std::span<const double> comp2(int i) const { return comp2_.at(i - 1); }

    /// max |<E_i, E_j> - delta_ij| under the discrete inner product.
    double gram_defect(const VelocityGrid& grid) const;

private:
    std::array<std::vector<double>, 6> comp1_;
    std::array<std::vector<double>, 6> comp2_;
};

/// Labeled parts of the linearized operator; each part is a pair with the
/// inactive species component zero. Parts sum to apply_L's output.
struct LParts {
    DistributionPair L11, L12_1, L12_2, L22, L21_1, L21_2;
};

struct DissipationCheck {
    double lhs = 0.0;     // <L f, f>_{L^2_{x,v}}
    double rhs = 0.0;     // -(n10+n20)(max{d,w} ||micro||^2 + min{1-d,1-w} ||(I-P)f||^2)
    double margin = 0.0;  // rhs - lhs; the inequality is margin >= 0 up to roundoff
    double micro_lhs = 0.0, micro_rhs = 0.0;        // partial estimate (equality)
    double exchange_lhs = 0.0, exchange_rhs = 0.0;  // partial estimate (inequality)
    double norm2_f = 0.0;
};

/// Macroscopic coefficients of the micro-macro decomposition, per cell:
/// P(f1,f2) = a1 (sqrt(mu1),0) + a2 (0,sqrt(mu2))
///            + b . v (m1 sqrt(mu1), m2 sqrt(mu2)) + c |v|^2 (m1 sqrt(mu1), m2 sqrt(mu2)).
struct MacroCoefficients {
    std::vector<double> a1, a2, c;
    std::vector<Vec3> b;
};

/// Immutable bundle of parameters, grid, sampled equilibria and moment
/// bases; hosts every linearized-operator operation. Safe to share across
/// threads once built.
class LinearOps {
public:
    static LinearOps build(const MixtureParams& p, const PhaseGrid& grid,
                           BasisMode mode = BasisMode::orthonormalized);

    const MixtureParams& params() const { return p_; }
    const PhaseGrid& grid() const { return grid_; }
    const SpeciesBasis& basis1() const { return b1_; }
    const SpeciesBasis& basis2() const { return b2_; }
    const MixtureBasis& mixture_basis() const { return E_; }
    std::span<const double> mu1() const { return mu1_; }
    std::span<const double> mu2() const { return mu2_; }
    std::span<const double> sqrt_mu1() const { return sqrt_mu1_; }
    std::span<const double> sqrt_mu2() const { return sqrt_mu2_; }

    /// f_k = (F_k - mu_k) / sqrt(mu_k) nodewise.
    DistributionPair perturbation_split(const DistributionPair& F) const;
    /// F_k = mu_k + sqrt(mu_k) f_k; exact inverse of perturbation_split.
    DistributionPair reconstruct(const DistributionPair& f) const;

    /// P_k f at one cell (5-term basis expansion).
    void project_species_cell(int species, std::span<const double> f,
                              std::span<double> out) const;
    /// (P1 f1, P2 f2) on the whole grid.
    DistributionPair project_species(const DistributionPair& f) const;
    /// Mixture projection P(f1,f2) = sum_i <(f1,f2), E_i> E_i per cell.
    DistributionPair project_mixture(const DistributionPair& f) const;

    MacroCoefficients macro_coefficients(const DistributionPair& f) const;
    /// Rebuilds the pair from (a1, a2, b, c); equals project_mixture up to
    /// the grid's quadrature defect.
    DistributionPair reconstruct_macro(const MacroCoefficients& mc) const;

    /// L(f1,f2) = (L11 f1 + L12(f1,f2), L22 f2 + L21(f1,f2)).
    /// Accepts delta, omega in [0,1] (the closed endpoints are used for
    /// kernel-structure studies only).
    DistributionPair apply_L(const DistributionPair& f) const;
    LParts apply_L_parts(const DistributionPair& f) const;

    DissipationCheck dissipation_check(const DistributionPair& f) const;

    /// Nonlinear remainder Gamma(f) = [bgk_rhs of the reconstructed F,
    /// divided by sqrt(mu_k)] - L f. Throws invalid_input when the
    /// reconstructed F has negative values.
    DistributionPair nonlinear_remainder(const DistributionPair& f,
                                         EquilibriumMode mode = EquilibriumMode::moment_matched,
                                         double rate_multiplier = 1.0) const;

private:
    MixtureParams p_;
    PhaseGrid grid_;
    SpeciesBasis b1_, b2_;
    MixtureBasis E_;
    std::vector<double> mu1_, mu2_, sqrt_mu1_, sqrt_mu2_;
};

struct KernelReport {
    int dimension = 0;
    int trial_dim = 0;
    double threshold = 0.0;  // absolute cut: tol * largest singular value
    std::vector<double> singular_values;
};

/// Counts the kernel of L over a reduced trial space: the 10-dimensional
/// per-species moment span plus `n_complement` random directions
/// orthogonalized against it (L acts as -(n10+n20) I there, so rank defects
/// are confined to the moment span). delta, omega in [0,1] allowed.
KernelReport kernel_dimension(const MixtureParams& p, const VelocityGrid& grid,
                              double tol = 1e-6, int n_complement = 20,
                              unsigned seed = 0x9e3779b9u);

struct DerivativeResidual {
    std::string name;
    double max_rel_error = 0.0;
};

/// Central-difference verification of the ten closed-form derivatives of
/// the inter-species Maxwellians with respect to the transitioned
/// macroscopic fields, evaluated at the global equilibrium point.
std::vector<DerivativeResidual> verify_mix_derivatives(const MixtureParams& p,
                                                       const VelocityGrid& grid,
                                                       double step = 1e-5);

struct JacobianCheck {
    double inverse_residual = 0.0;  // max |J J^{-1} - I|
    double fd_residual = 0.0;       // max |J_fd - J|
};

/// Closed-form Jacobian of (n, U, T) -> (n, nU, G) with
/// G = (3nT + m n |U|^2 - 3n)/sqrt(6), against its closed-form inverse and
/// a central-difference Jacobian.
JacobianCheck verify_jacobian(double n, const Vec3& U, double T, double m,
                              double step = 1e-5);

struct TaylorOrderReport {
    std::vector<double> eps;
    std::vector<double> r12_norm, r21_norm;  // L^2_v remainder norms
    double slope12 = 0.0, slope21 = 0.0;     // fitted log-log slopes
};

/// Measures the Taylor remainder of the inter-species Maxwellian
/// linearization for smooth random moment perturbations of sizes
/// `amplitudes`; a quadratic remainder gives slope ~2.
TaylorOrderReport verify_linear_part(const MixtureParams& p, const VelocityGrid& grid,
                                     std::vector<double> amplitudes,
                                     unsigned seed = 0x2545f491u);

}  // namespace mixbgk
