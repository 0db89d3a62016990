#include "mixbgk/linear.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "mixbgk/errors.hpp"

namespace mixbgk {

namespace {

double ip_v(std::span<const double> g, std::span<const double> h, const VelocityGrid& grid) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) acc += grid.weights[j] * g[j] * h[j];
    return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] += a * x[j];
}

}  // namespace

SpeciesBasis SpeciesBasis::build(int species, const MixtureParams& p, const VelocityGrid& grid,
                                 BasisMode mode) {
    if (species != 1 && species != 2) throw invalid_input("SpeciesBasis: species must be 1 or 2");
    const double m = species == 1 ? p.m1 : p.m2;
    const double n0 = species == 1 ? p.n10 : p.n20;

    SpeciesBasis b;
    b.species_ = species;
    b.mode_ = mode;

    const std::size_t nv = grid.size();
    std::vector<double> sqrt_mu(nv);
    {
        const auto mu = maxwellian(n0, Vec3{}, 1.0, m, grid);
        for (std::size_t j = 0; j < nv; ++j) sqrt_mu[j] = std::sqrt(mu[j]);
    }

    // e1 = sqrt(mu)/sqrt(n0); e_{1+d} = sqrt(m/n0) v_d sqrt(mu);
    // e5 = (m|v|^2 - 3) sqrt(mu) / sqrt(6 n0).
    for (auto& arr : b.e_) arr.resize(nv);
    const double c1 = 1.0 / std::sqrt(n0);
    const double cv = std::sqrt(m / n0);
    const double c5 = 1.0 / std::sqrt(6.0 * n0);
    for (std::size_t j = 0; j < nv; ++j) {
        const Vec3& v = grid.nodes[j];
        b.e_[0][j] = c1 * sqrt_mu[j];
        b.e_[1][j] = cv * v.x * sqrt_mu[j];
        b.e_[2][j] = cv * v.y * sqrt_mu[j];
        b.e_[3][j] = cv * v.z * sqrt_mu[j];
        b.e_[4][j] = c5 * (m * norm2(v) - 3.0) * sqrt_mu[j];
    }

    double defect = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int k = i; k < 5; ++k) {
            const double g = ip_v(b.e_[i], b.e_[k], grid);
            defect = std::max(defect, std::abs(g - (i == k ? 1.0 : 0.0)));
        }
    }
    b.raw_gram_defect_ = defect;

    if (mode == BasisMode::orthonormalized) {
        // Modified Gram-Schmidt in the discrete inner product.
        for (int i = 0; i < 5; ++i) {
            for (int k = 0; k < i; ++k) {
                const double g = ip_v(b.e_[k], b.e_[i], grid);
                axpy(-g, b.e_[k], b.e_[i]);
            }
            const double nrm = std::sqrt(ip_v(b.e_[i], b.e_[i], grid));
            for (auto& x : b.e_[i]) x /= nrm;
        }
    }
    return b;
}

MixtureBasis MixtureBasis::build(const SpeciesBasis& b1, const SpeciesBasis& b2,
                                 const MixtureParams& p, const VelocityGrid& grid) {
    MixtureBasis E;
    const std::size_t nv = grid.size();
    for (int i = 0; i < 6; ++i) {
        E.comp1_[i].assign(nv, 0.0);
        E.comp2_[i].assign(nv, 0.0);
    }

    auto copy_scaled = [nv](std::span<const double> src, double s, std::vector<double>& dst) {
        for (std::size_t j = 0; j < nv; ++j) dst[j] = s * src[j];
    };

    // E1 = (e11, 0), E2 = (0, e21).
    copy_scaled(b1.e(1), 1.0, E.comp1_[0]);
    copy_scaled(b2.e(1), 1.0, E.comp2_[1]);

    // E_{2+d} = (m1 v_d sqrt(mu1), m2 v_d sqrt(mu2)) / sqrt(m1 n10 + m2 n20)
    //         = (sqrt(m1 n10) e_{1,1+d}, sqrt(m2 n20) e_{2,1+d}) / sqrt(m1 n10 + m2 n20).
    const double wm = std::sqrt(p.m1 * p.n10 + p.m2 * p.n20);
    for (int d = 1; d <= 3; ++d) {
        copy_scaled(b1.e(1 + d), std::sqrt(p.m1 * p.n10) / wm, E.comp1_[1 + d]);
        copy_scaled(b2.e(1 + d), std::sqrt(p.m2 * p.n20) / wm, E.comp2_[1 + d]);
    }

    // E6 = ((m1|v|^2-3) sqrt(mu1), (m2|v|^2-3) sqrt(mu2)) / sqrt(6 n10 + 6 n20)
    //    = (sqrt(6 n10) e15, sqrt(6 n20) e25) / sqrt(6 n10 + 6 n20).
    const double we = std::sqrt(6.0 * (p.n10 + p.n20));
    copy_scaled(b1.e(5), std::sqrt(6.0 * p.n10) / we, E.comp1_[5]);
    copy_scaled(b2.e(5), std::sqrt(6.0 * p.n20) / we, E.comp2_[5]);
    return E;
}

double MixtureBasis::gram_defect(const VelocityGrid& grid) const {
    double defect = 0.0;
    for (int i = 0; i < 6; ++i) {
        for (int k = i; k < 6; ++k) {
            const double g =
                ip_v(comp1_[i], comp1_[k], grid) + ip_v(comp2_[i], comp2_[k], grid);
            defect = std::max(defect, std::abs(g - (i == k ? 1.0 : 0.0)));
        }
    }
    return defect;
}

LinearOps LinearOps::build(const MixtureParams& p, const PhaseGrid& grid, BasisMode mode) {
    LinearOps L;
    L.p_ = p;
    L.grid_ = grid;
    L.b1_ = SpeciesBasis::build(1, p, grid.velocity, mode);
    L.b2_ = SpeciesBasis::build(2, p, grid.velocity, mode);
    L.E_ = MixtureBasis::build(L.b1_, L.b2_, p, grid.velocity);
    L.mu1_ = maxwellian(p.n10, Vec3{}, 1.0, p.m1, grid.velocity);
    L.mu2_ = maxwellian(p.n20, Vec3{}, 1.0, p.m2, grid.velocity);
    L.sqrt_mu1_.resize(L.mu1_.size());
    L.sqrt_mu2_.resize(L.mu2_.size());
    for (std::size_t j = 0; j < L.mu1_.size(); ++j) {
        L.sqrt_mu1_[j] = std::sqrt(L.mu1_[j]);
        L.sqrt_mu2_[j] = std::sqrt(L.mu2_[j]);
    }
    return L;
}

DistributionPair LinearOps::perturbation_split(const DistributionPair& F) const {
    DistributionPair f = DistributionPair::zeros(grid_, PairKind::perturbation);
    const std::size_t nv = grid_.velocity.size();
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        auto F1 = F.f1.cell(c), F2 = F.f2.cell(c);
        auto f1 = f.f1.cell(c), f2 = f.f2.cell(c);
        for (std::size_t j = 0; j < nv; ++j) {
            f1[j] = (F1[j] - mu1_[j]) / sqrt_mu1_[j];
            f2[j] = (F2[j] - mu2_[j]) / sqrt_mu2_[j];
        }
    }
    return f;
}

DistributionPair LinearOps::reconstruct(const DistributionPair& f) const {
    DistributionPair F = DistributionPair::zeros(grid_, PairKind::absolute);
    const std::size_t nv = grid_.velocity.size();
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        auto f1 = f.f1.cell(c), f2 = f.f2.cell(c);
        auto F1 = F.f1.cell(c), F2 = F.f2.cell(c);
        for (std::size_t j = 0; j < nv; ++j) {
            F1[j] = mu1_[j] + sqrt_mu1_[j] * f1[j];
            F2[j] = mu2_[j] + sqrt_mu2_[j] * f2[j];
        }
    }
    return F;
}

void LinearOps::project_species_cell(int species, std::span<const double> f,
                                     std::span<double> out) const {
    const SpeciesBasis& b = species == 1 ? b1_ : b2_;
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i <= 5; ++i) {
        const double c = ip_v(f, b.e(i), grid_.velocity);
        axpy(c, b.e(i), out);
    }
}

DistributionPair LinearOps::project_species(const DistributionPair& f) const {
    DistributionPair out = DistributionPair::zeros(grid_, PairKind::perturbation);
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        project_species_cell(1, f.f1.cell(c), out.f1.cell(c));
        project_species_cell(2, f.f2.cell(c), out.f2.cell(c));
    }
    return out;
}

DistributionPair LinearOps::project_mixture(const DistributionPair& f) const {
    DistributionPair out = DistributionPair::zeros(grid_, PairKind::perturbation);
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        auto f1 = f.f1.cell(c), f2 = f.f2.cell(c);
        auto o1 = out.f1.cell(c), o2 = out.f2.cell(c);
        for (int i = 1; i <= 6; ++i) {
            const double coef =
                ip_v(f1, E_.comp1(i), grid_.velocity) + ip_v(f2, E_.comp2(i), grid_.velocity);
            axpy(coef, E_.comp1(i), o1);
            axpy(coef, E_.comp2(i), o2);
        }
    }
    return out;
}

MacroCoefficients LinearOps::macro_coefficients(const DistributionPair& f) const {
    const int nc = grid_.space.n_cells;
    MacroCoefficients mc;
    mc.a1.resize(nc);
    mc.a2.resize(nc);
    mc.c.resize(nc);
    mc.b.resize(nc);
    const std::size_t nv = grid_.velocity.size();
    for (int c = 0; c < nc; ++c) {
        auto f1 = f.f1.cell(c), f2 = f.f2.cell(c);
        double A1 = 0.0, A2 = 0.0, Cint = 0.0;
        Vec3 B;
        for (std::size_t j = 0; j < nv; ++j) {
            const double w = grid_.velocity.weights[j];
            const Vec3& v = grid_.velocity.nodes[j];
            const double g1 = f1[j] * sqrt_mu1_[j];
            const double g2 = f2[j] * sqrt_mu2_[j];
            A1 += w * g1;
            A2 += w * g2;
            B += w * (p_.m1 * g1 + p_.m2 * g2) * v;
            Cint += w * (g1 * (p_.m1 * norm2(v) - 3.0) + g2 * (p_.m2 * norm2(v) - 3.0));
        }
        mc.c[c] = Cint / (6.0 * (p_.n10 + p_.n20));
        mc.a1[c] = A1 / p_.n10 - Cint / (2.0 * (p_.n10 + p_.n20));
        mc.a2[c] = A2 / p_.n20 - Cint / (2.0 * (p_.n10 + p_.n20));
        mc.b[c] = B / (p_.m1 * p_.n10 + p_.m2 * p_.n20);
    }
    return mc;
}

DistributionPair LinearOps::reconstruct_macro(const MacroCoefficients& mc) const {
    DistributionPair out = DistributionPair::zeros(grid_, PairKind::perturbation);
    const std::size_t nv = grid_.velocity.size();
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        auto o1 = out.f1.cell(c), o2 = out.f2.cell(c);
        for (std::size_t j = 0; j < nv; ++j) {
            const Vec3& v = grid_.velocity.nodes[j];
            const double bv_c = dot(mc.b[c], v) + mc.c[c] * norm2(v);
            o1[j] = (mc.a1[c] + bv_c * p_.m1) * sqrt_mu1_[j];
            o2[j] = (mc.a2[c] + bv_c * p_.m2) * sqrt_mu2_[j];
        }
    }
    return out;
}

namespace {

struct CellCoeffs {
    std::array<double, 5> c;  // <f1, e1i>
    std::array<double, 5> d;  // <f2, e2i>
};

CellCoeffs cell_coeffs(const LinearOps& L, std::span<const double> f1,
                       std::span<const double> f2) {
    CellCoeffs cc;
    for (int i = 1; i <= 5; ++i) {
        cc.c[i - 1] = inner_product_v(f1, L.basis1().e(i), L.grid().velocity);
        cc.d[i - 1] = inner_product_v(f2, L.basis2().e(i), L.grid().velocity);
    }
    return cc;
}

}  // namespace

LParts LinearOps::apply_L_parts(const DistributionPair& f) const {
    LParts parts;
    parts.L11 = DistributionPair::zeros(grid_, PairKind::perturbation);
    parts.L12_1 = DistributionPair::zeros(grid_, PairKind::perturbation);
    parts.L12_2 = DistributionPair::zeros(grid_, PairKind::perturbation);
    parts.L22 = DistributionPair::zeros(grid_, PairKind::perturbation);
    parts.L21_1 = DistributionPair::zeros(grid_, PairKind::perturbation);
    parts.L21_2 = DistributionPair::zeros(grid_, PairKind::perturbation);

    const std::size_t nv = grid_.velocity.size();
    const double ratio12 = std::sqrt(p_.n10 / p_.n20) * std::sqrt(p_.m1 / p_.m2);
    const double ratio21 = std::sqrt(p_.n20 / p_.n10) * std::sqrt(p_.m2 / p_.m1);
    const double mr = p_.mass_ratio();

    std::vector<double> P1f(nv), P2f(nv);
    for (int cidx = 0; cidx < grid_.space.n_cells; ++cidx) {
        auto f1 = f.f1.cell(cidx), f2 = f.f2.cell(cidx);
        const CellCoeffs cc = cell_coeffs(*this, f1, f2);

        project_species_cell(1, f1, P1f);
        project_species_cell(2, f2, P2f);

        auto l11 = parts.L11.f1.cell(cidx);
        auto l121 = parts.L12_1.f1.cell(cidx);
        auto l122 = parts.L12_2.f1.cell(cidx);
        auto l22 = parts.L22.f2.cell(cidx);
        auto l211 = parts.L21_1.f2.cell(cidx);
        auto l212 = parts.L21_2.f2.cell(cidx);

        for (std::size_t j = 0; j < nv; ++j) {
            const double r1 = P1f[j] - f1[j];
            const double r2 = P2f[j] - f2[j];
            l11[j] = p_.n10 * r1;
            l121[j] = p_.n20 * r1;
            l22[j] = p_.n20 * r2;
            l211[j] = p_.n10 * r2;
        }

        // Momentum-temperature interchange parts.
        for (int i = 2; i <= 4; ++i) {
            const double g12 = p_.n20 * (1.0 - p_.delta) * (ratio12 * cc.d[i - 1] - cc.c[i - 1]);
            const double g21 =
                p_.n10 * mr * (1.0 - p_.delta) * (ratio21 * cc.c[i - 1] - cc.d[i - 1]);
            axpy(g12, b1_.e(i), l122);
            axpy(g21, b2_.e(i), l212);
        }
        const double e12 =
            p_.n20 * (1.0 - p_.omega) * (std::sqrt(p_.n10 / p_.n20) * cc.d[4] - cc.c[4]);
        const double e21 =
            p_.n10 * (1.0 - p_.omega) * (std::sqrt(p_.n20 / p_.n10) * cc.c[4] - cc.d[4]);
        axpy(e12, b1_.e(5), l122);
        axpy(e21, b2_.e(5), l212);
    }
    return parts;
}

DistributionPair LinearOps::apply_L(const DistributionPair& f) const {
    const LParts parts = apply_L_parts(f);
    DistributionPair out = DistributionPair::zeros(grid_, PairKind::perturbation);
    for (std::size_t i = 0; i < out.f1.size(); ++i) {
        out.f1[i] = parts.L11.f1[i] + parts.L12_1.f1[i] + parts.L12_2.f1[i];
        out.f2[i] = parts.L22.f2[i] + parts.L21_1.f2[i] + parts.L21_2.f2[i];
    }
    return out;
}

DissipationCheck LinearOps::dissipation_check(const DistributionPair& f) const {
    const LParts parts = apply_L_parts(f);
    DissipationCheck out;
    out.norm2_f = norm2_xv(f, grid_);

    DistributionPair Lf = DistributionPair::zeros(grid_, PairKind::perturbation);
    DistributionPair Lmicro = DistributionPair::zeros(grid_, PairKind::perturbation);
    DistributionPair Lexch = DistributionPair::zeros(grid_, PairKind::perturbation);
    for (std::size_t i = 0; i < Lf.f1.size(); ++i) {
        Lmicro.f1[i] = parts.L11.f1[i] + parts.L12_1.f1[i];
        Lmicro.f2[i] = parts.L22.f2[i] + parts.L21_1.f2[i];
        Lexch.f1[i] = parts.L12_2.f1[i];
        Lexch.f2[i] = parts.L21_2.f2[i];
        Lf.f1[i] = Lmicro.f1[i] + Lexch.f1[i];
        Lf.f2[i] = Lmicro.f2[i] + Lexch.f2[i];
    }

    out.lhs = inner_product_xv(Lf, f, grid_);
    out.micro_lhs = inner_product_xv(Lmicro, f, grid_);
    out.exchange_lhs = inner_product_xv(Lexch, f, grid_);

    const DistributionPair Psp = project_species(f);
    const DistributionPair Pmix = project_mixture(f);
    DistributionPair micro = DistributionPair::zeros(grid_, PairKind::perturbation);
    DistributionPair macro_gap = DistributionPair::zeros(grid_, PairKind::perturbation);
    for (std::size_t i = 0; i < micro.f1.size(); ++i) {
        micro.f1[i] = f.f1[i] - Psp.f1[i];
        micro.f2[i] = f.f2[i] - Psp.f2[i];
        macro_gap.f1[i] = f.f1[i] - Pmix.f1[i];
        macro_gap.f2[i] = f.f2[i] - Pmix.f2[i];
    }
    const double micro2 = norm2_xv(micro, grid_);
    const double gap2 = norm2_xv(macro_gap, grid_);
    const double psp2 = norm2_xv(Psp, grid_);
    const double pmix2 = norm2_xv(Pmix, grid_);
    const double ntot = p_.n10 + p_.n20;

    out.micro_rhs = -ntot * micro2;
    out.exchange_rhs =
        -std::min(1.0 - p_.delta, 1.0 - p_.omega) * ntot * (psp2 - pmix2);
    out.rhs = -ntot * (std::max(p_.delta, p_.omega) * micro2 +
                       std::min(1.0 - p_.delta, 1.0 - p_.omega) * gap2);
    out.margin = out.rhs - out.lhs;
    return out;
}

DistributionPair LinearOps::nonlinear_remainder(const DistributionPair& f,
                                                EquilibriumMode mode,
                                                double rate_multiplier) const {
    const DistributionPair F = reconstruct(f);
    for (std::size_t i = 0; i < F.f1.size(); ++i) {
        if (F.f1[i] < 0.0 || F.f2[i] < 0.0) {
            throw invalid_input("nonlinear_remainder: reconstructed F is negative");
        }
    }
    const DistributionPair rhs = bgk_rhs(F, p_, grid_, mode, rate_multiplier);
    const DistributionPair Lf = apply_L(f);

    DistributionPair gamma = DistributionPair::zeros(grid_, PairKind::perturbation);
    const std::size_t nv = grid_.velocity.size();
    for (int c = 0; c < grid_.space.n_cells; ++c) {
        auto r1 = rhs.f1.cell(c), r2 = rhs.f2.cell(c);
        auto L1 = Lf.f1.cell(c), L2 = Lf.f2.cell(c);
        auto g1 = gamma.f1.cell(c), g2 = gamma.f2.cell(c);
        for (std::size_t j = 0; j < nv; ++j) {
            g1[j] = r1[j] / sqrt_mu1_[j] - L1[j];
            g2[j] = r2[j] / sqrt_mu2_[j] - L2[j];
        }
    }
    return gamma;
}

KernelReport kernel_dimension(const MixtureParams& p, const VelocityGrid& grid, double tol,
                              int n_complement, unsigned seed) {
    const PhaseGrid pg{SpatialGrid::homogeneous(), grid};
    // Exact rank counting needs exactly orthogonal projections.
    const LinearOps L = LinearOps::build(p, pg, BasisMode::orthonormalized);

    const int n_trial = 10 + n_complement;
    std::vector<DistributionPair> trial;
    trial.reserve(n_trial);

    auto pair_from = [&pg](std::span<const double> a, std::span<const double> b) {
        DistributionPair t = DistributionPair::zeros(pg, PairKind::perturbation);
        if (!a.empty()) std::copy(a.begin(), a.end(), t.f1.cell(0).begin());
        if (!b.empty()) std::copy(b.begin(), b.end(), t.f2.cell(0).begin());
        return t;
    };
    for (int i = 1; i <= 5; ++i) trial.push_back(pair_from(L.basis1().e(i), {}));
    for (int i = 1; i <= 5; ++i) trial.push_back(pair_from({}, L.basis2().e(i)));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    while (int(trial.size()) < n_trial) {
        DistributionPair t = DistributionPair::zeros(pg, PairKind::perturbation);
        for (auto& x : t.f1.values()) x = gauss(rng);
        for (auto& x : t.f2.values()) x = gauss(rng);
        for (const auto& u : trial) {
            const double g = inner_product_xv(t, u, pg);
            for (std::size_t i = 0; i < t.f1.size(); ++i) {
                t.f1[i] -= g * u.f1[i];
                t.f2[i] -= g * u.f2[i];
            }
        }
        const double nrm = std::sqrt(norm2_xv(t, pg));
        for (auto& x : t.f1.values()) x /= nrm;
        for (auto& x : t.f2.values()) x /= nrm;
        trial.push_back(std::move(t));
    }

    Eigen::MatrixXd A(n_trial, n_trial);
    for (int b = 0; b < n_trial; ++b) {
        const DistributionPair Lt = L.apply_L(trial[b]);
        for (int a = 0; a < n_trial; ++a) A(a, b) = inner_product_xv(trial[a], Lt, pg);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    KernelReport rep;
    rep.trial_dim = n_trial;
    rep.singular_values.assign(svd.singularValues().data(),
                               svd.singularValues().data() + n_trial);
    rep.threshold = tol * rep.singular_values.front();
    rep.dimension = int(std::count_if(rep.singular_values.begin(), rep.singular_values.end(),
                                      [&](double s) { return s < rep.threshold; }));
    return rep;
}

namespace {

/// M12 and M21 as functions of the transitioned macroscopic field values,
/// with the mixing rules applied before sampling.
std::vector<double> mix12_of_fields(double n1, const Vec3& U1, double T1, const Vec3& U2,
                                    double T2, const MixtureParams& p,
                                    const VelocityGrid& grid) {
    const auto [U12, U21] = mix_velocities(U1, U2, p);
    (void)U21;
    const auto [T12, T21] =
        mix_temperatures(SpeciesMoments{n1, U1, T1}, SpeciesMoments{1.0, U2, T2}, p);
    (void)T21;
    return maxwellian(n1, U12, T12, p.m1, grid);
}

std::vector<double> mix21_of_fields(double n2, const Vec3& U1, double T1, const Vec3& U2,
                                    double T2, const MixtureParams& p,
                                    const VelocityGrid& grid) {
    const auto [U12, U21] = mix_velocities(U1, U2, p);
    (void)U12;
    const auto [T12, T21] =
        mix_temperatures(SpeciesMoments{1.0, U1, T1}, SpeciesMoments{n2, U2, T2}, p);
    (void)T12;
    return maxwellian(n2, U21, T21, p.m2, grid);
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double rel_max_error(std::span<const double> got, std::span<const double> want) {
    double err = 0.0;
    for (std::size_t j = 0; j < got.size(); ++j) err = std::max(err, std::abs(got[j] - want[j]));
    const double scale = max_abs(want);
    return scale > 0.0 ? err / scale : err;
}

}  // namespace

std::vector<DerivativeResidual> verify_mix_derivatives(const MixtureParams& p,
                                                       const VelocityGrid& grid,
                                                       double step) {
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw invalid_input("verify_mix_derivatives: step must lie in [1e-7, 1e-3]");
    }
    const std::size_t nv = grid.size();
    const auto mu1 = maxwellian(p.n10, Vec3{}, 1.0, p.m1, grid);
    const auto mu2 = maxwellian(p.n20, Vec3{}, 1.0, p.m2, grid);

    std::vector<DerivativeResidual> table;
    std::vector<double> fd(nv), exact(nv);

    // Central difference of `eval` along one scalar field with the step
    // scaled by the field's equilibrium magnitude.
    auto central = [&](auto&& eval, double base_scale) {
        const double hstep = step * std::max(1.0, base_scale);
        const auto up = eval(+hstep);
        const auto dn = eval(-hstep);
        for (std::size_t j = 0; j < nv; ++j) fd[j] = (up[j] - dn[j]) / (2.0 * hstep);
    };

    const Vec3 zero{};

    // Lemma for M12: derivatives in (n1, U1, T1, U2, T2) at (n10, 0, 1, 0, 1).
    {
        central([&](double h) { return mix12_of_fields(p.n10 + h, zero, 1.0, zero, 1.0, p, grid); },
                p.n10);
        for (std::size_t j = 0; j < nv; ++j) exact[j] = mu1[j] / p.n10;
        table.push_back({"dM12/dn1", rel_max_error(fd, exact)});
    }
    {
        double worst = 0.0;
        for (int d = 0; d < 3; ++d) {
            central(
                [&](double h) {
                    Vec3 U1{};
                    U1[d] = h;
                    return mix12_of_fields(p.n10, U1, 1.0, zero, 1.0, p, grid);
                },
                1.0);
            for (std::size_t j = 0; j < nv; ++j)
                exact[j] = p.delta * p.m1 * grid.nodes[j][d] * mu1[j];
            worst = std::max(worst, rel_max_error(fd, exact));
        }
        table.push_back({"dM12/dU1", worst});
    }
    {
        central([&](double h) { return mix12_of_fields(p.n10, zero, 1.0 + h, zero, 1.0, p, grid); },
                1.0);
        for (std::size_t j = 0; j < nv; ++j)
            exact[j] = p.omega * 0.5 * (p.m1 * norm2(grid.nodes[j]) - 3.0) * mu1[j];
        table.push_back({"dM12/dT1", rel_max_error(fd, exact)});
    }
    {
        double worst = 0.0;
        for (int d = 0; d < 3; ++d) {
            central(
                [&](double h) {
                    Vec3 U2{};
                    U2[d] = h;
                    return mix12_of_fields(p.n10, zero, 1.0, U2, 1.0, p, grid);
                },
                1.0);
            for (std::size_t j = 0; j < nv; ++j)
                exact[j] = (1.0 - p.delta) * p.m1 * grid.nodes[j][d] * mu1[j];
            worst = std::max(worst, rel_max_error(fd, exact));
        }
        table.push_back({"dM12/dU2", worst});
    }
    {
        central([&](double h) { return mix12_of_fields(p.n10, zero, 1.0, zero, 1.0 + h, p, grid); },
                1.0);
        for (std::size_t j = 0; j < nv; ++j)
            exact[j] = (1.0 - p.omega) * 0.5 * (p.m1 * norm2(grid.nodes[j]) - 3.0) * mu1[j];
        table.push_back({"dM12/dT2", rel_max_error(fd, exact)});
    }

    // Lemma for M21: derivatives in (n2, U2, T2, U1, T1) at (n20, 0, 1, 0, 1).
    const double r = p.mass_ratio() * (1.0 - p.delta);
    {
        central([&](double h) { return mix21_of_fields(p.n20 + h, zero, 1.0, zero, 1.0, p, grid); },
                p.n20);
        for (std::size_t j = 0; j < nv; ++j) exact[j] = mu2[j] / p.n20;
        table.push_back({"dM21/dn2", rel_max_error(fd, exact)});
    }
    {
        double worst = 0.0;
        for (int d = 0; d < 3; ++d) {
            central(
                [&](double h) {
                    Vec3 U2{};
                    U2[d] = h;
                    return mix21_of_fields(p.n20, zero, 1.0, U2, 1.0, p, grid);
                },
                1.0);
            for (std::size_t j = 0; j < nv; ++j)
                exact[j] = (1.0 - r) * p.m2 * grid.nodes[j][d] * mu2[j];
            worst = std::max(worst, rel_max_error(fd, exact));
        }
        table.push_back({"dM21/dU2", worst});
    }
    {
        central([&](double h) { return mix21_of_fields(p.n20, zero, 1.0, zero, 1.0 + h, p, grid); },
                1.0);
        for (std::size_t j = 0; j < nv; ++j)
            exact[j] = p.omega * 0.5 * (p.m2 * norm2(grid.nodes[j]) - 3.0) * mu2[j];
        table.push_back({"dM21/dT2", rel_max_error(fd, exact)});
    }
    {
        double worst = 0.0;
        for (int d = 0; d < 3; ++d) {
            central(
                [&](double h) {
                    Vec3 U1{};
                    U1[d] = h;
                    return mix21_of_fields(p.n20, U1, 1.0, zero, 1.0, p, grid);
                },
                1.0);
            for (std::size_t j = 0; j < nv; ++j)
                exact[j] = r * p.m2 * grid.nodes[j][d] * mu2[j];
            worst = std::max(worst, rel_max_error(fd, exact));
        }
        table.push_back({"dM21/dU1", worst});
    }
    {
        central([&](double h) { return mix21_of_fields(p.n20, zero, 1.0 + h, zero, 1.0, p, grid); },
                1.0);
        for (std::size_t j = 0; j < nv; ++j)
            exact[j] = (1.0 - p.omega) * 0.5 * (p.m2 * norm2(grid.nodes[j]) - 3.0) * mu2[j];
        table.push_back({"dM21/dT1", rel_max_error(fd, exact)});
    }
    return table;
}

JacobianCheck verify_jacobian(double n, const Vec3& U, double T, double m, double step) {
    if (!(n > 0.0) || !(T > 0.0)) throw invalid_input("verify_jacobian: need n, T > 0");
    using M5 = Eigen::Matrix<double, 5, 5>;
    const double s6 = std::sqrt(6.0);

    M5 J = M5::Zero();
    J(0, 0) = 1.0;
    for (int d = 0; d < 3; ++d) {
        J(1 + d, 0) = U[d];
        J(1 + d, 1 + d) = n;
        J(4, 1 + d) = 2.0 * n * U[d] * m / s6;
    }
    J(4, 0) = (3.0 * T + m * norm2(U) - 3.0) / s6;
    J(4, 4) = 3.0 * n / s6;

    M5 Jinv = M5::Zero();
    Jinv(0, 0) = 1.0;
    for (int d = 0; d < 3; ++d) {
        Jinv(1 + d, 0) = -U[d] / n;
        Jinv(1 + d, 1 + d) = 1.0 / n;
        Jinv(4, 1 + d) = -(2.0 * m / 3.0) * U[d] / n;
    }
    Jinv(4, 0) = (m * norm2(U) - 3.0 * T + 3.0) / (3.0 * n);
    Jinv(4, 4) = std::sqrt(2.0 / 3.0) / n;

    JacobianCheck out;
    out.inverse_residual = (J * Jinv - M5::Identity()).cwiseAbs().maxCoeff();

    auto map5 = [m, s6](const Eigen::Matrix<double, 5, 1>& x) {
        // x = (n, U1, U2, U3, T) -> (n, nU, G)
        Eigen::Matrix<double, 5, 1> y;
        const double nn = x(0), TT = x(4);
        const double u2 = x(1) * x(1) + x(2) * x(2) + x(3) * x(3);
        y(0) = nn;
        y(1) = nn * x(1);
        y(2) = nn * x(2);
        y(3) = nn * x(3);
        y(4) = (3.0 * nn * TT + m * nn * u2 - 3.0 * nn) / s6;
        return y;
    };

    Eigen::Matrix<double, 5, 1> x0;
    x0 << n, U.x, U.y, U.z, T;
    M5 Jfd;
    for (int col = 0; col < 5; ++col) {
        const double h = step * std::max(1.0, std::abs(x0(col)));
        auto xp = x0, xm = x0;
        xp(col) += h;
        xm(col) -= h;
        Jfd.col(col) = (map5(xp) - map5(xm)) / (2.0 * h);
    }
    out.fd_residual = (Jfd - J).cwiseAbs().maxCoeff();
    return out;
}

TaylorOrderReport verify_linear_part(const MixtureParams& p, const VelocityGrid& grid,
                                     std::vector<double> amplitudes, unsigned seed) {
    std::sort(amplitudes.begin(), amplitudes.end(), std::greater<>());
    for (double e : amplitudes) {
        if (!(e >= 0.0 && e <= 0.5)) {
            throw invalid_input("verify_linear_part: amplitudes must lie in [0, 0.5]");
        }
    }

    const PhaseGrid pg{SpatialGrid::homogeneous(), grid};
    // The Proposition is about the continuous formulas; keep the bases raw.
    const LinearOps L = LinearOps::build(p, pg, BasisMode::sampled);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double dn1 = unit(rng), dn2 = unit(rng);
    const Vec3 dU1{unit(rng), unit(rng), unit(rng)};
    const Vec3 dU2{unit(rng), unit(rng), unit(rng)};
    const double dT1 = unit(rng), dT2 = unit(rng);

    const double ratio12 = std::sqrt(p.n10 / p.n20) * std::sqrt(p.m1 / p.m2);
    const double ratio21 = std::sqrt(p.n20 / p.n10) * std::sqrt(p.m2 / p.m1);
    const double mr = p.mass_ratio();
    const std::size_t nv = grid.size();

    TaylorOrderReport rep;
    for (double eps : amplitudes) {
        const SpeciesMoments mom1{p.n10 * (1.0 + eps * dn1), eps * dU1, 1.0 + eps * dT1};
        const SpeciesMoments mom2{p.n20 * (1.0 + eps * dn2), eps * dU2, 1.0 + eps * dT2};

        DistributionPair F = DistributionPair::zeros(pg, PairKind::absolute);
        {
            const auto F1 = maxwellian(mom1.n, mom1.U, mom1.T, p.m1, grid);
            const auto F2 = maxwellian(mom2.n, mom2.U, mom2.T, p.m2, grid);
            std::copy(F1.begin(), F1.end(), F.f1.cell(0).begin());
            std::copy(F2.begin(), F2.end(), F.f2.cell(0).begin());
        }
        const DistributionPair f = L.perturbation_split(F);

        const auto [U12, U21] = mix_velocities(mom1.U, mom2.U, p);
        const auto [T12, T21] = mix_temperatures(mom1, mom2, p);
        const auto M12 = maxwellian(mom1.n, U12, T12, p.m1, grid);
        const auto M21 = maxwellian(mom2.n, U21, T21, p.m2, grid);

        // Linear parts of the expansion around the global equilibria.
        std::vector<double> lin12(nv), lin21(nv);
        L.project_species_cell(1, f.f1.cell(0), lin12);
        L.project_species_cell(2, f.f2.cell(0), lin21);
        const CellCoeffs cc = cell_coeffs(L, f.f1.cell(0), f.f2.cell(0));
        for (int i = 2; i <= 4; ++i) {
            axpy((1.0 - p.delta) * (ratio12 * cc.d[i - 1] - cc.c[i - 1]), L.basis1().e(i), lin12);
            axpy(mr * (1.0 - p.delta) * (ratio21 * cc.c[i - 1] - cc.d[i - 1]), L.basis2().e(i),
                 lin21);
        }
        axpy((1.0 - p.omega) * (std::sqrt(p.n10 / p.n20) * cc.d[4] - cc.c[4]), L.basis1().e(5),
             lin12);
        axpy((1.0 - p.omega) * (std::sqrt(p.n20 / p.n10) * cc.c[4] - cc.d[4]), L.basis2().e(5),
             lin21);

        std::vector<double> R12(nv), R21(nv);
        for (std::size_t j = 0; j < nv; ++j) {
            R12[j] = (M12[j] - L.mu1()[j]) / L.sqrt_mu1()[j] - lin12[j];
            R21[j] = (M21[j] - L.mu2()[j]) / L.sqrt_mu2()[j] - lin21[j];
        }
        rep.eps.push_back(eps);
        rep.r12_norm.push_back(std::sqrt(inner_product_v(R12, R12, grid)));
        rep.r21_norm.push_back(std::sqrt(inner_product_v(R21, R21, grid)));
    }

    auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
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
    };
    rep.slope12 = slope(rep.eps, rep.r12_norm);
    rep.slope21 = slope(rep.eps, rep.r21_norm);
    return rep;
}

}  // namespace mixbgk
