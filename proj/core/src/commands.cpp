#include "mixbgk/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "format_util.hpp"
#include "mixbgk/errors.hpp"
#include "mixbgk/linear.hpp"
#include "mixbgk/version.hpp"

namespace mixbgk {

namespace {

using detail::fmt_double;
namespace fs = std::filesystem;

struct CheckRow {
    std::string name;
    double measured = 0.0;
    std::string criterion;
    bool pass = false;
};

class ReportTable {
public:
    /// pass iff measured <= threshold.
    void add_le(const std::string& name, double measured, double threshold) {
        rows_.push_back({name, measured, "<= " + fmt_double(threshold), measured <= threshold});
    }
    /// pass iff measured >= threshold.
    void add_ge(const std::string& name, double measured, double threshold) {
        rows_.push_back({name, measured, ">= " + fmt_double(threshold), measured >= threshold});
    }
    /// pass iff measured == expected (integer comparison).
    void add_eq(const std::string& name, int measured, int expected) {
        rows_.push_back({name, double(measured), "== " + std::to_string(expected),
                         measured == expected});
    }

    bool all_pass() const {
        return std::all_of(rows_.begin(), rows_.end(), [](const CheckRow& r) { return r.pass; });
    }

    std::string to_string() const {
        std::ostringstream os;
        for (const auto& r : rows_) {
            os << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
            for (std::size_t i = r.name.size(); i < 46; ++i) os << ' ';
            os << " measured=" << fmt_double(r.measured) << "  want " << r.criterion << "\n";
        }
        return os.str();
    }

private:
    std::vector<CheckRow> rows_;
};

void write_provenance(const RunConfig& cfg, const fs::path& dir) {
    std::ofstream out(dir / "config_resolved.cfg");
    out << "# mixbgk " << kVersion << " resolved configuration\n";
    out << "# seed = " << cfg.scenario.seed << "\n";
    out << emit_config(cfg);
}

std::string provenance_block(const RunConfig& cfg) {
    std::ostringstream os;
    os << "artifact: mixbgk " << kVersion << "\n";
    os << "seed: " << cfg.scenario.seed << "\n";
    os << "--- resolved config ---\n" << emit_config(cfg) << "-----------------------\n";
    return os.str();
}

MixtureParams random_admissible(std::mt19937_64& rng, bool gamma_at_bound_sometimes = true) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    MixtureParams p;
    p.m2 = 0.5 + 1.5 * u01(rng);
    p.m1 = p.m2 * (1.0 + 2.0 * u01(rng));
    p.n10 = 0.3 + 2.7 * u01(rng);
    p.n20 = 0.3 + 2.7 * u01(rng);
    const double dlo = p.delta_lower_bound();
    p.delta = dlo + (1.0 - 1e-6 - dlo) * u01(rng);
    p.omega = (1.0 - 1e-6) * u01(rng);
    const double gub = p.gamma_upper_bound();
    const double pick = u01(rng);
    if (gamma_at_bound_sometimes && pick < 0.25) p.gamma = gub;
    else if (pick < 0.5) p.gamma = 0.0;
    else p.gamma = gub * u01(rng);
    return p;
}

SpeciesMoments random_moments(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    SpeciesMoments m;
    m.n = 0.2 + 2.8 * u01(rng);
    m.U = Vec3{3.0 * u01(rng) - 1.5, 3.0 * u01(rng) - 1.5, 3.0 * u01(rng) - 1.5};
    m.T = 0.2 + 2.8 * u01(rng);
    return m;
}

int expected_kernel_dim(const MixtureParams& p) {
    const bool d1 = p.delta >= 1.0;
    const bool w1 = p.omega >= 1.0;
    if (d1 && w1) return 10;
    if (d1) return 9;
    if (w1) return 7;
    return 6;
}

void check_kernel_regimes(ReportTable& table, const MixtureParams& base,
                          const VelocityGrid& vgrid) {
    struct Regime {
        const char* label;
        double delta, omega;
        int expect;
    };
    const double d = std::min(base.delta, 1.0 - 1e-3);
    const double w = std::min(base.omega, 1.0 - 1e-3);
    const Regime regimes[] = {
        {"kernel dim (delta,omega < 1)", d, w, 6},
        {"kernel dim (delta = 1)", 1.0, w, 9},
        {"kernel dim (omega = 1)", d, 1.0, 7},
        {"kernel dim (delta = omega = 1)", 1.0, 1.0, 10},
    };
    for (const auto& r : regimes) {
        MixtureParams p = base;
        p.delta = r.delta;
        p.omega = r.omega;
        p.gamma = 0.0;  // gamma's bound collapses at delta = 1
        const KernelReport rep = kernel_dimension(p, vgrid);
        table.add_eq(r.label, rep.dimension, r.expect);
    }
}

/// Fixed smooth perturbation direction with positivity-safe scaling:
/// f_hat = (F(eps0) - mu)/(eps0 sqrt(mu)), so mu + eps sqrt(mu) f_hat is a
/// convex combination of mu and F(eps0) for eps <= eps0.
DistributionPair smooth_direction(const LinearOps& L, double eps0, unsigned seed) {
    const auto& g = L.grid();
    const DistributionPair F0 =
        make_scenario("random-smooth", eps0, seed, L.params(), g);
    DistributionPair f = L.perturbation_split(F0);
    for (auto& x : f.f1.values()) x /= eps0;
    for (auto& x : f.f2.values()) x /= eps0;
    return f;
}

DistributionPair scaled(const DistributionPair& f, double s) {
    DistributionPair out = f;
    for (auto& x : out.f1.values()) x *= s;
    for (auto& x : out.f2.values()) x *= s;
    return out;
}

}  // namespace

int cmd_verify(const RunConfig& cfg, const VerifyOptions& opts) {
    const PhaseGrid grid = make_phase_grid(cfg, /*for_verify=*/true);
    const MixtureParams& p = cfg.mixture;
    ReportTable table;

    if (opts.kernel_only) {
        const KernelReport rep = kernel_dimension(p, grid.velocity);
        table.add_eq("kernel dim at configured (delta, omega)", rep.dimension,
                     expected_kernel_dim(p));
    } else {
        // Basis quality: raw sampled Gram defects (honest quadrature error)
        // and the orthonormalized mixture Gram used by the operator work.
        {
            const LinearOps raw = LinearOps::build(p, grid, BasisMode::sampled);
            table.add_le("species basis raw Gram defect",
                         std::max(raw.basis1().raw_gram_defect(),
                                  raw.basis2().raw_gram_defect()),
                         1e-8);
            table.add_le("mixture basis raw Gram defect",
                         raw.mixture_basis().gram_defect(grid.velocity), 1e-8);
        }
        const LinearOps L = LinearOps::build(p, grid);
        table.add_le("mixture basis Gram defect (orthonormalized)",
                     L.mixture_basis().gram_defect(grid.velocity), 1e-13);

        // Derivative lemmas for the inter-species Maxwellians.
        for (const auto& row : verify_mix_derivatives(p, grid.velocity, 1e-5)) {
            table.add_le(row.name + " central-difference rel error", row.max_rel_error, 1e-6);
        }

        // Jacobian lemma: closed-form inverse and finite differences.
        {
            std::mt19937_64 rng(2024u);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            double worst_inv = 0.0, worst_fd = 0.0;
            for (int i = 0; i < 10; ++i) {
                const double n = 0.2 + 2.8 * u01(rng);
                const Vec3 U{2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0};
                const double T = 0.2 + 2.8 * u01(rng);
                const double m = 0.5 + 2.5 * u01(rng);
                const JacobianCheck jc = verify_jacobian(n, U, T, m);
                worst_inv = std::max(worst_inv, jc.inverse_residual);
                worst_fd = std::max(worst_fd, jc.fd_residual);
            }
            table.add_le("Jacobian J J^-1 - I residual", worst_inv, 1e-12);
            table.add_le("Jacobian finite-difference residual", worst_fd, 1e-6);
        }

        // Mixing-rule antisymmetries over random admissible draws; the
        // energy identity goes through the fault seam so --fault can prove
        // the check bites.
        {
            std::mt19937_64 rng(777u);
            const double sign = opts.fault == FaultInjection::flip_gamma_t21 ? -1.0 : +1.0;
            double worst_mom = 0.0, worst_en = 0.0, min_T = 1e300;
            for (int i = 0; i < 10000; ++i) {
                const MixtureParams q = random_admissible(rng);
                const SpeciesMoments a = random_moments(rng), b = random_moments(rng);
                const auto [U12, U21] = mix_velocities(a.U, b.U, q);
                const auto [T12, T21] = detail::mix_temperatures_signed(a, b, q, sign);
                const Vec3 mom_res = q.m1 * (U12 - a.U) + q.m2 * (U21 - b.U);
                worst_mom = std::max({worst_mom, std::abs(mom_res.x), std::abs(mom_res.y),
                                      std::abs(mom_res.z)});
                const double en_res = 3.0 * (T12 - a.T) + 3.0 * (T21 - b.T) +
                                      q.m1 * (norm2(U12) - norm2(a.U)) +
                                      q.m2 * (norm2(U21) - norm2(b.U));
                worst_en = std::max(worst_en, std::abs(en_res));
                min_T = std::min({min_T, T12, T21});
            }
            table.add_le("momentum-exchange antisymmetry residual", worst_mom, 1e-12);
            table.add_le("energy-exchange antisymmetry residual", worst_en, 1e-12);
            table.add_ge("inter-species temperatures positive", min_T, 0.0);
        }

        // Cancellation identities of the discrete relaxation operator.
        {
            const DistributionPair F = make_scenario("random-smooth", 0.3, 99u, p, grid);
            const auto cells =
                exchange_diagnostics(F, p, grid, EquilibriumMode::moment_matched);
            double worst = 0.0;
            for (const auto& r : cells) {
                worst = std::max({worst, std::abs(r.mass12), std::abs(r.mass21),
                                  std::abs(r.momentum_sum.x), std::abs(r.momentum_sum.y),
                                  std::abs(r.momentum_sum.z), std::abs(r.energy_sum)});
            }
            table.add_le("cancellation residuals (moment-matched)", worst,
                         1e-10 * (p.n10 + p.n20));
        }

        // Conservation laws of the linearized operator.
        {
            std::mt19937_64 rng(31337u);
            std::normal_distribution<double> gauss;
            DistributionPair f = DistributionPair::zeros(grid, PairKind::perturbation);
            for (auto& x : f.f1.values()) x = gauss(rng);
            for (auto& x : f.f2.values()) x = gauss(rng);
            const double nrm = std::sqrt(norm2_xv(f, grid));
            for (auto& x : f.f1.values()) x /= nrm;
            for (auto& x : f.f2.values()) x /= nrm;

            const DistributionPair Lf = L.apply_L(f);
            DistributionPair probe = DistributionPair::zeros(grid, PairKind::perturbation);
            double worst = 0.0;
            auto probe_with = [&](auto&& fill1, auto&& fill2) {
                for (int c = 0; c < grid.space.n_cells; ++c) {
                    auto p1 = probe.f1.cell(c);
                    auto p2 = probe.f2.cell(c);
                    for (std::size_t j = 0; j < grid.velocity.size(); ++j) {
                        p1[j] = fill1(j);
                        p2[j] = fill2(j);
                    }
                }
                worst = std::max(worst, std::abs(inner_product_xv(Lf, probe, grid)));
            };
            const auto& vg = grid.velocity;
            probe_with([&](std::size_t j) { return L.sqrt_mu1()[j]; },
                       [&](std::size_t) { return 0.0; });
            probe_with([&](std::size_t) { return 0.0; },
                       [&](std::size_t j) { return L.sqrt_mu2()[j]; });
            for (int d = 0; d < 3; ++d) {
                probe_with(
                    [&](std::size_t j) { return p.m1 * vg.nodes[j][d] * L.sqrt_mu1()[j]; },
                    [&](std::size_t j) { return p.m2 * vg.nodes[j][d] * L.sqrt_mu2()[j]; });
            }
            probe_with([&](std::size_t j) { return p.m1 * norm2(vg.nodes[j]) * L.sqrt_mu1()[j]; },
                       [&](std::size_t j) { return p.m2 * norm2(vg.nodes[j]) * L.sqrt_mu2()[j]; });
            table.add_le("linearized conservation laws residual", worst, 1e-8);
        }

        // Dissipation inequality and both partial estimates, random draws.
        {
            std::mt19937_64 rng(4242u);
            std::normal_distribution<double> gauss;
            double min_margin = 0.0, worst_micro = 0.0, worst_exchange = 0.0;
            for (int i = 0; i < 1000; ++i) {
                DistributionPair f = DistributionPair::zeros(grid, PairKind::perturbation);
                for (auto& x : f.f1.values()) x = gauss(rng);
                for (auto& x : f.f2.values()) x = gauss(rng);
                if (i % 2 == 1) {
                    // Macro-heavy draw: the inequality is near equality there.
                    const DistributionPair Pf = L.project_mixture(f);
                    for (std::size_t k = 0; k < f.f1.size(); ++k) {
                        f.f1[k] = Pf.f1[k] + 0.05 * f.f1[k];
                        f.f2[k] = Pf.f2[k] + 0.05 * f.f2[k];
                    }
                }
                const DissipationCheck dc = L.dissipation_check(f);
                const double scale = (p.n10 + p.n20) * dc.norm2_f;
                min_margin = std::min(min_margin, dc.margin / dc.norm2_f);
                worst_micro =
                    std::max(worst_micro, std::abs(dc.micro_lhs - dc.micro_rhs) / scale);
                worst_exchange =
                    std::max(worst_exchange, (dc.exchange_lhs - dc.exchange_rhs) / scale);
            }
            table.add_ge("dissipation margin / ||f||^2 (1000 draws)", min_margin, -1e-10);
            table.add_le("partial micro estimate gap (relative)", worst_micro, 1e-10);
            table.add_le("partial exchange estimate excess (relative)", worst_exchange, 1e-10);
        }

        check_kernel_regimes(table, p, grid.velocity);

        // Linearization order of the inter-species Maxwellians.
        {
            const auto rep = verify_linear_part(
                p, grid.velocity, {1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3});
            table.add_ge("M12 Taylor remainder order", rep.slope12, 1.9);
            table.add_ge("M21 Taylor remainder order", rep.slope21, 1.9);
        }

        // Nonlinear remainder: vanishes at f = 0 and scales quadratically.
        {
            const DistributionPair zero =
                DistributionPair::zeros(grid, PairKind::perturbation);
            const DistributionPair g0 = L.nonlinear_remainder(zero);
            table.add_le("Gamma(0) norm", std::sqrt(norm2_xv(g0, grid)), 1e-10);

            const DistributionPair dir = smooth_direction(L, 0.1, 555u);
            double lo = 1e300, hi = 0.0;
            for (double eps : {1e-1, 1e-2, 1e-3}) {
                const DistributionPair g = L.nonlinear_remainder(scaled(dir, eps));
                const double ratio = std::sqrt(norm2_xv(g, grid)) / (eps * eps);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            table.add_le("Gamma quadratic-scaling spread", hi / lo, 1.2);
        }
    }

    fs::create_directories(cfg.output_dir);
    write_provenance(cfg, cfg.output_dir);
    {
        std::ofstream rep(fs::path(cfg.output_dir) / "verify_report.txt");
        rep << "# mixbgk " << kVersion << " verification report\n";
        if (opts.fault == FaultInjection::flip_gamma_t21) {
            rep << "# FAULT INJECTED: gamma sign flipped in T21 assembly\n";
        }
        rep << table.to_string();
        rep << (table.all_pass() ? "ALL CHECKS PASSED\n" : "CHECK FAILURES PRESENT\n");
    }
    std::cout << table.to_string();
    std::cout << (table.all_pass() ? "ALL CHECKS PASSED\n" : "CHECK FAILURES PRESENT\n");
    return table.all_pass() ? kExitOk : kExitCheckFailed;
}

namespace {

double rel_drift(double q, double q0, double scale) {
    return std::abs(q - q0) / std::max(std::abs(q0), scale);
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
    const PhaseGrid grid = make_phase_grid(cfg);
    const MixtureParams& p = cfg.mixture;

    fs::create_directories(cfg.output_dir);
    write_provenance(cfg, cfg.output_dir);

    const DistributionPair F0 =
        make_scenario(cfg.scenario.name, cfg.scenario.epsilon, cfg.scenario.seed, p, grid);

    std::ofstream csv(fs::path(cfg.output_dir) / "series.csv");
    csv << "t,energy,mass1,mass2,px,py,pz,E_total,n1,n2,"
           "U1x,U1y,U1z,U2x,U2y,U2z,T1,T2,T12,T21\n";
    auto emit_row = [&csv](const RunRecord& r) {
        const auto& m = r.mean_moments;
        csv << fmt_double(r.t) << ',' << fmt_double(r.energy) << ','
            << fmt_double(r.totals.mass1) << ',' << fmt_double(r.totals.mass2) << ','
            << fmt_double(r.totals.momentum.x) << ',' << fmt_double(r.totals.momentum.y) << ','
            << fmt_double(r.totals.momentum.z) << ',' << fmt_double(r.totals.energy) << ','
            << fmt_double(m.s1.n) << ',' << fmt_double(m.s2.n) << ',' << fmt_double(m.s1.U.x)
            << ',' << fmt_double(m.s1.U.y) << ',' << fmt_double(m.s1.U.z) << ','
            << fmt_double(m.s2.U.x) << ',' << fmt_double(m.s2.U.y) << ','
            << fmt_double(m.s2.U.z) << ',' << fmt_double(m.s1.T) << ',' << fmt_double(m.s2.T)
            << ',' << fmt_double(m.T12) << ',' << fmt_double(m.T21) << '\n';
        csv.flush();
    };

    std::ofstream summary(fs::path(cfg.output_dir) / "summary.txt");
    summary << "# mixbgk " << kVersion << " simulate summary\n" << provenance_block(cfg);

    TimeSeries ts;
    try {
        ts = run(F0, p, grid, cfg.solver, emit_row);
    } catch (const solver_abort& e) {
        summary << "SOLVER ABORT: " << e.what() << "\n";
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolverAbort;
    }

    const ConservedTotals& t0 = ts.totals.front();
    const double p_scale = p.m1 * t0.mass1 + p.m2 * t0.mass2;
    double d_mass1 = 0, d_mass2 = 0, d_mom = 0, d_energy = 0;
    for (const auto& t : ts.totals) {
        d_mass1 = std::max(d_mass1, rel_drift(t.mass1, t0.mass1, 0.0));
        d_mass2 = std::max(d_mass2, rel_drift(t.mass2, t0.mass2, 0.0));
        for (int d = 0; d < 3; ++d) {
            d_mom = std::max(d_mom, rel_drift(t.momentum[d], t0.momentum[d], p_scale));
        }
        d_energy = std::max(d_energy, rel_drift(t.energy, t0.energy, 0.0));
    }

    const RelaxedState relaxed = relaxed_state_from_totals(t0, p, grid);
    const MomentSet& mt = ts.mean_moments.back();
    summary << "records: " << ts.times.size() << "\n";
    summary << "conservation drift (relative): mass1=" << fmt_double(d_mass1)
            << " mass2=" << fmt_double(d_mass2) << " momentum=" << fmt_double(d_mom)
            << " energy=" << fmt_double(d_energy) << "\n";
    summary << "terminal moments: n1=" << fmt_double(mt.s1.n) << " n2=" << fmt_double(mt.s2.n)
            << " U1x=" << fmt_double(mt.s1.U.x) << " U2x=" << fmt_double(mt.s2.U.x)
            << " T1=" << fmt_double(mt.s1.T) << " T2=" << fmt_double(mt.s2.T)
            << " T12=" << fmt_double(mt.T12) << " T21=" << fmt_double(mt.T21) << "\n";
    summary << "predicted relaxed state: n1=" << fmt_double(relaxed.n1)
            << " n2=" << fmt_double(relaxed.n2) << " Ux=" << fmt_double(relaxed.U.x)
            << " T=" << fmt_double(relaxed.T) << "\n";
    summary << "terminal energy: " << fmt_double(ts.energy.back()) << "\n";
    summary << "min value seen: " << fmt_double(ts.min_value_seen)
            << " (max " << fmt_double(ts.max_value_seen) << ")\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::span<const double> delta_list,
              std::span<const double> omega_list) {
    const PhaseGrid grid = make_phase_grid(cfg);
    const MixtureParams& p = cfg.mixture;

    std::vector<double> deltas(delta_list.begin(), delta_list.end());
    std::vector<double> omegas(omega_list.begin(), omega_list.end());
    if (deltas.empty()) deltas.push_back(p.delta);
    if (omegas.empty()) omegas.push_back(p.omega);

    // The equilibria scenario has nothing to decay; sweeps fall back to the
    // deterministic both-modes state.
    const auto table = sweep_rates(p, grid, cfg.solver, deltas, omegas,
                                   cfg.scenario.epsilon,
                                   cfg.scenario.name == "equilibria" ? "gap-mix"
                                                                     : cfg.scenario.name,
                                   cfg.scenario.seed);

    if (std::none_of(table.begin(), table.end(),
                     [](const RateTableEntry& e) { return e.admissible; })) {
        std::cerr << "sweep: every (delta, omega) pair is inadmissible\n";
        return kExitInvalidConfig;
    }

    fs::create_directories(cfg.output_dir);
    write_provenance(cfg, cfg.output_dir);

    {
        std::ofstream csv(fs::path(cfg.output_dir) / "rates.csv");
        csv << "delta,omega,rate,r2,theory_floor,admissible\n";
        for (const auto& e : table) {
            csv << fmt_double(e.delta) << ',' << fmt_double(e.omega) << ',';
            if (e.admissible) {
                csv << fmt_double(e.report.rate) << ',' << fmt_double(e.report.r_squared);
            } else {
                csv << ',';
            }
            csv << ',' << fmt_double(std::min(1.0 - e.delta, 1.0 - e.omega)) << ','
                << (e.admissible ? "true" : "false") << '\n';
        }
    }

    // Monotonicity verdicts: fitted rate non-increasing along increasing
    // delta at fixed omega, and vice versa, within 2% fit noise.
    auto rate_at = [&](double d, double w) -> const RateTableEntry* {
        for (const auto& e : table) {
            if (e.delta == d && e.omega == w) return &e;
        }
        return nullptr;
    };
    std::ostringstream verdicts;
    bool all_monotone = true;
    auto check_line = [&](const std::string& label, const std::vector<double>& xs,
                          auto&& entry_of) {
        std::vector<double> rates;
        for (double x : xs) {
            const RateTableEntry* e = entry_of(x);
            if (e && e->admissible) rates.push_back(e->report.rate);
        }
        bool mono = true;
        for (std::size_t i = 1; i < rates.size(); ++i) {
            if (rates[i] > rates[i - 1] * 1.02) mono = false;
        }
        if (rates.size() >= 2) {
            verdicts << label << ": " << (mono ? "non-increasing" : "NOT non-increasing")
                     << " within 2%\n";
            all_monotone &= mono;
        }
    };
    {
        auto sorted_d = deltas, sorted_w = omegas;
        std::sort(sorted_d.begin(), sorted_d.end());
        std::sort(sorted_w.begin(), sorted_w.end());
        for (double w : sorted_w) {
            check_line("rate vs delta at omega=" + fmt_double(w), sorted_d,
                       [&](double d) { return rate_at(d, w); });
        }
        for (double d : sorted_d) {
            check_line("rate vs omega at delta=" + fmt_double(d), sorted_w,
                       [&](double w) { return rate_at(d, w); });
        }
    }

    std::ofstream summary(fs::path(cfg.output_dir) / "summary.txt");
    summary << "# mixbgk " << kVersion << " sweep summary\n" << provenance_block(cfg);
    summary << verdicts.str();
    summary << "overall monotonicity: " << (all_monotone ? "pass" : "violated") << "\n";
    std::cout << verdicts.str();
    return kExitOk;
}

}  // namespace mixbgk
