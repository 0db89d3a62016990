#include "mixbgk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mixbgk/errors.hpp"

namespace mixbgk {

namespace {

// ---------------------------------------------------------------------------
// Periodic cubic spline on a uniform lattice.
// ---------------------------------------------------------------------------

void solve_tridiagonal(std::vector<double>& b, std::vector<double>& r, double a, double c) {
    // In-place Thomas algorithm for constant sub/super diagonals a, c;
    // b holds the (mutable) main diagonal, r the RHS and then the solution.
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a / b[i - 1];
        b[i] -= w * c;
        r[i] -= w * r[i - 1];
    }
    r[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        r[i] = (r[i] - c * r[i + 1]) / b[i];
    }
}

/// Second-derivative moments of the periodic natural cubic spline through
/// y on a uniform grid with spacing dx (cyclic tridiagonal system via
/// Sherman-Morrison).
void spline_moments(std::span<const double> y, double dx, std::vector<double>& M,
                    std::vector<double>& scratch_b, std::vector<double>& scratch_z) {
    const std::size_t n = y.size();
    M.resize(n);
    if (n == 1) {
        M[0] = 0.0;
        return;
    }
    const double inv_dx2 = 1.0 / (dx * dx);
    if (n == 2) {
        // Both off-diagonal couplings wrap onto the same neighbor.
        const double r0 = (y[1] - 2.0 * y[0] + y[1]) * inv_dx2;
        const double r1 = (y[0] - 2.0 * y[1] + y[0]) * inv_dx2;
        // A = [[2/3, 1/3], [1/3, 2/3]]
        const double det = 4.0 / 9.0 - 1.0 / 9.0;
        M[0] = ((2.0 / 3.0) * r0 - (1.0 / 3.0) * r1) / det;
        M[1] = ((2.0 / 3.0) * r1 - (1.0 / 3.0) * r0) / det;
        return;
    }

    constexpr double a = 1.0 / 6.0, b = 2.0 / 3.0, c = 1.0 / 6.0;
    const double alpha = c;  // A[n-1][0]
    const double beta = a;   // A[0][n-1]
    const double gamma = -b;

    std::vector<double>& diag = scratch_b;
    std::vector<double>& z = scratch_z;
    diag.assign(n, b);
    diag[0] = b - gamma;
    diag[n - 1] = b - alpha * beta / gamma;

    for (std::size_t i = 0; i < n; ++i) {
        const double ym = y[(i + n - 1) % n], y0 = y[i], yp = y[(i + 1) % n];
        M[i] = (yp - 2.0 * y0 + ym) * inv_dx2;
    }
    solve_tridiagonal(diag, M, a, c);

    diag.assign(n, b);
    diag[0] = b - gamma;
    diag[n - 1] = b - alpha * beta / gamma;
    z.assign(n, 0.0);
    z[0] = gamma;
    z[n - 1] = alpha;
    solve_tridiagonal(diag, z, a, c);

    const double vy = M[0] + (beta / gamma) * M[n - 1];
    const double vz = z[0] + (beta / gamma) * z[n - 1];
    const double factor = vy / (1.0 + vz);
    for (std::size_t i = 0; i < n; ++i) M[i] -= factor * z[i];
}

/// Evaluates the periodic spline at every knot shifted by the same offset:
/// out[i] = S(x_i - shift). `theta` and `q` are the fractional and integer
/// parts of shift/dx.
void spline_shift_eval(std::span<const double> y, std::span<const double> M, double dx,
                       double shift, std::span<double> out) {
    const std::size_t n = y.size();
    if (n == 1) {
        out[0] = y[0];
        return;
    }
    const double xi = shift / dx;
    const double qf = std::floor(xi);
    const double theta = xi - qf;  // in [0, 1)
    // Landing point is x_i - shift = x_{i-q} - theta dx, i.e. inside
    // [x_{i-q-1}, x_{i-q}] with distance theta dx from the right knot.
    const long q = long(qf);

    const double t1 = 1.0 - theta;
    const double dx2_6 = dx * dx / 6.0;
    const double wl = theta * theta * theta * dx2_6;  // M coefficient, left knot
    const double wr = t1 * t1 * t1 * dx2_6;           // M coefficient, right knot

    for (std::size_t i = 0; i < n; ++i) {
        // left knot index j = i - q - 1, right knot j+1 = i - q (mod n)
        const long jr = (long(i) - q) % long(n);
        const std::size_t right = std::size_t(jr < 0 ? jr + long(n) : jr);
        const std::size_t left = (right + n - 1) % n;
        out[i] = wl * M[left] + wr * M[right] + (y[left] - M[left] * dx2_6) * theta +
                 (y[right] - M[right] * dx2_6) * t1;
    }
}

void advect_species(GridFunction& F, double dt, const PhaseGrid& grid) {
    const int nx = grid.space.n_cells;
    const std::size_t nv = grid.velocity.size();
    const double dx = grid.space.cell_width();

    std::vector<double> profile(nx), shifted(nx), M, sb, sz;
    for (std::size_t j = 0; j < nv; ++j) {
        const double shift = grid.velocity.nodes[j].x * dt;
        for (int c = 0; c < nx; ++c) profile[c] = F[std::size_t(c) * nv + j];
        spline_moments(profile, dx, M, sb, sz);
        spline_shift_eval(profile, M, dx, shift, shifted);
        for (int c = 0; c < nx; ++c) F[std::size_t(c) * nv + j] = shifted[c];
    }
}

void check_state(const DistributionPair& F) {
    double min_v = F.f1[0], max_v = F.f1[0];
    for (const auto* gf : {&F.f1, &F.f2}) {
        for (double x : gf->values()) {
            min_v = std::min(min_v, x);
            max_v = std::max(max_v, x);
        }
    }
    if (min_v < -1e-12 * std::max(max_v, 0.0)) {
        std::ostringstream os;
        os << "positivity lost: min F = " << min_v << ", max F = " << max_v;
        throw solver_abort(os.str());
    }
}

DistributionPair relax_rk4(const DistributionPair& F, const MixtureParams& p,
                           const PhaseGrid& grid, const SolverConfig& cfg, double dt) {
    auto rhs = [&](const DistributionPair& G) {
        return bgk_rhs(G, p, grid, cfg.equilibrium_mode, cfg.rate_multiplier);
    };
    auto shifted = [&](const DistributionPair& G, const DistributionPair& k, double a) {
        DistributionPair out = G;
        for (std::size_t i = 0; i < out.f1.size(); ++i) {
            out.f1[i] += a * k.f1[i];
            out.f2[i] += a * k.f2[i];
        }
        return out;
    };
    const DistributionPair k1 = rhs(F);
    const DistributionPair k2 = rhs(shifted(F, k1, 0.5 * dt));
    const DistributionPair k3 = rhs(shifted(F, k2, 0.5 * dt));
    const DistributionPair k4 = rhs(shifted(F, k3, dt));

    DistributionPair out = F;
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < out.f1.size(); ++i) {
        out.f1[i] += w * (k1.f1[i] + 2.0 * k2.f1[i] + 2.0 * k3.f1[i] + k4.f1[i]);
        out.f2[i] += w * (k1.f2[i] + 2.0 * k2.f2[i] + 2.0 * k3.f2[i] + k4.f2[i]);
    }
    return out;
}

}  // namespace

DistributionPair advect(const DistributionPair& F, double dt, const PhaseGrid& grid) {
    DistributionPair out = F;
    if (grid.space.dim == 0 || dt == 0.0) return out;
    advect_species(out.f1, dt, grid);
    advect_species(out.f2, dt, grid);
    return out;
}

DistributionPair step(const DistributionPair& F, const MixtureParams& p, const PhaseGrid& grid,
                      const SolverConfig& cfg) {
    DistributionPair G = F;
    try {
        if (grid.space.dim == 0) {
            G = relax_rk4(G, p, grid, cfg, cfg.dt);
        } else if (cfg.splitting == Splitting::strang) {
            G = advect(G, 0.5 * cfg.dt, grid);
            G = relax_rk4(G, p, grid, cfg, cfg.dt);
            G = advect(G, 0.5 * cfg.dt, grid);
        } else {
            G = advect(G, cfg.dt, grid);
            G = relax_rk4(G, p, grid, cfg, cfg.dt);
        }
    } catch (const degenerate_cell_error& e) {
        throw solver_abort(std::string("degenerate cell during relaxation: ") + e.what());
    } catch (const infeasible_target_error& e) {
        throw solver_abort(std::string("relaxation target left the realizable set: ") +
                           e.what());
    }
    check_state(G);
    return G;
}

RelaxedState relaxed_state_from_totals(const ConservedTotals& totals, const MixtureParams& p,
                                       const PhaseGrid& grid) {
    RelaxedState s;
    const double L = grid.space.length;
    s.n1 = totals.mass1 / L;
    s.n2 = totals.mass2 / L;
    const double rho = p.m1 * s.n1 + p.m2 * s.n2;
    s.U = totals.momentum / (L * rho);
    s.T = (totals.energy / L - rho * norm2(s.U)) / (3.0 * (s.n1 + s.n2));
    if (!(s.n1 > 0.0) || !(s.n2 > 0.0) || !(s.T > 0.0)) {
        throw invalid_input("relaxed_state_from_totals: totals do not describe a positive state");
    }
    return s;
}

DistributionPair equilibrium_from_totals(const ConservedTotals& totals, const MixtureParams& p,
                                         const PhaseGrid& grid, EquilibriumMode mode) {
    const RelaxedState s = relaxed_state_from_totals(totals, p, grid);
    std::vector<double> e1, e2;
    if (mode == EquilibriumMode::sampled) {
        e1 = maxwellian(s.n1, s.U, s.T, p.m1, grid.velocity);
        e2 = maxwellian(s.n2, s.U, s.T, p.m2, grid.velocity);
    } else {
        e1 = discrete_maxwellian(targets_from(SpeciesMoments{s.n1, s.U, s.T}, p.m1), p.m1,
                                 grid.velocity);
        e2 = discrete_maxwellian(targets_from(SpeciesMoments{s.n2, s.U, s.T}, p.m2), p.m2,
                                 grid.velocity);
    }
    DistributionPair out = DistributionPair::zeros(grid, PairKind::absolute);
    for (int c = 0; c < grid.space.n_cells; ++c) {
        std::copy(e1.begin(), e1.end(), out.f1.cell(c).begin());
        std::copy(e2.begin(), e2.end(), out.f2.cell(c).begin());
    }
    return out;
}

double perturbation_energy(const DistributionPair& F, const DistributionPair& equilibrium,
                           const PhaseGrid& grid) {
    const double dx = grid.space.cell_width();
    double acc = 0.0;
    for (int c = 0; c < grid.space.n_cells; ++c) {
        auto F1 = F.f1.cell(c), F2 = F.f2.cell(c);
        auto E1 = equilibrium.f1.cell(c), E2 = equilibrium.f2.cell(c);
        double cell = 0.0;
        for (std::size_t j = 0; j < grid.velocity.size(); ++j) {
            const double w = grid.velocity.weights[j];
            const double d1 = F1[j] - E1[j];
            const double d2 = F2[j] - E2[j];
            cell += w * (d1 * d1 / E1[j] + d2 * d2 / E2[j]);
        }
        acc += dx * cell;
    }
    return acc;
}

namespace {

MomentSet mean_moment_set(const DistributionPair& F, const MixtureParams& p,
                          const PhaseGrid& grid) {
    MomentSet acc{};
    const int nc = grid.space.n_cells;
    for (int c = 0; c < nc; ++c) {
        const auto s1 = compute_moments(F.f1.cell(c), p.m1, grid.velocity);
        const auto s2 = compute_moments(F.f2.cell(c), p.m2, grid.velocity);
        const MomentSet m = mix_moments(s1, s2, p);
        acc.s1.n += m.s1.n;
        acc.s1.U += m.s1.U;
        acc.s1.T += m.s1.T;
        acc.s2.n += m.s2.n;
        acc.s2.U += m.s2.U;
        acc.s2.T += m.s2.T;
        acc.U12 += m.U12;
        acc.U21 += m.U21;
        acc.T12 += m.T12;
        acc.T21 += m.T21;
    }
    const double inv = 1.0 / nc;
    acc.s1.n *= inv;
    acc.s1.U *= inv;
    acc.s1.T *= inv;
    acc.s2.n *= inv;
    acc.s2.U *= inv;
    acc.s2.T *= inv;
    acc.U12 *= inv;
    acc.U21 *= inv;
    acc.T12 *= inv;
    acc.T21 *= inv;
    return acc;
}

void track_extrema(const DistributionPair& F, double& min_v, double& max_v) {
    for (const auto* gf : {&F.f1, &F.f2}) {
        for (double x : gf->values()) {
            min_v = std::min(min_v, x);
            max_v = std::max(max_v, x);
        }
    }
}

}  // namespace

TimeSeries run(const DistributionPair& F0, const MixtureParams& p, const PhaseGrid& grid,
               const SolverConfig& cfg, const RecordCallback& on_record) {
    if (!(cfg.dt > 0.0) || !(cfg.t_max >= cfg.dt) || cfg.record_every < 1) {
        throw invalid_input("run: need dt > 0, t_max >= dt, record_every >= 1");
    }
    const DistributionPair reference =
        equilibrium_from_totals(conserved_totals(F0, p, grid), p, grid, cfg.equilibrium_mode);

    TimeSeries ts;
    ts.min_value_seen = F0.f1[0];
    ts.max_value_seen = F0.f1[0];

    auto record = [&](double t, const DistributionPair& F) {
        RunRecord rec;
        rec.t = t;
        rec.energy = perturbation_energy(F, reference, grid);
        rec.totals = conserved_totals(F, p, grid);
        rec.mean_moments = mean_moment_set(F, p, grid);
        ts.times.push_back(rec.t);
        ts.energy.push_back(rec.energy);
        ts.totals.push_back(rec.totals);
        ts.mean_moments.push_back(rec.mean_moments);
        if (on_record) on_record(rec);
    };

    DistributionPair F = F0;
    track_extrema(F, ts.min_value_seen, ts.max_value_seen);
    record(0.0, F);

    const long n_steps = std::max<long>(1, std::lround(cfg.t_max / cfg.dt));
    for (long i = 1; i <= n_steps; ++i) {
        try {
            F = step(F, p, grid, cfg);
        } catch (const solver_abort& e) {
            throw solver_abort(std::string(e.what()), double(i) * cfg.dt, i);
        }
        track_extrema(F, ts.min_value_seen, ts.max_value_seen);
        if (i % cfg.record_every == 0 || i == n_steps) {
            record(double(i) * cfg.dt, F);
        }
    }
    return ts;
}

DecayReport estimate_decay(const TimeSeries& ts, double t_lo, double t_hi,
                           const MixtureParams& p) {
    std::vector<double> t, loge;
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
        if (ts.times[i] < t_lo || ts.times[i] > t_hi) continue;
        if (!(ts.energy[i] > 0.0)) {
            throw invalid_input("estimate_decay: nonpositive energy inside the fit window");
        }
        t.push_back(ts.times[i]);
        loge.push_back(std::log(ts.energy[i]));
    }
    if (t.size() < 10) {
        throw invalid_input("estimate_decay: fewer than 10 samples in the fit window");
    }

    const double n = double(t.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sx += t[i];
        sy += loge[i];
        sxx += t[i] * t[i];
        sxy += t[i] * loge[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double fit = intercept + slope * t[i];
        ss_res += (loge[i] - fit) * (loge[i] - fit);
        ss_tot += (loge[i] - mean_y) * (loge[i] - mean_y);
    }

    DecayReport rep;
    rep.rate = -slope / 2.0;  // energy is a squared norm
    rep.intercept = intercept;
    rep.t_lo = t_lo;
    rep.t_hi = t_hi;
    rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    rep.theory_floor = std::min(1.0 - p.delta, 1.0 - p.omega);
    rep.n_samples = int(t.size());
    return rep;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"equilibria",     "temperature-gap",
                                                   "counter-flow",   "gap-mix",
                                                   "sinusoidal-density", "random-smooth"};
    return names;
}

DistributionPair make_scenario(const std::string& name, double epsilon, unsigned seed,
                               const MixtureParams& p, const PhaseGrid& grid) {
    if (name == "equilibria") return global_equilibria(p, grid);

    DistributionPair F = DistributionPair::zeros(grid, PairKind::absolute);
    auto fill_cell = [&](int c, const SpeciesMoments& m1, const SpeciesMoments& m2) {
        const auto F1 = maxwellian(m1.n, m1.U, m1.T, p.m1, grid.velocity);
        const auto F2 = maxwellian(m2.n, m2.U, m2.T, p.m2, grid.velocity);
        std::copy(F1.begin(), F1.end(), F.f1.cell(c).begin());
        std::copy(F2.begin(), F2.end(), F.f2.cell(c).begin());
    };

    if (name == "temperature-gap") {
        for (int c = 0; c < grid.space.n_cells; ++c) {
            fill_cell(c, {p.n10, Vec3{}, 1.0 + epsilon}, {p.n20, Vec3{}, 1.0 - epsilon});
        }
        return F;
    }
    if (name == "counter-flow") {
        for (int c = 0; c < grid.space.n_cells; ++c) {
            fill_cell(c, {p.n10, Vec3{epsilon, 0, 0}, 1.0}, {p.n20, Vec3{-epsilon, 0, 0}, 1.0});
        }
        return F;
    }
    if (name == "gap-mix") {
        for (int c = 0; c < grid.space.n_cells; ++c) {
            fill_cell(c, {p.n10, Vec3{epsilon, 0, 0}, 1.0 + epsilon},
                      {p.n20, Vec3{-epsilon, 0, 0}, 1.0 - epsilon});
        }
        return F;
    }
    if (name == "sinusoidal-density") {
        if (grid.space.dim != 1) {
            throw invalid_input("scenario sinusoidal-density needs a 1-D spatial grid");
        }
        for (int c = 0; c < grid.space.n_cells; ++c) {
            const double x = grid.space.cell_center(c);
            const double n1 =
                p.n10 * (1.0 + epsilon * std::sin(2.0 * std::numbers::pi * x / grid.space.length));
            fill_cell(c, {n1, Vec3{}, 1.0}, {p.n20, Vec3{}, 1.0});
        }
        return F;
    }
    if (name == "random-smooth") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        // Band-limited profile: constant plus the two lowest Fourier modes,
        // normalized so |r(x)| <= 1.
        auto make_profile = [&]() {
            std::array<double, 5> coef;
            double l1 = 0.0;
            for (auto& a : coef) {
                a = unit(rng);
                l1 += std::abs(a);
            }
            for (auto& a : coef) a /= l1;
            return [coef](double theta) {
                return coef[0] + coef[1] * std::cos(theta) + coef[2] * std::sin(theta) +
                       coef[3] * std::cos(2.0 * theta) + coef[4] * std::sin(2.0 * theta);
            };
        };
        struct FieldSet {
            std::function<double(double)> n, ux, uy, uz, T;
        };
        auto fields = [&]() {
            return FieldSet{make_profile(), make_profile(), make_profile(), make_profile(),
                            make_profile()};
        };
        const FieldSet f1 = fields(), f2 = fields();
        for (int c = 0; c < grid.space.n_cells; ++c) {
            const double theta = grid.space.dim == 1
                                     ? 2.0 * std::numbers::pi * grid.space.cell_center(c) /
                                           grid.space.length
                                     : 0.0;
            const SpeciesMoments m1{p.n10 * (1.0 + epsilon * f1.n(theta)),
                                    Vec3{epsilon * f1.ux(theta), epsilon * f1.uy(theta),
                                         epsilon * f1.uz(theta)},
                                    1.0 + epsilon * f1.T(theta)};
            const SpeciesMoments m2{p.n20 * (1.0 + epsilon * f2.n(theta)),
                                    Vec3{epsilon * f2.ux(theta), epsilon * f2.uy(theta),
                                         epsilon * f2.uz(theta)},
                                    1.0 + epsilon * f2.T(theta)};
            fill_cell(c, m1, m2);
        }
        return F;
    }
    throw invalid_input("unknown scenario '" + name + "'");
}

double momentum_gap_rate_ode(const MixtureParams& p, double rate_multiplier, double t_end,
                             int n_steps) {
    // d/dt U1 = nu n20 (1-delta)(U2 - U1), d/dt U2 = nu n10 (m1/m2)(1-delta)(U1 - U2).
    const double c1 = rate_multiplier * p.n20 * (1.0 - p.delta);
    const double c2 = rate_multiplier * p.n10 * p.mass_ratio() * (1.0 - p.delta);
    double u1 = 1.0, u2 = -1.0;
    const double dt = t_end / n_steps;
    auto f1 = [&](double a, double b) { return c1 * (b - a); };
    auto f2 = [&](double a, double b) { return c2 * (a - b); };
    for (int i = 0; i < n_steps; ++i) {
        const double k1a = f1(u1, u2), k1b = f2(u1, u2);
        const double k2a = f1(u1 + 0.5 * dt * k1a, u2 + 0.5 * dt * k1b);
        const double k2b = f2(u1 + 0.5 * dt * k1a, u2 + 0.5 * dt * k1b);
        const double k3a = f1(u1 + 0.5 * dt * k2a, u2 + 0.5 * dt * k2b);
        const double k3b = f2(u1 + 0.5 * dt * k2a, u2 + 0.5 * dt * k2b);
        const double k4a = f1(u1 + dt * k3a, u2 + dt * k3b);
        const double k4b = f2(u1 + dt * k3a, u2 + dt * k3b);
        u1 += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        u2 += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    return -std::log(std::abs(u1 - u2) / 2.0) / t_end;
}

std::vector<RateTableEntry> sweep_rates(const MixtureParams& base, const PhaseGrid& grid,
                                        const SolverConfig& cfg,
                                        std::span<const double> delta_list,
                                        std::span<const double> omega_list, double epsilon,
                                        const std::string& scenario, unsigned seed) {
    if (delta_list.empty() || omega_list.empty()) {
        throw invalid_input("sweep_rates: delta and omega lists must be nonempty");
    }
    std::vector<RateTableEntry> table;
    for (double d : delta_list) {
        for (double w : omega_list) {
            RateTableEntry entry;
            entry.delta = d;
            entry.omega = w;
            MixtureParams p = base;
            p.delta = d;
            p.omega = w;
            const ParamCheck chk = validate_params(p);
            if (!chk.admissible) {
                entry.admissible = false;
                entry.skip_reason = chk.violations.front();
                table.push_back(std::move(entry));
                continue;
            }
            entry.admissible = true;

            // Auto-scale the horizon and step to the expected slowest mode so
            // every pair yields a comparable, well-resolved fit.
            const double ntot = (p.n10 + p.n20) * cfg.rate_multiplier;
            const double slow = std::min(1.0 - d, 1.0 - w) * ntot;
            SolverConfig rc = cfg;
            rc.t_max = 6.0 / slow;
            rc.dt = std::min(cfg.dt, 0.25 / ntot);
            const long steps = std::lround(rc.t_max / rc.dt);
            rc.record_every = int(std::max<long>(1, steps / 400));

            const DistributionPair F0 = make_scenario(scenario, epsilon, seed, p, grid);
            const TimeSeries ts = run(F0, p, grid, rc);
            entry.report =
                estimate_decay(ts, kSweepFitLo * rc.t_max, kSweepFitHi * rc.t_max, p);
            table.push_back(std::move(entry));
        }
    }
    return table;
}

}  // namespace mixbgk
