#include "mixbgk/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "mixbgk/errors.hpp"
#include "mixbgk/grid.hpp"

namespace mixbgk {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

struct KeyTable {
    std::string_view section;
    std::vector<std::string_view> keys;
};

const std::vector<KeyTable>& key_tables() {
    static const std::vector<KeyTable> tables = {
        {"mixture", {"m1", "m2", "n10", "n20", "delta", "omega", "gamma"}},
        {"grid", {"n_cells", "length", "dim", "v_max", "n_per_axis"}},
        {"solver", {"dt", "t_max", "splitting", "equilibrium_mode", "record_every",
                    "rate_multiplier"}},
        {"scenario", {"name", "epsilon", "seed"}},
        {"output", {"dir"}},
    };
    return tables;
}

std::string nearest_key(std::string_view section, std::string_view key) {
    std::string best;
    std::size_t best_d = SIZE_MAX;
    for (const auto& tab : key_tables()) {
        for (auto k : tab.keys) {
            const std::size_t d =
                levenshtein(key, k) + (tab.section == section ? 0 : 1);
            if (d < best_d) {
                best_d = d;
                best = std::string("[") + std::string(tab.section) + "] " + std::string(k);
            }
        }
    }
    return best;
}

double parse_double(std::string_view v, std::string_view key) {
    double out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw config_error("value of '" + std::string(key) + "' is not a number: '" +
                           std::string(v) + "'");
    }
    return out;
}

long parse_int(std::string_view v, std::string_view key) {
    long out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw config_error("value of '" + std::string(key) + "' is not an integer: '" +
                           std::string(v) + "'");
    }
    return out;
}

std::string fmt(double x) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

RunConfig parse_config(std::string_view text, AdmissibilityPolicy policy) {
    RunConfig cfg;
    std::string section;

    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw config_error("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const auto& tab : key_tables()) known |= (tab.section == section);
            if (!known) {
                throw config_error("line " + std::to_string(line_no) + ": unknown section [" +
                                   section + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw config_error("line " + std::to_string(line_no) +
                               ": expected 'key = value', got '" + std::string(line) + "'");
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string val{trim(line.substr(eq + 1))};
        if (section.empty()) {
            throw config_error("line " + std::to_string(line_no) + ": key '" + key +
                               "' appears before any section header");
        }

        auto unknown = [&]() {
            throw config_error("line " + std::to_string(line_no) + ": unknown key '" + key +
                               "' in [" + section + "]; nearest valid key is " +
                               nearest_key(section, key));
        };

        if (section == "mixture") {
            if (key == "m1") cfg.mixture.m1 = parse_double(val, key);
            else if (key == "m2") cfg.mixture.m2 = parse_double(val, key);
            else if (key == "n10") cfg.mixture.n10 = parse_double(val, key);
            else if (key == "n20") cfg.mixture.n20 = parse_double(val, key);
            else if (key == "delta") cfg.mixture.delta = parse_double(val, key);
            else if (key == "omega") cfg.mixture.omega = parse_double(val, key);
            else if (key == "gamma") cfg.mixture.gamma = parse_double(val, key);
            else unknown();
        } else if (section == "grid") {
            if (key == "n_cells") cfg.grid.n_cells = int(parse_int(val, key));
            else if (key == "length") cfg.grid.length = parse_double(val, key);
            else if (key == "dim") cfg.grid.dim = int(parse_int(val, key));
            else if (key == "v_max") cfg.grid.v_max = parse_double(val, key);
            else if (key == "n_per_axis") cfg.grid.n_per_axis = int(parse_int(val, key));
            else unknown();
        } else if (section == "solver") {
            if (key == "dt") cfg.solver.dt = parse_double(val, key);
            else if (key == "t_max") cfg.solver.t_max = parse_double(val, key);
            else if (key == "record_every") cfg.solver.record_every = int(parse_int(val, key));
            else if (key == "rate_multiplier") cfg.solver.rate_multiplier = parse_double(val, key);
            else if (key == "splitting") {
                if (val == "strang") cfg.solver.splitting = Splitting::strang;
                else if (val == "lie") cfg.solver.splitting = Splitting::lie;
                else throw config_error("splitting must be 'strang' or 'lie', got '" + val + "'");
            } else if (key == "equilibrium_mode") {
                if (val == "sampled") cfg.solver.equilibrium_mode = EquilibriumMode::sampled;
                else if (val == "moment_matched") {
                    cfg.solver.equilibrium_mode = EquilibriumMode::moment_matched;
                } else {
                    throw config_error(
                        "equilibrium_mode must be 'sampled' or 'moment_matched', got '" + val +
                        "'");
                }
            } else unknown();
        } else if (section == "scenario") {
            if (key == "name") cfg.scenario.name = val;
            else if (key == "epsilon") cfg.scenario.epsilon = parse_double(val, key);
            else if (key == "seed") cfg.scenario.seed = unsigned(parse_int(val, key));
            else unknown();
        } else if (section == "output") {
            if (key == "dir") cfg.output_dir = val;
            else unknown();
        }
    }

    // Cross-field validation. Mixture admissibility quotes the violated
    // constraints verbatim from validate_params.
    const ParamCheck chk = validate_params(
        cfg.mixture, policy == AdmissibilityPolicy::allow_unit_rates);
    if (!chk.admissible) {
        std::string msg = "inadmissible mixture parameters:";
        for (const auto& v : chk.violations) msg += "\n  - " + v;
        throw config_error(msg);
    }
    if (cfg.grid.dim != 0 && cfg.grid.dim != 1) {
        throw config_error("[grid] dim must be 0 or 1");
    }
    if (cfg.grid.dim == 0 && cfg.grid.n_cells != 1) {
        throw config_error("[grid] dim = 0 means spatially homogeneous: n_cells must be 1");
    }
    if (cfg.grid.n_cells < 1 || !(cfg.grid.length > 0.0)) {
        throw config_error("[grid] needs n_cells >= 1 and length > 0");
    }
    if (cfg.grid.v_max < 0.0) throw config_error("[grid] v_max must be positive (or 0 for auto)");
    if (cfg.grid.n_per_axis != 0 &&
        (cfg.grid.n_per_axis < 2 || cfg.grid.n_per_axis % 2 != 0)) {
        throw config_error("[grid] n_per_axis must be even and >= 2 (or 0 for auto)");
    }
    if (!(cfg.solver.dt > 0.0)) throw config_error("[solver] dt must be positive");
    if (!(cfg.solver.t_max >= cfg.solver.dt)) throw config_error("[solver] t_max must be >= dt");
    if (cfg.solver.record_every < 1) throw config_error("[solver] record_every must be >= 1");
    if (!(cfg.solver.rate_multiplier > 0.0)) {
        throw config_error("[solver] rate_multiplier must be positive");
    }
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), cfg.scenario.name) == names.end()) {
        std::string msg = "[scenario] unknown name '" + cfg.scenario.name + "'; shipped scenarios:";
        for (const auto& n : names) msg += " " + n;
        throw config_error(msg);
    }
    if (!(cfg.scenario.epsilon > 0.0)) throw config_error("[scenario] epsilon must be positive");
    return cfg;
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[mixture]\n";
    os << "m1 = " << fmt(cfg.mixture.m1) << "\n";
    os << "m2 = " << fmt(cfg.mixture.m2) << "\n";
    os << "n10 = " << fmt(cfg.mixture.n10) << "\n";
    os << "n20 = " << fmt(cfg.mixture.n20) << "\n";
    os << "delta = " << fmt(cfg.mixture.delta) << "\n";
    os << "omega = " << fmt(cfg.mixture.omega) << "\n";
    os << "gamma = " << fmt(cfg.mixture.gamma) << "\n";
    os << "\n[grid]\n";
    os << "n_cells = " << cfg.grid.n_cells << "\n";
    os << "length = " << fmt(cfg.grid.length) << "\n";
    os << "dim = " << cfg.grid.dim << "\n";
    os << "v_max = " << fmt(cfg.grid.v_max) << "\n";
    os << "n_per_axis = " << cfg.grid.n_per_axis << "\n";
    os << "\n[solver]\n";
    os << "dt = " << fmt(cfg.solver.dt) << "\n";
    os << "t_max = " << fmt(cfg.solver.t_max) << "\n";
    os << "splitting = " << (cfg.solver.splitting == Splitting::strang ? "strang" : "lie") << "\n";
    os << "equilibrium_mode = "
       << (cfg.solver.equilibrium_mode == EquilibriumMode::sampled ? "sampled" : "moment_matched")
       << "\n";
    os << "record_every = " << cfg.solver.record_every << "\n";
    os << "rate_multiplier = " << fmt(cfg.solver.rate_multiplier) << "\n";
    os << "\n[scenario]\n";
    os << "name = " << cfg.scenario.name << "\n";
    os << "epsilon = " << fmt(cfg.scenario.epsilon) << "\n";
    os << "seed = " << cfg.scenario.seed << "\n";
    os << "\n[output]\n";
    os << "dir = " << cfg.output_dir << "\n";
    return os.str();
}

PhaseGrid make_phase_grid(const RunConfig& cfg, bool for_verify) {
    const double v_max =
        cfg.grid.v_max > 0.0 ? cfg.grid.v_max : default_v_max(cfg.mixture.m2);
    const int n_axis = cfg.grid.n_per_axis > 0
                           ? cfg.grid.n_per_axis
                           : default_n_per_axis(cfg.mixture.mass_ratio(), for_verify);
    PhaseGrid g;
    g.velocity = make_velocity_grid(v_max, n_axis);
    g.space = cfg.grid.dim == 0 ? SpatialGrid::homogeneous(cfg.grid.length)
                                : SpatialGrid::periodic_line(cfg.grid.n_cells, cfg.grid.length);
    return g;
}

bool operator==(const GridConfig& a, const GridConfig& b) {
    return a.n_cells == b.n_cells && a.length == b.length && a.dim == b.dim &&
           a.v_max == b.v_max && a.n_per_axis == b.n_per_axis;
}
bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.name == b.name && a.epsilon == b.epsilon && a.seed == b.seed;
}
bool operator==(const MixtureParams& a, const MixtureParams& b) {
    return a.m1 == b.m1 && a.m2 == b.m2 && a.n10 == b.n10 && a.n20 == b.n20 &&
           a.delta == b.delta && a.omega == b.omega && a.gamma == b.gamma;
}
bool operator==(const SolverConfig& a, const SolverConfig& b) {
    return a.dt == b.dt && a.t_max == b.t_max && a.splitting == b.splitting &&
           a.equilibrium_mode == b.equilibrium_mode && a.record_every == b.record_every &&
           a.rate_multiplier == b.rate_multiplier;
}
bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.mixture == b.mixture && a.grid == b.grid && a.solver == b.solver &&
           a.scenario == b.scenario && a.output_dir == b.output_dir;
}

}  // namespace mixbgk
