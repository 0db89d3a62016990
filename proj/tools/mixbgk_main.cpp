// mixbgk: deterministic solver and verification suite for the two-species
// BGK mixture model.
//
//   mixbgk verify   --config run.cfg [--out dir] [--fault flip-gamma-t21] [--kernel-only]
//   mixbgk simulate --config run.cfg [--out dir]
//   mixbgk sweep    --config run.cfg [--out dir] --delta-list 0.1,0.5,0.9 --omega-list 0.5
//
// Exit codes: 0 success, 1 check failure, 2 invalid config, 3 solver abort.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixbgk/commands.hpp"
#include "mixbgk/errors.hpp"
#include "mixbgk/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mixbgk::config_error("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-species BGK mixture solver and verification suite"};
    app.set_version_flag("--version", std::string("mixbgk ") + mixbgk::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string fault_name;
    std::string delta_csv, omega_csv;
    bool kernel_only = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file (defaults used if omitted)");
        sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    };

    CLI::App* verify = app.add_subcommand("verify", "run the property and identity suite");
    add_common(verify);
    verify->add_option("--fault", fault_name,
                       "inject a deliberate defect (flip-gamma-t21) to test suite sensitivity");
    verify->add_flag("--kernel-only", kernel_only,
                     "only report the kernel dimension at the configured (delta, omega)");

    CLI::App* simulate = app.add_subcommand("simulate", "integrate the configured scenario");
    add_common(simulate);

    CLI::App* sweep = app.add_subcommand("sweep", "decay-rate table over interchange rates");
    add_common(sweep);
    sweep->add_option("--delta-list", delta_csv, "comma-separated delta values");
    sweep->add_option("--omega-list", omega_csv, "comma-separated omega values");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto policy = kernel_only ? mixbgk::AdmissibilityPolicy::allow_unit_rates
                                        : mixbgk::AdmissibilityPolicy::strict;
        mixbgk::RunConfig cfg =
            config_path.empty() ? mixbgk::RunConfig{}
                                : mixbgk::parse_config(read_file(config_path), policy);
        if (!out_dir.empty()) cfg.output_dir = out_dir;

        if (verify->parsed()) {
            mixbgk::VerifyOptions opts;
            opts.kernel_only = kernel_only;
            if (!fault_name.empty()) {
                if (fault_name == "flip-gamma-t21") {
                    opts.fault = mixbgk::FaultInjection::flip_gamma_t21;
                } else {
                    std::cerr << "unknown fault '" << fault_name
                              << "'; available: flip-gamma-t21\n";
                    return mixbgk::kExitInvalidConfig;
                }
            }
            return mixbgk::cmd_verify(cfg, opts);
        }
        if (simulate->parsed()) {
            return mixbgk::cmd_simulate(cfg);
        }
        const auto deltas = parse_list(delta_csv);
        const auto omegas = parse_list(omega_csv);
        return mixbgk::cmd_sweep(cfg, deltas, omegas);
    } catch (const mixbgk::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mixbgk::kExitInvalidConfig;
    } catch (const mixbgk::solver_abort& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return mixbgk::kExitSolverAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mixbgk::kExitInvalidConfig;
    }
}
