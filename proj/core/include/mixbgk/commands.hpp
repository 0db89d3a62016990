#pragma once

#include <span>
#include <string>

#include "mixbgk/config.hpp"

namespace mixbgk {

// Exit codes shared by the library drivers and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitSolverAbort = 3;

enum class FaultInjection {
    none,
    /// Flips the sign of gamma in the T21 assembly; used to prove the
    /// verification suite notices a broken energy-exchange identity.
    flip_gamma_t21,
};

struct VerifyOptions {
    FaultInjection fault = FaultInjection::none;
    bool kernel_only = false;
};

/// Runs the full property suite (Gram defects, derivative lemmas, Jacobian,
/// mixing antisymmetries, cancellation, dissipation, kernel dimensions,
/// linearization order, nonlinear-remainder scaling) on the verification
/// grid, writes <out>/verify_report.txt, and returns kExitOk iff every
/// check passed.
int cmd_verify(const RunConfig& cfg, const VerifyOptions& opts = {});

/// Integrates the configured scenario, streaming <out>/series.csv row by
/// row, and writes <out>/summary.txt plus the resolved provenance config.
/// On solver abort the partial CSV is retained and kExitSolverAbort
/// returned.
int cmd_simulate(const RunConfig& cfg);

/// Decay-rate table over the given interchange-rate lists; writes
/// <out>/rates.csv and a monotonicity verdict into <out>/summary.txt.
int cmd_sweep(const RunConfig& cfg, std::span<const double> delta_list,
              std::span<const double> omega_list);

}  // namespace mixbgk
