#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "affinegas/ledger.hpp"
#include "affinegas/scenario.hpp"

namespace affinegas {

struct RunOptions {
    std::filesystem::path out;
    bool progress = false;  ///< one line per snapshot on stderr
};

struct RunResult {
    std::vector<Claim> claims;
    std::vector<std::filesystem::path> files;
    bool all_pass() const;
};

struct AffineSetup {
    std::shared_ptr<const AffineTrajectory> traj;
    TimeRescaling rs;
    Mu1Estimate mu1;
    AsymptoticFit fit;
};

/// Integrates to max(t_end, 100) and extends the horizon until tau covers `tau_needed`.
AffineSetup prepare_affine(const Scenario& s, double tau_needed);

/// ODE only: energy drift, det growth, derivative decay, temperature invariant, frame bounds.
RunResult run_affine(const Scenario& s, const RunOptions& opt);
/// Full perturbation run with its diagnostics.
RunResult run_evolve(const Scenario& s, const RunOptions& opt);
/// Identity suites on synthetic fields and the Dyson residual ladder.
RunResult run_verify(const Scenario& s, const RunOptions& opt);

/// Claims recomputed from the snapshots of an evolve ledger.
std::vector<Claim> evolve_claims(const LedgerFile& f);

/// Reads the ledgers, writes summary.txt and report.csv into `out`. Throws ConfigInvalid on an empty set.
RunResult emit_report(const std::vector<std::filesystem::path>& ledgers, const std::filesystem::path& out);

}  // namespace affinegas
