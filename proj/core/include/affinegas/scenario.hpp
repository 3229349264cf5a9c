#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "affinegas/diagnostics.hpp"

namespace affinegas {

struct DiagnosticsToggles {
    double support_threshold = 1e-8;
    DecayOptions decay;
    bool lagrangian_check = true;
    bool field_slices = false;
    double frame_tau_max = 20.0;  ///< frame-bound sweep in the affine subcommand
    double frame_step = 0.25;
};

/// Dyson residual refinement ladder used by `verify`.
struct ResidualLadder {
    double t = 1.0;
    double half_width = 6.0;
    std::vector<int> n{17, 33, 65};
    double dt_probe = 1e-2;  ///< halved with every level
    double corruption = 1.01;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    AffineParams affine;
    double t_end = 1000.0;
    double rel_tol = 1e-10;
    bool sigma_auto = true;
    double sigma = 0.0;  ///< used when !sigma_auto
    EvolverConfig evolver;
    DiagnosticsToggles diagnostics;
    VerifyConfig verify;
    ResidualLadder residual;

    /// Exponents for a given mu1 under the sigma choice.
    ExponentSet exponent_set(double mu1) const;
};

/// Parses JSON text; `overrides` maps "a__b__c" key paths to JSON values. Throws ConfigInvalid.
Scenario parse_scenario(const std::string& text, const std::map<std::string, std::string>& overrides = {});

/// Reads a file and applies AFFINEGAS_CFG_* environment overrides.
Scenario load_scenario(const std::filesystem::path& path);

/// Environment entries with the AFFINEGAS_CFG_ prefix, prefix stripped.
std::map<std::string, std::string> env_overrides();

/// Canonical JSON; parse_scenario(to_json(s)) reproduces s.
std::string to_json(const Scenario& s);

}  // namespace affinegas
