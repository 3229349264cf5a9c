#pragma once

#include <functional>
#include <string>
#include <vector>

#include "affinegas/profiles.hpp"

namespace affinegas {

struct EvolverConfig {
    double tau_end = 10.0;
    double cfl = 0.4;
    double dtau_max = 0.05;
    int N = 2;
    double epsilon = 1e-4;
    double lambda = 1e-5;
    double sigma = 1.0;
    Grid3 grid{4.0, 49};
    int snapshot_stride = 5;
    /// Cone slope used for the containment check; negative selects the background estimate.
    double cone_speed = -1.0;
    /// Bound C in ||DV|| <= C and ||DV_tau|| <= C.
    double dv_bound = 1.0;
    /// Radial bin width of the support envelope, in units of dx.
    double envelope_bin = 0.5;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;
};

struct FlowState {
    double tau = 0.0;
    VecField theta;
    VecField V;
    Kinematics kin;

    static FlowState make(const Grid3& g, double tau, VecField theta, VecField V);
    void refresh(const Grid3& g) { kin = kinematics(g, theta); }
};

/// Coefficients of the tau-equation at one instant.
struct Coefficients {
    double cbar = 1.0;
    double alpha = 1.5;
    double sigma = 1.0;
    double delta = 1.0;
};

/// theta_tau_tau from the expanded perturbation equation; throws JacobianDegenerate.
VecField rhs_theta(const Grid3& g, const FlowState& s, const ModulationFrame& f, const WeightProfiles& p,
                   const Coefficients& c);

/// Principal-symbol wave speed including the factor sqrt(1 + 1/alpha).
double max_wave_speed(const FlowState& s, const ModulationFrame& f, const WeightProfiles& p, const Coefficients& c);

/// Mean over [0, tau_end] of the background wave speed, times 1.25.
double background_cone_speed(const TimeRescaling& rs, const Coefficients& c, double tau_end);

struct AprioriFlags {
    double Ainv_minus_I = 0.0;  ///< max entry of A - I
    double Dtheta = 0.0;
    double J_minus_1 = 0.0;
    double SN = 0.0;
    double DV = 0.0;
    double DV_tau = 0.0;
    double bound_C = 1.0;

    double margin_Ainv() const { return 1.0 / 3.0 - Ainv_minus_I; }
    double margin_Dtheta() const { return 1.0 / 3.0 - Dtheta; }
    double margin_J() const { return 1.0 / 3.0 - J_minus_1; }
    double margin_SN() const { return 1.0 / 3.0 - SN; }
    double margin_DV() const { return bound_C - DV; }
    double margin_DV_tau() const { return bound_C - DV_tau; }
    bool ok() const;
    /// Name of the first tripped monitor, empty if none.
    std::string tripped() const;
};

/// The six monitors; `SN` comes from diagnostics, `accel` is the current theta_tau_tau.
AprioriFlags apriori_monitor(const Grid3& g, const FlowState& s, const VecField& accel, double SN, double bound_C);

struct SnapshotRecord {
    int step = 0;
    double tau = 0.0;
    double t = 0.0;
    double dtau = 0.0;
    double c_max = 0.0;
    double mu = 0.0;
    double mu_tau = 0.0;
    NormValues norms;
    double SN = 0.0;  ///< running sup of norms.SN_inst
    AprioriFlags apriori;
    double theta_inf = 0.0;
    double V_inf = 0.0;
    double envelope_bin = 0.0;      ///< width of the radial bins
    std::vector<double> envelope;   ///< max of |theta| + |V| per radial bin
    double momentum_residual = -1.0;  ///< Lagrangian reconstruction residual, -1 when absent
    double mass = -1.0;
};

struct RunLedger {
    std::string status = "Completed";
    std::string detail;
    double alpha = 0.0, sigma = 0.0, delta = 0.0, mu1 = 0.0, mu0 = 0.0, cbar = 0.0;
    double L = 0.0, dx = 0.0, cone_speed = 0.0, epsilon = 0.0, lambda = 0.0, tau_end = 0.0;
    int n = 0, N = 0;
    double beta_sobolev_sq = 0.0, data_norm = 0.0;
    std::vector<SnapshotRecord> snapshots;
};

using SnapshotHook = std::function<void(const FlowState&, const ModulationFrame&, const VecField& accel,
                                        SnapshotRecord&)>;

/// Radial profile of max(|theta| + |V|) with bins of width `bin`.
std::vector<double> radial_envelope(const Grid3& g, const VecField& theta, const VecField& V, double bin);

/// Smallest radius beyond which the envelope stays at or below `threshold`.
double support_radius(const std::vector<double>& envelope, double bin, double threshold);

/// One classical RK4 step of the first-order system on fixed frames.
void rk4_step(const Grid3& g, FlowState& s, double dtau, const ModulationFrame& f0, const ModulationFrame& fh,
              const ModulationFrame& f1, const WeightProfiles& p, const Coefficients& c);

/// Marches to tau_end; early exit with status "AprioriViolated". Throws CflFailure.
RunLedger evolve(const EvolverConfig& cfg, const TimeRescaling& rs, const ExponentSet& exps, double cbar,
                 const ProfileBundle& data, const SnapshotHook& hook = {});

}  // namespace affinegas
