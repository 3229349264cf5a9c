#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "affinegas/evolver.hpp"

namespace affinegas {

struct NormReport {
    double tau = 0.0;
    double SN = 0.0;  ///< running sup
    double BN_V = 0.0, BN_theta = 0.0;
    double EN = 0.0, DN = 0.0, CNm1 = 0.0;
    std::vector<PerNu> per_nu;
};

/// `SN_prev` is the running sup over earlier snapshots.
NormReport norms_report(const Grid3& g, const FlowState& s, const ModulationFrame& f, const WeightProfiles& p,
                        const ExponentSet& exps, double cbar, int N, double SN_prev = 0.0);

/// Portable uniform doubles in [0, 1) from mt19937_64.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed);
    double operator()();
    double in(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

private:
    std::mt19937_64 engine_;
};

/// theta(tau, y) = cos(tau) a(y) + sin(tau) b(y) with a, b Gaussian-damped affine polynomials,
/// each normalised so that max |D a|, max |D b| equal `amplitude` on a fixed reference lattice.
class SyntheticFlow {
public:
    SyntheticFlow(std::uint64_t seed, double amplitude);

    VecField theta(const Grid3& g, double tau) const;
    VecField velocity(const Grid3& g, double tau) const;
    Field scalar(const Grid3& g) const;
    FlowState state(const Grid3& g, double tau) const;
    double amplitude() const { return amplitude_; }

private:
    // per component: c0 + c . y, for a (rows 0..2) and b (rows 3..5) and the scalar (row 6)
    std::array<std::array<double, 4>, 7> coef_{};
    std::array<double, 2> norm_{1.0, 1.0};
    double amplitude_;

    static double eval(const std::array<double, 4>& c, double x, double y, double z);
    static Vec3 grad(const std::array<double, 4>& c, double x, double y, double z);
    Field sample(const Grid3& g, int row) const;
};

enum class IdentityKind { Exact, Spatial, Temporal, Amplitude };
const char* to_string(IdentityKind k);

struct IdentityRow {
    std::string name;
    IdentityKind kind = IdentityKind::Exact;
    int order = 0;          ///< expected order in `param` (0 for exact items)
    double param = 0.0;     ///< dx, h or amplitude
    double residual = 0.0;  ///< max-norm residual
};

/// Pointwise and spatial identities of one state.
std::vector<IdentityRow> spatial_identities(const Grid3& g, const FlowState& s, const Field& f, const Mat3& Lambda,
                                            double alpha);

/// Jacobi's formula and the modified energy identity from states at tau - h, tau, tau + h.
/// `V` is the exact theta_tau at the centre; `nu_order` bounds |nu| for the energy identity.
std::vector<IdentityRow> temporal_identities(const Grid3& g, const FlowState& minus, const FlowState& centre,
                                             const FlowState& plus, const VecField& V, const ModulationFrame& fm,
                                             const ModulationFrame& fc, const ModulationFrame& fp, double h,
                                             int nu_order);

/// Every identity evaluated on one synthetic stencil.
std::vector<IdentityRow> identity_suite(const Grid3& g, const SyntheticFlow& flow, const TimeRescaling& rs,
                                        double tau, double h, double alpha, int nu_order);

struct VerifyConfig {
    std::uint64_t seed = 42;
    double amplitude = 0.1;
    double half_width = 2.0;
    std::vector<int> spatial_n{33, 65, 129};
    int temporal_n = 25;
    std::vector<double> temporal_h{0.04, 0.02, 0.01};
    std::vector<double> amplitude_levels{0.1, 0.05, 0.025};
    double frame_tau = 1.0;
    int nu_order = 1;
    double exact_tol = 1e-12;

    void validate() const;
};

struct IdentityConvergence {
    std::string name;
    IdentityKind kind = IdentityKind::Exact;
    int order = 0;
    std::vector<double> params;
    std::vector<double> residuals;
    double min_ratio = 0.0;       ///< smallest residual reduction between consecutive levels
    double observed_order = 0.0;  ///< log2 of min_ratio (0 for exact items)
    double calibrated_constant = 0.0;
    bool pass = false;
};

/// Runs the suite at every level of `cfg` and judges each identity.
std::vector<IdentityConvergence> identity_convergence(const VerifyConfig& cfg, const TimeRescaling& rs,
                                                      double alpha, std::vector<IdentityRow>* raw = nullptr);

void write_identity_csv(std::ostream& os, const std::vector<IdentityRow>& rows);
void write_convergence_csv(std::ostream& os, const std::vector<IdentityConvergence>& rows);

struct PropagationReport {
    std::vector<double> tau;
    std::vector<double> radius;
    double threshold = 0.0;
    double K_fit = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double worst_excess = 0.0;  ///< max of r - (1 + K_fit tau + 3 dx)
    double c_max0 = 0.0;        ///< wave-speed bound at the first snapshot
    bool within_cone = false;
    bool empty_support = false;
};

/// Needs >= 5 snapshots; throws WindowTooShort.
PropagationReport support_and_propagation(const RunLedger& led, double threshold);

struct QuantityFit {
    std::string quantity;
    double exponent = 0.0;
    double r2 = 0.0;
    double tau_lo = 0.0, tau_hi = 0.0;
    bool skipped = false;  ///< identically zero data
};

struct CoercivityRow {
    MultiIndex nu{};
    double theta = 0.0;  ///< max over snapshots of LHS / RHS
    double grad = 0.0;
    double div = 0.0;
    double final_theta = 0.0, final_grad = 0.0, final_div = 0.0;
};

struct DecayReport {
    QuantityFit BN_V;       ///< log(B^N[V] / (1 + tau^2)) against tau
    double target = 0.0;    ///< -2 mu0
    bool decay_pass = false;
    double SN_plateau = 0.0;
    double SN_final = 0.0;
    QuantityFit SN_tail;    ///< log S^N over the trailing half
    bool bounded_pass = false;
    std::vector<CoercivityRow> coercivity;
    double coercivity_constant = 0.0;
    bool coercivity_pass = false;
    double C1 = 0.0, C2 = 0.0;  ///< norm-energy equivalence constants
};

struct DecayOptions {
    double tau_min = 2.0;          ///< fits exclude earlier snapshots
    double window_fraction = 0.5;  ///< trailing fraction of [0, tau_end] used by the fits
    double plateau_tau = 1.0;      ///< S^N plateau read at the last snapshot with tau <= this
    double coercivity_max = 10.0;
};

/// Throws WindowTooShort when tau_end mu0 < 5 or the window holds fewer than 3 snapshots.
DecayReport decay_and_coercivity(const RunLedger& led, const ExponentSet& exps, const DecayOptions& opt = {});

}  // namespace affinegas
