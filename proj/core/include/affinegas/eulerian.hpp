#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "affinegas/evolver.hpp"

namespace affinegas {

struct FieldSample {
    double rho = 0.0;
    Vec3 u{};
    double T = 0.0;
};

/// Eulerian fields (rho, u, T) as functions of (t, x).
class EulerianModel {
public:
    virtual ~EulerianModel() = default;
    virtual double alpha() const = 0;
    /// Evaluator for a fixed time.
    virtual std::function<FieldSample(const Vec3&)> instant(double t) const = 0;
};

/// rho_A = e^{-|A^{-1}x|^2/2} / det A, u_A = A' A^{-1} x, T_A = C̄ (det A)^{-1/alpha}.
class AffineFields : public EulerianModel {
public:
    /// `precise` re-integrates the ODE to each requested time instead of using dense output.
    explicit AffineFields(std::shared_ptr<const AffineTrajectory> traj, bool precise = true);
    double alpha() const override { return traj_->params.alpha; }
    std::function<FieldSample(const Vec3&)> instant(double t) const override;
    double temperature(double t) const;

private:
    std::shared_ptr<const AffineTrajectory> traj_;
    bool precise_;
};

/// Constant rho and T with zero velocity.
class RestState : public EulerianModel {
public:
    RestState(double rho, double T, double alpha) : rho_(rho), T_(T), alpha_(alpha) {}
    double alpha() const override { return alpha_; }
    std::function<FieldSample(const Vec3&)> instant(double) const override {
        return [r = rho_, T = T_](const Vec3&) { return FieldSample{r, {0.0, 0.0, 0.0}, T}; };
    }

private:
    double rho_, T_, alpha_;
};

std::vector<FieldSample> affine_fields_eval(std::shared_ptr<const AffineTrajectory> traj, double t,
                                            const std::vector<Vec3>& points);

struct ResidualReport {
    double t = 0.0;
    double dx = 0.0;
    double dt_probe = 0.0;
    int n = 0;
    double mass_max = 0.0, mass_l2 = 0.0;
    double momentum_max = 0.0, momentum_l2 = 0.0;
    double energy_max = 0.0, energy_l2 = 0.0;
};

/// Multiplies the fields at the evaluation instant only; the time probes stay clean.
struct FieldCorruption {
    double temperature_factor = 1.0;
};

/// Residuals of mass, momentum and energy on the grid read as Eulerian coordinates.
/// Time derivatives: centred probes at t +- dt and t +- dt/2 combined by Richardson.
ResidualReport eulerian_residual(const EulerianModel& model, double t, const Grid3& grid, double dt_probe,
                                 FieldCorruption corruption = {});

/// max |T_A^alpha det A / C̄^alpha - 1| over the trajectory nodes.
double temperature_invariant_drift(const AffineTrajectory& traj);

struct LagrangianFields {
    Field f;            ///< Lagrangian density
    Field T;            ///< Lagrangian temperature
    double momentum_residual = 0.0;  ///< max-norm residual of the Lagrangian momentum equation
    double momentum_scale = 0.0;     ///< max |f d_tt zeta| for normalisation
    double mass = 0.0;               ///< integral of f det(D zeta)
};

/// Physical fields of a perturbed state at the frame's time; `accel` is theta_tau_tau.
LagrangianFields lagrangian_reconstruct(const Grid3& g, const FlowState& s, const VecField& accel,
                                        const ModulationFrame& frame, const AffineTrajectory& traj,
                                        const WeightProfiles& p);

struct InitialData {
    std::vector<Vec3> x;      ///< zeta_0(y) at each node
    std::vector<double> rho;  ///< rho_0(zeta_0(y))
    std::vector<double> T;    ///< T_0(zeta_0(y))
};

/// Eulerian initial density and temperature pushed through zeta_0 = A(0)(y + theta_0).
InitialData initial_data_map(const Grid3& g, const VecField& theta0, const WeightProfiles& p,
                             const AffineParams& params);

}  // namespace affinegas
