#pragma once

#include <memory>
#include <vector>

#include "affinegas/affine.hpp"

namespace affinegas {

/// t <-> tau with dtau/dt = 1/mu, mu = (det A)^{1/3}.
class TimeRescaling {
public:
    std::shared_ptr<const AffineTrajectory> traj;
    std::vector<double> t_nodes;
    std::vector<double> tau_nodes;
    std::vector<double> mu;
    std::vector<double> mu_tau;

    double tau_end() const { return tau_nodes.back(); }
    double tau_at(double t) const;
    double t_at(double tau) const;
    double mu_at_t(double t) const;
    /// mu_tau = mu * mu_t = (mu^2 / 3) tr(A' A^{-1}).
    double mu_tau_at_t(double t) const;
};

/// Adaptive Simpson per trajectory interval to 1e-10 relative; throws QuadratureFailure.
TimeRescaling build_rescaling(std::shared_ptr<const AffineTrajectory> traj);

struct ExponentSet {
    double sigma = 0.0;
    double delta = 0.0;
    double mu1 = 0.0;
    double mu0 = 0.0;
    double alpha = 0.0;
};

/// Upper end of the admissible sigma interval, min(3/alpha, 2).
inline double sigma_upper(double alpha) { return std::fmin(3.0 / alpha, 2.0); }
/// Centre of the admissible interval.
inline double default_sigma(double alpha) { return 0.5 * sigma_upper(alpha); }

/// Throws SigmaOutOfRange or OutOfRange (mu1 <= 0).
ExponentSet exponents(double alpha, double sigma_choice, double mu1);

struct Mu1Estimate {
    double mu1 = 0.0;
    double ratio_at_end = 0.0;  ///< mu_tau / mu at the final node
    bool pre_asymptotic = false;
};

/// (det A1)^{1/3} cross-checked against mu_tau/mu at the last node (5% threshold).
Mu1Estimate estimate_mu1(const AffineTrajectory& traj, const TimeRescaling& rs);

}  // namespace affinegas
