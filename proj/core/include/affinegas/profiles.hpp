#pragma once

#include "affinegas/norms.hpp"

namespace affinegas {

struct WeightProfiles {
    Field w;           ///< e^{-|y|^2/2}, evaluated in closed form
    Field beta;
    VecField grad_beta;
    double lambda = 0.0;
    double beta_sobolev_sq = 0.0;  ///< discrete H^{N+1} norm squared
};

struct ProfileBundle {
    WeightProfiles profiles;
    VecField theta0;
    VecField V0;
    double data_norm = 0.0;  ///< S^N(theta0, V0) + B^N(V0) at tau = 0
};

/// exp(1/(r^2 - r0^2) + 1/r0^2) inside r < r0, zero outside.
double bump(double r, double r0 = 0.8);

/// Bumps scaled to 0.95 of the lambda and epsilon budgets on the discrete norms.
/// `ctx` supplies the tau = 0 weights. Throws BudgetInfeasible or ConfigInvalid.
ProfileBundle build_profiles(const Grid3& g, double lambda, double epsilon, int N, const NormContext& ctx = {});

/// Discrete sum over |nu| <= order of ||d^nu f||^2.
double sobolev_sq(const Grid3& g, const Field& f, int order);

}  // namespace affinegas
