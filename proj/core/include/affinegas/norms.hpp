#pragma once

#include <array>
#include <vector>

#include "affinegas/kinematics.hpp"
#include "affinegas/modulation.hpp"

namespace affinegas {

using MultiIndex = std::array<int, 3>;

/// All multi-indices with |nu| <= order, sorted by order then lexicographically.
std::vector<MultiIndex> multi_indices(int order);
inline int order_of(const MultiIndex& nu) { return nu[0] + nu[1] + nu[2]; }

/// d^nu F for every |nu| <= order, in multi_indices(order) sequence.
std::vector<Field> derivatives(const Grid3& g, const Field& f, int order);
std::vector<VecField> derivatives(const Grid3& g, const VecField& F, int order);

/// Frame and exponent data needed to weight the functionals.
struct NormContext {
    double mu = 1.0;
    double mu_tau = 0.0;
    double sigma = 1.0;
    double delta = 1.0;
    double cbar = 1.0;
    double alpha = 1.5;
    Mat3 Lambda = Mat3::identity();
    Mat3 LambdaInv = Mat3::identity();
    SymEig3 eig{{1.0, 1.0, 1.0}, Mat3::identity()};
};

NormContext make_context(const ModulationFrame& f, double sigma, double delta, double cbar, double alpha);

struct PerNu {
    MultiIndex nu{};
    double theta_sq = 0.0;     ///< ||d^nu theta||^2
    double V_sq = 0.0;         ///< ||d^nu V||^2
    double grad_eta_sq = 0.0;  ///< ||grad_eta d^nu theta||^2
    double div_eta_sq = 0.0;   ///< ||div_eta d^nu theta||^2
    double curl_V_sq = 0.0;
    double curl_theta_sq = 0.0;
    double energy = 0.0;       ///< this nu's contribution to E^N
    double dissipation = 0.0;  ///< this nu's contribution to D^N
};

struct NormValues {
    double SN_inst = 0.0;  ///< instantaneous S^N (the ledger keeps the running sup)
    double BN_V = 0.0;
    double BN_theta = 0.0;
    double EN = 0.0;
    double DN = 0.0;
    double CNm1 = 0.0;
    std::vector<PerNu> per_nu;
};

/// Sum over i, j of d_i / d_j N_ij^2 with N = P G P^T, G_{rj} = X_{jr}.
double weighted_modulated_sq(const Mat3& X, const SymEig3& eig);

/// S^N, B^N, E^N, D^N and C^{N-1} for one state. `beta` may be empty (treated as 0).
NormValues compute_norms(const Grid3& g, const VecField& theta, const VecField& V, const Kinematics& kin,
                         const Field& beta, const NormContext& ctx, int N);

}  // namespace affinegas
