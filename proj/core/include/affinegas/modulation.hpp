#pragma once

#include <iosfwd>
#include <vector>

#include "affinegas/time_frames.hpp"

namespace affinegas {

struct ModulationFrame {
    double tau = 0.0;
    double t = 0.0;
    double mu = 0.0;
    double mu_tau = 0.0;
    Mat3 Lambda;
    Mat3 LambdaInv;
    Mat3 LambdaTau;
    SymEig3 eig;   ///< Lambda = P^T diag(d) P
    Vec3 d_tau{};  ///< derivative of the eigenvalues
    Mat3 P_tau;    ///< derivative of P along the smooth branch
    Mat3 GammaStar;
    Mat3 O;
};

/// (det A)^{2/3} A^{-1} A^{-T}.
Mat3 lambda_of(const Mat3& A);

/// Throws OutOfRange. `prev` aligns the eigenvector rows with an earlier frame.
ModulationFrame frame_at(double tau, const TimeRescaling& rs, const Mat3* prev = nullptr);

/// Frames at each tau, eigenvectors aligned along the sequence.
std::vector<ModulationFrame> frames_along(const std::vector<double>& taus, const TimeRescaling& rs);

struct DecayFit {
    double rate = 0.0;      ///< fitted slope of log(value) against tau
    double constant = 0.0;  ///< max of value * exp(mu1 tau) over the window
    bool identically_zero = false;
    bool within_25pct = false;
    bool pass = false;  ///< rate <= -0.75 mu1, or identically zero
};

struct BoundReport {
    double lambda_norm_sum = 0.0;  ///< max ||Λ|| + ||Λ^{-1}||
    double eig_sum = 0.0;          ///< max Σ (d_i + 1/d_i)
    double quad_lower = 0.0;       ///< |w|^2 c <= <Λ^{-1}w,w>
    double quad_upper = 0.0;       ///< <Λ^{-1}w,w> <= C |w|^2
    double mu_ratio_lower = 0.0;   ///< min mu e^{-mu1 tau}
    double mu_ratio_upper = 0.0;   ///< max mu e^{-mu1 tau}
    DecayFit lambda_tau;
    DecayFit eig_derivs;  ///< Σ|∂_τ d_i| + ||∂_τ P||
};

/// Needs >= 10 frames spanning at least 10 in tau; throws InsufficientFrames.
BoundReport verify_frame_bounds(const std::vector<ModulationFrame>& frames, const ExponentSet& exps,
                                double fit_tau_min = 2.0);

/// CSV columns tau, mu, d1, d2, d3, normLambdaTau, normGammaStar.
void write_frames_csv(std::ostream& os, const std::vector<ModulationFrame>& frames);

}  // namespace affinegas
