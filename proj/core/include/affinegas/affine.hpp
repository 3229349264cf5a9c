#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "affinegas/tensor.hpp"

namespace affinegas {

struct AffineParams {
    Mat3 A0 = Mat3::identity();
    Mat3 A0dot;
    double Tbar = 1.0;
    double alpha = 1.5;
    /// Multiplies the pressure force; 0 gives free linear motion (test hook).
    double force_scale = 1.0;

    double cbar() const;
    /// Throws NonPositiveDeterminant or ConfigInvalid.
    void validate() const;
};

enum class TrajectoryStatus { Completed, Collapsed };

struct AffineState {
    Mat3 A;
    Mat3 Adot;
};

class AffineTrajectory {
public:
    AffineParams params;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    std::vector<double> t;
    std::vector<Mat3> A;
    std::vector<Mat3> Adot;
    std::vector<Mat3> Addot;
    std::vector<double> detA;

    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }

    /// Cubic Hermite dense output on (A, A'); throws OutOfRange.
    AffineState eval(double time) const;
    /// Re-integrates from the nearest earlier node at tolerance 1e-13.
    AffineState eval_precise(double time) const;

private:
    std::size_t interval(double time) const;
};

/// C̄ (det A)^{-1/α} A^{-T}; throws NonPositiveDeterminant.
Mat3 affine_rhs(const Mat3& A, const AffineParams& params);

/// ½ tr(A'^T A') + α C̄ (det A)^{-1/α}.
double ode_energy(const Mat3& A, const Mat3& Adot, const AffineParams& params);

/// Dormand-Prince 5(4) with PI control. Collapse sets status instead of throwing.
AffineTrajectory integrate_affine(const AffineParams& params, double t_end, double rel_tol);

/// One adaptive solve from (t0, state) to t1 without storing nodes.
AffineState propagate_affine(const AffineParams& params, double t0, const AffineState& state, double t1,
                             double rel_tol);

struct AsymptoticFit {
    Mat3 A1_est;
    double mu1_est = 0.0;
    std::vector<std::pair<double, double>> ratio_series;
    double M_decay_exponent = 0.0;
};

/// Requires t_end >= 100; throws TrajectoryTooShort.
AsymptoticFit asymptotic_fit(const AffineTrajectory& traj);

/// Max over [t_lo, t_hi] of the ratio series divided by its min, minus one.
double ratio_variation(const AsymptoticFit& fit, double t_lo, double t_hi);

/// CSV columns t, A[9], Adot[9], detA, energy.
void write_trajectory_csv(std::ostream& os, const AffineTrajectory& traj);

}  // namespace affinegas
