#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "affinegas/error.hpp"
#include "affinegas/modulation.hpp"
#include "support.hpp"

using namespace affinegas;
using testing::max_diff;

namespace {

TimeRescaling rescaling(const Mat3& A0, const Mat3& A0dot, double alpha, double t_end, double force = 1.0) {
    AffineParams p;
    p.A0 = A0;
    p.A0dot = A0dot;
    p.alpha = alpha;
    p.force_scale = force;
    return build_rescaling(std::make_shared<AffineTrajectory>(integrate_affine(p, t_end, 1e-10)));
}

Mat3 reference_A0() {
    Mat3 A0 = Mat3::identity();
    A0(0, 1) = 0.1;
    A0(2, 2) = 1.2;
    return A0;
}

}  // namespace

TEST_CASE("lambda_of examples") {
    CHECK(max_diff(lambda_of(Mat3::diag(3, 3, 3)), Mat3::identity()) < 1e-15);
    const Mat3 L = lambda_of(Mat3::diag(1, 2, 4));
    CHECK(max_diff(L, Mat3::diag(4, 1, 0.25)) < 1e-14);
    CHECK(det(L) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("isotropic trajectory has trivial frames") {
    const TimeRescaling rs = rescaling(Mat3::identity(), Mat3::identity(), 1.5, 100.0);
    const ModulationFrame f = frame_at(1.0, rs);
    CHECK(max_diff(f.Lambda, Mat3::identity()) < 1e-12);
    for (double d : f.eig.values) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_abs(f.GammaStar) < 1e-12);
    CHECK(max_abs(f.LambdaTau) < 1e-9);
}

TEST_CASE("frame invariants along an anisotropic trajectory") {
    const TimeRescaling rs = rescaling(reference_A0(), Mat3::diag(0.5, 0.3, 0.4), 1.5, 1000.0);
    Mat3 prev = Mat3::identity();
    bool first = true;
    for (double tau : {0.0, 0.3, 1.0, 2.5, 4.0}) {
        const ModulationFrame f = frame_at(tau, rs, first ? nullptr : &prev);
        first = false;
        prev = f.eig.rotation;
        CHECK(det(f.Lambda) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(max_diff(f.Lambda, transpose(f.Lambda)) < 1e-12);
        CHECK(f.eig.values[2] > 0.0);
        CHECK(std::fabs(trace(f.GammaStar)) < 1e-10);
        const Vec3& d = f.eig.values;
        const Mat3 back = transpose(f.eig.rotation) * Mat3::diag(d[0], d[1], d[2]) * f.eig.rotation;
        CHECK(max_diff(back, f.Lambda) < 1e-10);
        CHECK(max_diff(f.Lambda * f.LambdaInv, Mat3::identity()) < 1e-12);

        // O^T_tau O - O^T O_tau is antisymmetric.
        const double h = 1e-4;
        const Mat3 Op = frame_at(tau + h, rs).O, Om = frame_at(std::max(tau - h, 0.0), rs).O;
        const Mat3 Ot = (1.0 / (tau >= h ? 2.0 * h : h)) * (Op - (tau >= h ? Om : f.O));
        const Mat3 S = transpose(Ot) * f.O - transpose(f.O) * Ot;
        CHECK(max_diff(S, -1.0 * transpose(S)) < 1e-12);

        // d/dtau of the inverse.
        if (tau >= h) {
            const Mat3 inv_tau = (1.0 / (2.0 * h)) * (frame_at(tau + h, rs).LambdaInv - frame_at(tau - h, rs).LambdaInv);
            CHECK(max_diff(inv_tau, -1.0 * (f.LambdaInv * f.LambdaTau * f.LambdaInv)) < 1e-6);
        }
    }
    CHECK_THROWS_AS(frame_at(rs.tau_end() + 1.0, rs), Error);
}

TEST_CASE("frozen frames: unit constants and vanishing derivatives") {
    const TimeRescaling rs = rescaling(Mat3::identity(), Mat3{}, 1.5, 30.0, 0.0);
    std::vector<double> taus;
    for (int k = 0; k <= 40; ++k) taus.push_back(0.5 * k);
    const auto frames = frames_along(taus, rs);
    ExponentSet e;
    e.mu1 = 1.0;
    const BoundReport b = verify_frame_bounds(frames, e);
    CHECK(b.lambda_norm_sum == doctest::Approx(2.0));
    CHECK(b.eig_sum == doctest::Approx(6.0));
    CHECK(b.quad_lower == doctest::Approx(1.0));
    CHECK(b.quad_upper == doctest::Approx(1.0));
    CHECK(b.lambda_tau.identically_zero);
    CHECK(b.eig_derivs.identically_zero);
    CHECK(b.lambda_tau.pass);
    CHECK(b.eig_derivs.pass);

    std::vector<ModulationFrame> few(frames.begin(), frames.begin() + 5);
    CHECK_THROWS_AS(verify_frame_bounds(few, e), Error);
    std::vector<ModulationFrame> short_span(frames.begin(), frames.begin() + 12);
    CHECK_THROWS_AS(verify_frame_bounds(short_span, e), Error);
}

TEST_CASE("expanding run: limiting quadratic-form constants and exponential decay") {
    const TimeRescaling rs = rescaling(reference_A0(), Mat3::diag(0.5, 0.3, 0.4), 1.5, 1e10);
    const Mu1Estimate m = estimate_mu1(*rs.traj, rs);
    ExponentSet e;
    e.mu1 = m.mu1;
    std::vector<double> taus;
    for (double t = 10.0; t <= 20.0 + 1e-12; t += 0.25) taus.push_back(t);
    const BoundReport b = verify_frame_bounds(frames_along(taus, rs), e, 10.0);

    // Eigenvalue extremes of (det A1)^{2/3} A1^{-1} A1^{-T}, A1 the terminal velocity.
    const Mat3 A1 = rs.traj->Adot.back();
    const Mat3 inv = inverse_unchecked(A1);
    const Mat3 Linf = std::pow(det(A1), 2.0 / 3.0) * (inv * transpose(inv));
    const SymEig3 le = sym_eig3(Linf);
    CHECK(b.quad_lower == doctest::Approx(1.0 / le.values[0]).epsilon(1e-3));
    CHECK(b.quad_upper == doctest::Approx(1.0 / le.values[2]).epsilon(1e-3));
    CHECK(b.lambda_tau.rate <= -0.75 * m.mu1);
    CHECK(b.eig_derivs.rate <= -0.75 * m.mu1);
}

TEST_CASE("frames CSV columns") {
    const TimeRescaling rs = rescaling(Mat3::identity(), Mat3::identity(), 1.5, 10.0);
    std::ostringstream os;
    write_frames_csv(os, frames_along({0.0, 0.5}, rs));
    CHECK(os.str().rfind("tau,mu,d1,d2,d3,normLambdaTau,normGammaStar\n", 0) == 0);
}
