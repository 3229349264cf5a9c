#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "affinegas/affine.hpp"
#include "affinegas/error.hpp"
#include "affinegas/time_frames.hpp"
#include "support.hpp"

using namespace affinegas;
using testing::max_diff;

namespace {

AffineParams params(const Mat3& A0, const Mat3& A0dot, double Tbar, double alpha) {
    AffineParams p;
    p.A0 = A0;
    p.A0dot = A0dot;
    p.Tbar = Tbar;
    p.alpha = alpha;
    return p;
}

// a'' = cbar a^{-3/alpha - 1} by classical RK4 with a fixed step.
double scalar_reference(double a0, double v0, double cbar, double alpha, double t_end, int steps) {
    const double h = t_end / steps;
    auto acc = [&](double a) { return cbar * std::pow(a, -3.0 / alpha - 1.0); };
    double a = a0, v = v0;
    for (int k = 0; k < steps; ++k) {
        const double k1a = v, k1v = acc(a);
        const double k2a = v + 0.5 * h * k1v, k2v = acc(a + 0.5 * h * k1a);
        const double k3a = v + 0.5 * h * k2v, k3v = acc(a + 0.5 * h * k2a);
        const double k4a = v + h * k3v, k4v = acc(a + h * k3a);
        a += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return a;
}

}  // namespace

TEST_CASE("affine_rhs closed-form values") {
    CHECK(max_diff(affine_rhs(Mat3::identity(), params(Mat3::identity(), {}, 1.0, 1.5)), Mat3::identity()) < 1e-15);

    const Mat3 r = affine_rhs(Mat3::diag(2, 2, 2), params(Mat3::identity(), {}, 1.0, 3.0));
    CHECK(max_diff(r, Mat3::diag(0.25, 0.25, 0.25)) < 1e-15);

    const Mat3 q = affine_rhs(Mat3::diag(1, 1, 2), params(Mat3::identity(), {}, 2.0, 1.5));
    const double s = 2.0 * std::pow(2.0, -2.0 / 3.0);
    CHECK(max_diff(q, Mat3::diag(s, s, 0.5 * s)) < 1e-15);

    CHECK_THROWS_AS(affine_rhs(Mat3::diag(1, 1, -1), params(Mat3::identity(), {}, 1.0, 1.5)), Error);
}

TEST_CASE("cbar uses the initial determinant") {
    const AffineParams p = params(Mat3::diag(2, 1, 1), {}, 3.0, 2.0);
    CHECK(p.cbar() == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("ode_energy examples") {
    const AffineParams p = params(Mat3::identity(), {}, 1.0, 1.5);
    CHECK(ode_energy(Mat3::identity(), Mat3{}, p) == doctest::Approx(1.5).epsilon(1e-15));

    const Mat3 A = Mat3::diag(1.2, 0.9, 1.1), Ad = Mat3::diag(0.3, -0.2, 0.5);
    const double pot = ode_energy(A, Mat3{}, p);
    const double kin1 = ode_energy(A, Ad, p) - pot;
    const double kin2 = ode_energy(A, 2.0 * Ad, p) - pot;
    CHECK(kin2 == doctest::Approx(4.0 * kin1).epsilon(1e-14));
}

TEST_CASE("isotropic seed against the scalar reduction") {
    // alpha = 3/2, cbar = 1: a'' = a^{-3} with a(0) = a'(0) = 1 gives a^2 = 2t^2 + 2t + 1.
    const AffineParams p = params(Mat3::identity(), Mat3::identity(), 1.0, 1.5);
    const AffineTrajectory tr = integrate_affine(p, 10.0, 1e-10);
    REQUIRE(tr.status == TrajectoryStatus::Completed);
    const double exact = std::sqrt(2.0 * 100.0 + 20.0 + 1.0);
    const AffineState s = tr.eval_precise(10.0);
    CHECK(max_diff(s.A, Mat3::diag(exact, exact, exact)) < 1e-8 * exact);
    CHECK(scalar_reference(1.0, 1.0, 1.0, 1.5, 10.0, 200000) == doctest::Approx(exact).epsilon(1e-10));

    const AffineParams p3 = params(Mat3::identity(), Mat3::identity(), 1.0, 3.0);
    const double a3 = scalar_reference(1.0, 1.0, 1.0, 3.0, 10.0, 200000);
    const AffineState s3 = integrate_affine(p3, 10.0, 1e-10).eval_precise(10.0);
    CHECK(max_diff(s3.A, Mat3::diag(a3, a3, a3)) < 1e-8 * a3);
}

TEST_CASE("symmetric data stays symmetric") {
    Mat3 A0 = Mat3::diag(1.0, 1.3, 0.8);
    A0(0, 1) = A0(1, 0) = 0.2;
    A0(1, 2) = A0(2, 1) = -0.1;
    const AffineTrajectory tr = integrate_affine(params(A0, {}, 1.0, 1.5), 50.0, 1e-10);
    double worst = 0.0;
    for (const Mat3& A : tr.A) worst = std::max(worst, max_diff(A, transpose(A)) / frobenius(A));
    CHECK(worst < 1e-9);
}

TEST_CASE("energy is conserved and det grows like t^3") {
    Mat3 A0 = Mat3::identity();
    A0(0, 1) = 0.1;
    A0(2, 2) = 1.2;
    const AffineParams p = params(A0, Mat3::diag(0.5, 0.3, 0.4), 1.0, 1.5);
    const AffineTrajectory tr = integrate_affine(p, 100.0, 1e-10);
    const double E0 = ode_energy(tr.A.front(), tr.Adot.front(), p);
    double drift = 0.0;
    for (std::size_t k = 0; k < tr.t.size(); ++k)
        drift = std::max(drift, std::fabs(ode_energy(tr.A[k], tr.Adot[k], p) - E0) / E0);
    CHECK(drift <= 1e-8);
    const double ratio = tr.detA.back() / (1.0 + 1e6);
    CHECK(std::isfinite(ratio));
    CHECK(ratio > 0.0);
    for (std::size_t k = 1; k < tr.t.size(); ++k)
        if (tr.t[k] > 1.0) CHECK(tr.detA[k] >= tr.detA[k - 1]);
}

TEST_CASE("dense output matches re-integration") {
    const AffineParams p = params(Mat3::identity(), Mat3::diag(0.2, 0.4, 0.6), 1.0, 2.0);
    const AffineTrajectory tr = integrate_affine(p, 20.0, 1e-10);
    const AffineState a = tr.eval(7.3), b = tr.eval_precise(7.3);
    CHECK(max_diff(a.A, b.A) < 1e-6 * frobenius(b.A));
    CHECK_THROWS_AS(tr.eval(21.0), Error);
}

TEST_CASE("free linear motion has exact asymptotics") {
    AffineParams p = params(Mat3::identity(), Mat3::identity(), 1.0, 1.5);
    p.force_scale = 0.0;
    const AffineTrajectory tr = integrate_affine(p, 200.0, 1e-10);
    const AsymptoticFit fit = asymptotic_fit(tr);
    CHECK(max_diff(fit.A1_est, Mat3::identity()) < 1e-12);
    CHECK(fit.mu1_est == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& [t, r] : fit.ratio_series)
        if (t >= 100.0) CHECK(r == doctest::Approx(1.0).epsilon(0.04));
    CHECK_THROWS_AS(asymptotic_fit(integrate_affine(p, 50.0, 1e-10)), Error);
}

TEST_CASE("derivative decay exponent on a generic seed") {
    Mat3 A0 = Mat3::identity();
    A0(0, 1) = 0.1;
    A0(2, 2) = 1.2;
    const AffineTrajectory tr = integrate_affine(params(A0, Mat3::diag(0.5, 0.3, 0.4), 1.0, 1.5), 1000.0, 1e-10);
    CHECK(asymptotic_fit(tr).M_decay_exponent <= -3.0 / 1.5 + 0.3);
}

TEST_CASE("invalid parameters") {
    CHECK_THROWS_AS(params(Mat3::diag(1, 1, -1), {}, 1.0, 1.5).validate(), Error);
    CHECK_THROWS_AS(params(Mat3::identity(), {}, -1.0, 1.5).validate(), Error);
    CHECK_THROWS_AS(params(Mat3::identity(), {}, 1.0, 0.0).validate(), Error);
}

TEST_CASE("trajectory CSV header") {
    const AffineTrajectory tr = integrate_affine(params(Mat3::identity(), {}, 1.0, 1.5), 1.0, 1e-8);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    CHECK(os.str().rfind("t,", 0) == 0);
}

TEST_CASE("frozen trajectory gives tau = t") {
    AffineParams p = params(Mat3::identity(), {}, 1.0, 1.5);
    p.force_scale = 0.0;
    const auto tr = std::make_shared<AffineTrajectory>(integrate_affine(p, 20.0, 1e-10));
    const TimeRescaling rs = build_rescaling(tr);
    for (double t : {0.0, 0.5, 3.0, 19.0}) CHECK(rs.tau_at(t) == doctest::Approx(t).epsilon(1e-12));
}

TEST_CASE("mu = 1 + t gives tau = log(1 + t)") {
    AffineParams p = params(Mat3::identity(), Mat3::identity(), 1.0, 1.5);
    p.force_scale = 0.0;
    const auto tr = std::make_shared<AffineTrajectory>(integrate_affine(p, 100.0, 1e-10));
    const TimeRescaling rs = build_rescaling(tr);
    for (double t : {0.1, 1.0, 10.0, 99.0}) {
        CHECK(std::fabs(rs.tau_at(t) - std::log1p(t)) < 1e-9);
        CHECK(rs.t_at(std::log1p(t)) == doctest::Approx(t).epsilon(1e-9));
        CHECK(rs.mu_at_t(t) == doctest::Approx(1.0 + t).epsilon(1e-12));
        CHECK(rs.mu_tau_at_t(t) == doctest::Approx(1.0 + t).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rs.tau_at(101.0), Error);
}

TEST_CASE("expanding run: tau grows like log t and mu ~ exp(mu1 tau)") {
    const AffineParams p = params(Mat3::identity(), Mat3::diag(0.5, 0.3, 0.4), 1.0, 1.5);
    const auto tr = std::make_shared<AffineTrajectory>(integrate_affine(p, 1e4, 1e-10));
    const TimeRescaling rs = build_rescaling(tr);
    const Mu1Estimate m = estimate_mu1(*tr, rs);
    CHECK(m.mu1 > 0.0);
    CHECK_FALSE(m.pre_asymptotic);
    const double r1 = rs.mu_at_t(1e3) * std::exp(-m.mu1 * rs.tau_at(1e3));
    const double r2 = rs.mu_at_t(1e4) * std::exp(-m.mu1 * rs.tau_at(1e4));
    CHECK(r1 / r2 == doctest::Approx(1.0).epsilon(0.05));
    const double slope = (rs.tau_at(1e4) - rs.tau_at(1e3)) / std::log(10.0);
    CHECK(slope * m.mu1 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("exponent examples") {
    const ExponentSet a = exponents(1.5, 1.0, 1.0);
    CHECK(a.delta == doctest::Approx(1.0));
    CHECK(a.mu0 == doctest::Approx(0.5));
    const ExponentSet b = exponents(3.0, 0.5, 2.0);
    CHECK(b.delta == doctest::Approx(0.5));
    CHECK(b.mu0 == doctest::Approx(0.5));
    CHECK_NOTHROW(exponents(1.0, 1.9, 0.7));
    CHECK_THROWS_AS(exponents(1.0, 2.0, 0.7), Error);
    CHECK_THROWS_AS(exponents(3.0, 1.2, 0.7), Error);
    CHECK_THROWS_AS(exponents(1.5, 0.0, 1.0), Error);
    CHECK_THROWS_AS(exponents(1.5, 1.0, 0.0), Error);
    CHECK(default_sigma(1.5) == doctest::Approx(1.0));
}
