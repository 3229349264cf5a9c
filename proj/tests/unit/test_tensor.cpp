#include <doctest.h>

#include "affinegas/diagnostics.hpp"
#include "affinegas/error.hpp"
#include "affinegas/tensor.hpp"
#include "support.hpp"

using namespace affinegas;
using testing::max_diff;

TEST_CASE("kinematics of I and 2I") {
    const Kinematics3 k = mat3_kinematics(Mat3::identity());
    CHECK(k.det == 1.0);
    CHECK(max_diff(k.inv, Mat3::identity()) == 0.0);
    CHECK(max_diff(k.cof, Mat3::identity()) == 0.0);

    const Kinematics3 k2 = mat3_kinematics(Mat3::diag(2, 2, 2));
    CHECK(k2.det == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(max_diff(k2.inv, Mat3::diag(0.5, 0.5, 0.5)) < 1e-15);
    CHECK(max_diff(k2.cof, Mat3::diag(4, 4, 4)) < 1e-14);
}

TEST_CASE("inverse agrees with a cofactor expansion written out by hand") {
    Uniform u(7);
    for (int trial = 0; trial < 50; ++trial) {
        Mat3 m = Mat3::identity();
        for (double& x : m.a) x += 0.4 * u.in(-1, 1);
        const double a = m(0, 0), b = m(0, 1), c = m(0, 2), d = m(1, 0), e = m(1, 1), f = m(1, 2), g = m(2, 0),
                     h = m(2, 1), i = m(2, 2);
        const double D = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
        const Mat3 oracle = Mat3::from({(e * i - f * h) / D, (c * h - b * i) / D, (b * f - c * e) / D,
                                        (f * g - d * i) / D, (a * i - c * g) / D, (c * d - a * f) / D,
                                        (d * h - e * g) / D, (b * g - a * h) / D, (a * e - b * d) / D});
        const Kinematics3 k = mat3_kinematics(m);
        CHECK(max_diff(k.inv, oracle) < 1e-12);
        CHECK(max_diff(k.cof, k.det * transpose(k.inv)) < 1e-12);
        CHECK(max_diff(m * k.inv, Mat3::identity()) < 1e-12);
    }
}

TEST_CASE("singular matrix is rejected") {
    Mat3 m = Mat3::diag(1, 1, 0);
    CHECK_THROWS_AS(mat3_kinematics(m), Error);
    try {
        mat3_kinematics(m);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularMatrix);
    }
}

TEST_CASE("sym_eig3 trivial and diagonal cases") {
    const SymEig3 e = sym_eig3(Mat3::identity());
    for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(det(e.rotation) == doctest::Approx(1.0));

    const SymEig3 d = sym_eig3(Mat3::diag(1, 3, 2));
    CHECK(d.values[0] == doctest::Approx(3.0));
    CHECK(d.values[1] == doctest::Approx(2.0));
    CHECK(d.values[2] == doctest::Approx(1.0));
    for (int r = 0; r < 3; ++r) {
        double big = 0.0;
        for (int k = 0; k < 3; ++k) big = std::max(big, std::fabs(d.rotation(r, k)));
        CHECK(big == doctest::Approx(1.0));
    }
}

TEST_CASE("sym_eig3 recovers a constructed spectrum") {
    const Mat3 R = testing::rotation({1.0, 2.0, -0.5}, 0.7);
    const Mat3 S = R * Mat3::diag(5, 1, 1) * transpose(R);
    const SymEig3 e = sym_eig3(S);
    CHECK(e.values[0] == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(e.values[2] == doctest::Approx(1.0).epsilon(1e-13));
    const Mat3 back = transpose(e.rotation) * Mat3::diag(e.values[0], e.values[1], e.values[2]) * e.rotation;
    CHECK(max_diff(back, S) < 1e-13);
    CHECK(max_diff(e.rotation * transpose(e.rotation), Mat3::identity()) < 1e-13);
    CHECK(det(e.rotation) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("sym_eig3 reconstructs random SPD matrices") {
    Uniform u(11);
    for (int trial = 0; trial < 100; ++trial) {
        Mat3 b;
        for (double& x : b.a) x = u.in(-1, 1);
        const Mat3 S = b * transpose(b) + 0.1 * Mat3::identity();
        const SymEig3 e = sym_eig3(S);
        CHECK(e.values[0] >= e.values[1]);
        CHECK(e.values[1] >= e.values[2]);
        const Mat3 back = transpose(e.rotation) * Mat3::diag(e.values[0], e.values[1], e.values[2]) * e.rotation;
        CHECK(max_diff(back, S) < 1e-12);
        CHECK(sym3_max_eigenvalue(S) == doctest::Approx(e.values[0]).epsilon(1e-10));
    }
}

TEST_CASE("sym_eig3 input validation") {
    Mat3 ns = Mat3::identity();
    ns(0, 1) = 0.5;
    CHECK_THROWS_AS(sym_eig3(ns), Error);
    CHECK_THROWS_AS(sym_eig3(Mat3::diag(1, -1, 2)), Error);
    CHECK_NOTHROW(sym_eig3_any(Mat3::diag(1, -1, 2)));
}

TEST_CASE("align_rotation follows the previous branch") {
    SymEig3 e = sym_eig3(Mat3::diag(3, 2, 1));
    Mat3 prev = Mat3::identity();
    prev(0, 0) = -1.0;
    prev(1, 1) = -1.0;
    align_rotation(e, prev);
    CHECK(max_diff(e.rotation, prev) < 1e-14);
}

TEST_CASE("polar_split examples") {
    const Polar p = polar_split(Mat3::diag(2, 2, 2));
    CHECK(p.mu == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(max_diff(p.o, Mat3::identity()) < 1e-15);

    const Polar q = polar_split(Mat3::diag(1, 2, 4));
    CHECK(q.mu == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(max_diff(q.o, Mat3::diag(0.5, 1, 2)) < 1e-15);

    Mat3 a = testing::rotation({0.3, -1.0, 0.2}, 1.1) * Mat3::diag(1, 3, 9);
    const Polar r = polar_split(a);
    CHECK(det(a) == doctest::Approx(27.0).epsilon(1e-13));
    CHECK(r.mu == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(det(r.o) == doctest::Approx(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(polar_split(Mat3::diag(1, 1, -1)), Error);
}

TEST_CASE("spectral norm of a diagonal matrix") {
    CHECK(spectral_norm(Mat3::diag(-3, 2, 1)) == doctest::Approx(3.0).epsilon(1e-14));
}
