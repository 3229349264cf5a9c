#pragma once

#include <array>
#include <cmath>

namespace affinegas {

using Vec3 = std::array<double, 3>;

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    static Mat3 identity() { return diag(1.0, 1.0, 1.0); }
    static Mat3 diag(double d0, double d1, double d2) {
        Mat3 m;
        m(0, 0) = d0;
        m(1, 1) = d1;
        m(2, 2) = d2;
        return m;
    }
    static Mat3 from(const std::array<double, 9>& v) { return Mat3{v}; }
};

inline Mat3 operator+(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int k = 0; k < 9; ++k) r.a[k] = x.a[k] + y.a[k];
    return r;
}
inline Mat3 operator-(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int k = 0; k < 9; ++k) r.a[k] = x.a[k] - y.a[k];
    return r;
}
inline Mat3 operator*(double s, const Mat3& x) {
    Mat3 r;
    for (int k = 0; k < 9; ++k) r.a[k] = s * x.a[k];
    return r;
}
inline Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
    return r;
}
inline Vec3 operator*(const Mat3& x, const Vec3& v) {
    return {x(0, 0) * v[0] + x(0, 1) * v[1] + x(0, 2) * v[2],
            x(1, 0) * v[0] + x(1, 1) * v[1] + x(1, 2) * v[2],
            x(2, 0) * v[0] + x(2, 1) * v[1] + x(2, 2) * v[2]};
}

inline Mat3 transpose(const Mat3& x) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = x(j, i);
    return r;
}
inline double trace(const Mat3& x) { return x(0, 0) + x(1, 1) + x(2, 2); }
inline double det(const Mat3& x) {
    return x(0, 0) * (x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1)) -
           x(0, 1) * (x(1, 0) * x(2, 2) - x(1, 2) * x(2, 0)) +
           x(0, 2) * (x(1, 0) * x(2, 1) - x(1, 1) * x(2, 0));
}
inline double frobenius(const Mat3& x) {
    double s = 0.0;
    for (double v : x.a) s += v * v;
    return std::sqrt(s);
}
inline double max_abs(const Mat3& x) {
    double m = 0.0;
    for (double v : x.a) m = std::fmax(m, std::fabs(v));
    return m;
}
inline double dot(const Vec3& u, const Vec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Adjugate (transpose of the cofactor matrix); exact for any matrix.
Mat3 adjugate(const Mat3& m);

/// Inverse without singularity checks; caller guarantees det != 0.
inline Mat3 inverse_unchecked(const Mat3& m) { return (1.0 / det(m)) * adjugate(m); }

struct Kinematics3 {
    double det = 0.0;
    Mat3 inv;
    Mat3 cof;  ///< det * inv^T
};

/// Throws SingularMatrix when |det M| <= 1e-13 ||M||_F^3.
Kinematics3 mat3_kinematics(const Mat3& m);

/// S = P^T diag(values) P, values descending, rows of P are eigenvectors, det P = +1.
struct SymEig3 {
    Vec3 values{};
    Mat3 rotation;
};

/// Cyclic Jacobi. Throws NotSymmetric or NotPositiveDefinite.
SymEig3 sym_eig3(const Mat3& s);

/// Same decomposition without the definiteness requirement.
SymEig3 sym_eig3_any(const Mat3& s);

/// Reorders and re-signs the rows of `cur` (and its eigenvalues) to maximise overlap with `prev`.
void align_rotation(SymEig3& cur, const Mat3& prev);

/// Largest eigenvalue of a symmetric matrix in closed form.
double sym3_max_eigenvalue(const Mat3& s);

/// Spectral norm of an arbitrary 3x3 matrix.
inline double spectral_norm(const Mat3& m) {
    return std::sqrt(std::fmax(0.0, sym3_max_eigenvalue(transpose(m) * m)));
}

struct Polar {
    double mu = 0.0;
    Mat3 o;
};

/// A = mu O with mu = (det A)^{1/3}; throws NonPositiveDeterminant.
Polar polar_split(const Mat3& a);

}  // namespace affinegas
