#pragma once

#include <cmath>

#include "affinegas/tensor.hpp"

namespace testing {

inline double max_diff(const affinegas::Mat3& a, const affinegas::Mat3& b) {
    double m = 0.0;
    for (int k = 0; k < 9; ++k) m = std::fmax(m, std::fabs(a.a[k] - b.a[k]));
    return m;
}

/// Rotation about a unit axis by angle t (Rodrigues).
inline affinegas::Mat3 rotation(affinegas::Vec3 u, double t) {
    const double c = std::cos(t), s = std::sin(t), n = affinegas::norm(u);
    for (double& x : u) x /= n;
    affinegas::Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (1.0 - c) * u[i] * u[j] + (i == j ? c : 0.0);
    r(0, 1) -= s * u[2];
    r(0, 2) += s * u[1];
    r(1, 0) += s * u[2];
    r(1, 2) -= s * u[0];
    r(2, 0) -= s * u[1];
    r(2, 1) += s * u[0];
    return r;
}

}  // namespace testing

#include <vector>

#include "affinegas/grid.hpp"

namespace testing {

/// Fourth-order centred first derivative; values outside the box read as zero.
/// Only meaningful for fields that vanish within two nodes of every face.
inline affinegas::Field interior_diff(const affinegas::Grid3& g, const affinegas::Field& f, int axis) {
    affinegas::Field out(f.size(), 0.0);
    const double h = g.dx();
    auto get = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= g.n || j >= g.n || k >= g.n) return 0.0;
        return f[g.idx(i, j, k)];
    };
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                int d[3] = {0, 0, 0};
                d[axis] = 1;
                const double p1 = get(i + d[0], j + d[1], k + d[2]), m1 = get(i - d[0], j - d[1], k - d[2]);
                const double p2 = get(i + 2 * d[0], j + 2 * d[1], k + 2 * d[2]),
                             m2 = get(i - 2 * d[0], j - 2 * d[1], k - 2 * d[2]);
                out[g.idx(i, j, k)] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
            }
    return out;
}

}  // namespace testing
