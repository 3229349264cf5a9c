#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace affinegas {

using Field = std::vector<double>;
using VecField = std::array<Field, 3>;
using MatField = std::array<Field, 9>;  ///< component (i, j) stored at 3 * i + j

/// Uniform cube [-L, L]^3 with n nodes per axis, x index fastest.
struct Grid3 {
    double L = 1.0;
    int n = 17;

    /// Throws ConfigInvalid for even n, n < 17 or L <= 0.
    static Grid3 make(double half_width, int nodes);

    double dx() const { return 2.0 * L / double(n - 1); }
    std::size_t size() const { return std::size_t(n) * std::size_t(n) * std::size_t(n); }
    std::size_t idx(int i, int j, int k) const { return (std::size_t(k) * n + j) * n + i; }
    double coord(int i) const { return -L + double(i) * dx(); }

    Field scalar(double v = 0.0) const { return Field(size(), v); }
    VecField vec() const { return {scalar(), scalar(), scalar()}; }
    MatField mat() const;

    /// Distance in nodes to the nearest face.
    int face_distance(int i, int j, int k) const;
};

/// Sets the number of worker threads used by field kernels (>= 1).
void set_threads(int n);
int thread_count();

/// Fourth-order first derivative along `axis`; one-sided closures at the faces.
void diff(const Grid3& g, const Field& f, int axis, Field& out);
Field diff(const Grid3& g, const Field& f, int axis);

/// out(i, j) = d F_i / d y_j.
MatField jacobian(const Grid3& g, const VecField& F);
VecField gradient(const Grid3& g, const Field& f);

/// Trapezoid integral of f over the box.
double integrate(const Grid3& g, const Field& f);

/// Zeroes every node within `layers` nodes of a face.
void clamp_boundary(const Grid3& g, VecField& F, int layers = 2);

}  // namespace affinegas
