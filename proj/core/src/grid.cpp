#include "affinegas/grid.hpp"

#include <algorithm>
#include <string>

#include "affinegas/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affinegas {

Grid3 Grid3::make(double half_width, int nodes) {
    if (nodes < 17) throw ConfigError("grid.n", "must be at least 17");
    if (nodes % 2 == 0) throw ConfigError("grid.n", "must be odd so the origin is a node");
    if (!(half_width > 0.0)) throw ConfigError("grid.half_width", "must be positive");
    return Grid3{half_width, nodes};
}

MatField Grid3::mat() const {
    MatField m;
    for (auto& c : m) c = scalar();
    return m;
}

int Grid3::face_distance(int i, int j, int k) const {
    return std::min({i, j, k, n - 1 - i, n - 1 - j, n - 1 - k});
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, n));
#else
    (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void diff(const Grid3& g, const Field& f, int axis, Field& out) {
    if (f.size() != g.size()) throw Error(ErrorKind::ShapeMismatch, "field size does not match grid");
    if (g.n < 5) throw Error(ErrorKind::StencilUnderflow, "need at least 5 nodes per axis");
    out.resize(g.size());
    const int n = g.n;
    const std::ptrdiff_t s = axis == 0 ? 1 : axis == 1 ? n : std::ptrdiff_t(n) * n;
    const double c = 1.0 / (12.0 * g.dx());
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const int p = axis == 0 ? i : axis == 1 ? j : k;
                const double* q = f.data() + id;
                double v;
                if (p >= 2 && p <= n - 3) {
                    v = (q[-2 * s] - q[2 * s]) + 8.0 * (q[s] - q[-s]);
                } else if (p == 0) {
                    v = 48.0 * (q[s] - q[0]) - 36.0 * (q[2 * s] - q[0]) + 16.0 * (q[3 * s] - q[0]) - 3.0 * (q[4 * s] - q[0]);
                } else if (p == 1) {
                    v = -3.0 * (q[-s] - q[0]) + 18.0 * (q[s] - q[0]) - 6.0 * (q[2 * s] - q[0]) + (q[3 * s] - q[0]);
                } else if (p == n - 2) {
                    v = 3.0 * (q[s] - q[0]) - 18.0 * (q[-s] - q[0]) + 6.0 * (q[-2 * s] - q[0]) - (q[-3 * s] - q[0]);
                } else {
                    v = -48.0 * (q[-s] - q[0]) + 36.0 * (q[-2 * s] - q[0]) - 16.0 * (q[-3 * s] - q[0]) + 3.0 * (q[-4 * s] - q[0]);
                }
                out[id] = c * v;
            }
        }
    }
}

Field diff(const Grid3& g, const Field& f, int axis) {
    Field out;
    diff(g, f, axis, out);
    return out;
}

MatField jacobian(const Grid3& g, const VecField& F) {
    MatField J;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) diff(g, F[i], j, J[3 * i + j]);
    return J;
}

VecField gradient(const Grid3& g, const Field& f) {
    return {diff(g, f, 0), diff(g, f, 1), diff(g, f, 2)};
}

double integrate(const Grid3& g, const Field& f) {
    if (f.size() != g.size()) throw Error(ErrorKind::ShapeMismatch, "field size does not match grid");
    const int n = g.n;
    std::vector<double> planes(n, 0.0);
    auto w = [n](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            double row = 0.0;
            for (int i = 0; i < n; ++i) row += w(i) * f[g.idx(i, j, k)];
            acc += w(j) * row;
        }
        planes[k] = w(k) * acc;
    }
    double total = 0.0;
    for (double p : planes) total += p;
    const double dx = g.dx();
    return total * dx * dx * dx;
}

void clamp_boundary(const Grid3& g, VecField& F, int layers) {
    const int n = g.n;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (g.face_distance(i, j, k) <= layers)
                    for (auto& c : F) c[g.idx(i, j, k)] = 0.0;
}

}  // namespace affinegas
