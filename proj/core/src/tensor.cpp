#include "affinegas/tensor.hpp"

#include <algorithm>
#include <numbers>

#include "affinegas/error.hpp"

namespace affinegas {

Mat3 adjugate(const Mat3& m) {
    Mat3 r;
    r(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    r(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    r(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    r(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    r(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    r(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    r(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    r(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    r(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return r;
}

Kinematics3 mat3_kinematics(const Mat3& m) {
    const double scale = frobenius(m);
    const double d = det(m);
    if (!(std::fabs(d) > 1e-13 * scale * scale * scale))
        throw Error(ErrorKind::SingularMatrix, "determinant below 1e-13 relative to ||M||_F^3");
    Kinematics3 k;
    k.det = d;
    const Mat3 adj = adjugate(m);
    k.inv = (1.0 / d) * adj;
    k.cof = transpose(adj);
    return k;
}

namespace {

SymEig3 jacobi(const Mat3& s_in) {
    Mat3 s = s_in;
    Mat3 v = Mat3::identity();
    const double scale = frobenius(s_in);
    const double tol = 1e-14 * scale;
    for (int sweep = 0; sweep < 30; ++sweep) {
        const double off = std::sqrt(2.0 * (s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2)));
        if (off <= tol) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s(x, x) > s(y, y); });
    SymEig3 out;
    for (int r = 0; r < 3; ++r) {
        out.values[r] = s(order[r], order[r]);
        for (int k = 0; k < 3; ++k) out.rotation(r, k) = v(k, order[r]);
    }
    if (det(out.rotation) < 0.0)
        for (int k = 0; k < 3; ++k) out.rotation(2, k) = -out.rotation(2, k);
    return out;
}

void require_symmetric(const Mat3& s) {
    const double tol = 1e-10 * std::fmax(1.0, frobenius(s));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::fabs(s(i, j) - s(j, i)) > tol)
                throw Error(ErrorKind::NotSymmetric, "asymmetry exceeds 1e-10");
}

Mat3 symmetrized(const Mat3& s) { return 0.5 * (s + transpose(s)); }

}  // namespace

SymEig3 sym_eig3_any(const Mat3& s) {
    require_symmetric(s);
    return jacobi(symmetrized(s));
}

SymEig3 sym_eig3(const Mat3& s) {
    SymEig3 e = sym_eig3_any(s);
    if (!(e.values[2] > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "smallest eigenvalue not positive");
    return e;
}

void align_rotation(SymEig3& cur, const Mat3& prev) {
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    auto overlap = [&](int r, int pr) {
        return cur.rotation(r, 0) * prev(pr, 0) + cur.rotation(r, 1) * prev(pr, 1) + cur.rotation(r, 2) * prev(pr, 2);
    };
    int best = 0;
    double best_score = -1.0;
    for (int p = 0; p < 6; ++p) {
        double score = 0.0;
        for (int r = 0; r < 3; ++r) score += std::fabs(overlap(perms[p][r], r));
        if (score > best_score + 1e-12) {
            best_score = score;
            best = p;
        }
    }
    SymEig3 out;
    for (int r = 0; r < 3; ++r) {
        const int src = perms[best][r];
        const double sgn = overlap(src, r) < 0.0 ? -1.0 : 1.0;
        out.values[r] = cur.values[src];
        for (int k = 0; k < 3; ++k) out.rotation(r, k) = sgn * cur.rotation(src, k);
    }
    cur = out;
}

double sym3_max_eigenvalue(const Mat3& s) {
    const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
    const double q = trace(s) / 3.0;
    if (p1 == 0.0) return std::max({s(0, 0), s(1, 1), s(2, 2)});
    const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) + (s(2, 2) - q) * (s(2, 2) - q) +
                      2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Mat3 b = (1.0 / p) * (s - q * Mat3::identity());
    const double r = std::clamp(det(b) / 2.0, -1.0, 1.0);
    return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

Polar polar_split(const Mat3& a) {
    const double d = det(a);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    Polar out;
    out.mu = std::cbrt(d);
    out.o = (1.0 / out.mu) * a;
    return out;
}

}  // namespace affinegas
