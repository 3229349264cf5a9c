#include "affinegas/kinematics.hpp"

#include <atomic>

#include "affinegas/error.hpp"

namespace affinegas {

namespace {

void check_shape(const Grid3& g, const VecField& F) {
    for (const auto& c : F)
        if (c.size() != g.size()) throw Error(ErrorKind::ShapeMismatch, "vector field does not match grid");
}

void check_shape(const MatField& m, const Kinematics& kin) {
    for (const auto& c : m)
        if (c.size() != kin.J.size()) throw Error(ErrorKind::ShapeMismatch, "matrix field does not match caches");
}

}  // namespace

Kinematics kinematics(const Grid3& g, const VecField& theta) {
    check_shape(g, theta);
    Kinematics k;
    k.Dtheta = jacobian(g, theta);
    k.Ainv = g.mat();
    k.J = g.scalar();
    const std::ptrdiff_t total = std::ptrdiff_t(g.size());
    std::atomic<bool> degenerate{false};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t id = 0; id < total; ++id) {
        const Mat3 deta = Mat3::identity() + at(k.Dtheta, std::size_t(id));
        const double d = det(deta);
        k.J[id] = d;
        if (!(d > 0.0)) {
            degenerate = true;
            continue;
        }
        put(k.Ainv, std::size_t(id), (1.0 / d) * adjugate(deta));
    }
    if (degenerate) throw Error(ErrorKind::JacobianDegenerate, "det D eta <= 0 at some node");
    return k;
}

MatField grad_eta_from(const MatField& DF, const Kinematics& kin) {
    check_shape(DF, kin);
    MatField out;
    for (auto& c : out) c.assign(kin.J.size(), 0.0);
    const std::ptrdiff_t total = std::ptrdiff_t(kin.J.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t id = 0; id < total; ++id)
        put(out, std::size_t(id), at(DF, std::size_t(id)) * at(kin.Ainv, std::size_t(id)));
    return out;
}

MatField grad_eta(const Grid3& g, const VecField& F, const Kinematics& kin) {
    check_shape(g, F);
    return grad_eta_from(jacobian(g, F), kin);
}

Field div_eta_from(const MatField& DF, const Kinematics& kin) {
    check_shape(DF, kin);
    Field out(kin.J.size());
    const std::ptrdiff_t total = std::ptrdiff_t(kin.J.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t id = 0; id < total; ++id) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
            for (int q = 0; q < 3; ++q) s += kin.Ainv[3 * q + l][id] * DF[3 * l + q][id];
        out[id] = s;
    }
    return out;
}

Field div_eta(const Grid3& g, const VecField& F, const Kinematics& kin) {
    check_shape(g, F);
    return div_eta_from(jacobian(g, F), kin);
}

MatField curl_LambdaA_from(const MatField& DF, const Kinematics& kin, const Mat3& Lambda) {
    check_shape(DF, kin);
    MatField out;
    for (auto& c : out) c.assign(kin.J.size(), 0.0);
    const std::ptrdiff_t total = std::ptrdiff_t(kin.J.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t id = 0; id < total; ++id) {
        const Mat3 b = at(DF, std::size_t(id)) * at(kin.Ainv, std::size_t(id)) * Lambda;
        Mat3 c;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                c(i, j) = b(i, j) - b(j, i);
                c(j, i) = -c(i, j);
            }
        put(out, std::size_t(id), c);
    }
    return out;
}

MatField curl_LambdaA(const Grid3& g, const VecField& F, const Kinematics& kin, const Mat3& Lambda) {
    check_shape(g, F);
    return curl_LambdaA_from(jacobian(g, F), kin, Lambda);
}

MatField cross_LambdaA_grad(const VecField& grad_f, const VecField& F, const Kinematics& kin, const Mat3& Lambda) {
    MatField out;
    for (auto& c : out) c.assign(kin.J.size(), 0.0);
    const std::ptrdiff_t total = std::ptrdiff_t(kin.J.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t id = 0; id < total; ++id) {
        const std::size_t u = std::size_t(id);
        const Vec3 b = Lambda * (transpose(at(kin.Ainv, u)) * at(grad_f, u));
        const Vec3 f = at(F, u);
        Mat3 c;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                c(i, j) = f[i] * b[j] - f[j] * b[i];
                c(j, i) = -c(i, j);
            }
        put(out, u, c);
    }
    return out;
}

Field frob_sq(const MatField& m) {
    Field out(m[0].size(), 0.0);
    for (const auto& c : m)
        for (std::size_t id = 0; id < out.size(); ++id) out[id] += c[id] * c[id];
    return out;
}

DifferentialOps differential_ops(const Grid3& g, const VecField& F, const Kinematics& kin, const Mat3& Lambda,
                                 const VecField& grad_f) {
    check_shape(g, F);
    check_shape(g, grad_f);
    const MatField DF = jacobian(g, F);
    DifferentialOps ops;
    ops.grad_eta = grad_eta_from(DF, kin);
    ops.div_eta = div_eta_from(DF, kin);
    ops.curl_LambdaA = curl_LambdaA_from(DF, kin, Lambda);
    ops.cross_LambdaA_gradf = cross_LambdaA_grad(grad_f, F, kin, Lambda);
    return ops;
}

}  // namespace affinegas
