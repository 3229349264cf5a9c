#pragma once

#include "affinegas/grid.hpp"
#include "affinegas/tensor.hpp"

namespace affinegas {

/// Flow-map caches for eta = y + theta.
struct Kinematics {
    MatField Dtheta;  ///< (i, j) = d theta^i / d y^j
    MatField Ainv;    ///< (s, m) = A^s_m = [(D eta)^{-1}]_{sm}
    Field J;          ///< det D eta
};

/// Throws JacobianDegenerate if det D eta <= 0 at any node.
Kinematics kinematics(const Grid3& g, const VecField& theta);

inline Mat3 at(const MatField& m, std::size_t id) {
    Mat3 r;
    for (int c = 0; c < 9; ++c) r.a[c] = m[c][id];
    return r;
}
inline Vec3 at(const VecField& v, std::size_t id) { return {v[0][id], v[1][id], v[2][id]}; }
inline void put(MatField& m, std::size_t id, const Mat3& v) {
    for (int c = 0; c < 9; ++c) m[c][id] = v.a[c];
}
inline void put(VecField& f, std::size_t id, const Vec3& v) {
    for (int c = 0; c < 3; ++c) f[c][id] = v[c];
}

/// (i, r) = [grad_eta F]^i_r = A^s_r F^i_{,s}.
MatField grad_eta(const Grid3& g, const VecField& F, const Kinematics& kin);
/// Same, from a precomputed Jacobian of F.
MatField grad_eta_from(const MatField& DF, const Kinematics& kin);
/// A^s_l F^l_{,s}.
Field div_eta(const Grid3& g, const VecField& F, const Kinematics& kin);
Field div_eta_from(const MatField& DF, const Kinematics& kin);

/// (i, j) = Λ_jm A^s_m F^i_{,s} - Λ_im A^s_m F^j_{,s}; antisymmetric by construction.
MatField curl_LambdaA(const Grid3& g, const VecField& F, const Kinematics& kin, const Mat3& Lambda);
MatField curl_LambdaA_from(const MatField& DF, const Kinematics& kin, const Mat3& Lambda);

/// (i, j) = Λ_jm A^s_m f_{,s} F^i - Λ_im A^s_m f_{,s} F^j.
MatField cross_LambdaA_grad(const VecField& grad_f, const VecField& F, const Kinematics& kin, const Mat3& Lambda);

/// Pointwise sum over nodes of the squared Frobenius norm, as a field.
Field frob_sq(const MatField& m);

struct DifferentialOps {
    MatField grad_eta;
    Field div_eta;
    MatField curl_LambdaA;
    MatField cross_LambdaA_gradf;
};

/// All four operators for one field; `grad_f` feeds the cross product.
DifferentialOps differential_ops(const Grid3& g, const VecField& F, const Kinematics& kin, const Mat3& Lambda,
                                 const VecField& grad_f);

}  // namespace affinegas
