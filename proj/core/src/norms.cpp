#include "affinegas/norms.hpp"

#include <algorithm>
#include <map>

#include "affinegas/error.hpp"

namespace affinegas {

std::vector<MultiIndex> multi_indices(int order) {
    std::vector<MultiIndex> out;
    for (int o = 0; o <= order; ++o)
        for (int a = o; a >= 0; --a)
            for (int b = o - a; b >= 0; --b) out.push_back({a, b, o - a - b});
    return out;
}

namespace {

template <class T, class Diff>
std::vector<T> derivative_table(const T& f, int order, Diff&& d) {
    const auto nus = multi_indices(order);
    std::map<MultiIndex, std::size_t> pos;
    std::vector<T> out;
    out.reserve(nus.size());
    for (std::size_t q = 0; q < nus.size(); ++q) {
        const MultiIndex& nu = nus[q];
        pos[nu] = q;
        if (order_of(nu) == 0) {
            out.push_back(f);
            continue;
        }
        const int axis = nu[0] > 0 ? 0 : nu[1] > 0 ? 1 : 2;
        MultiIndex parent = nu;
        --parent[axis];
        out.push_back(d(out[pos.at(parent)], axis));
    }
    return out;
}

}  // namespace

std::vector<Field> derivatives(const Grid3& g, const Field& f, int order) {
    return derivative_table(f, order, [&](const Field& x, int axis) { return diff(g, x, axis); });
}

std::vector<VecField> derivatives(const Grid3& g, const VecField& F, int order) {
    return derivative_table(F, order, [&](const VecField& x, int axis) {
        return VecField{diff(g, x[0], axis), diff(g, x[1], axis), diff(g, x[2], axis)};
    });
}

NormContext make_context(const ModulationFrame& f, double sigma, double delta, double cbar, double alpha) {
    NormContext c;
    c.mu = f.mu;
    c.mu_tau = f.mu_tau;
    c.sigma = sigma;
    c.delta = delta;
    c.cbar = cbar;
    c.alpha = alpha;
    c.Lambda = f.Lambda;
    c.LambdaInv = f.LambdaInv;
    c.eig = f.eig;
    return c;
}

double weighted_modulated_sq(const Mat3& X, const SymEig3& eig) {
    const Mat3& P = eig.rotation;
    const Mat3 Nm = P * transpose(X) * transpose(P);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += eig.values[i] / eig.values[j] * Nm(i, j) * Nm(i, j);
    return s;
}

NormValues compute_norms(const Grid3& g, const VecField& theta, const VecField& V, const Kinematics& kin,
                         const Field& beta, const NormContext& ctx, int N) {
    if (N < 1) throw ConfigError("N", "norm order must be at least 1");
    if (!beta.empty() && beta.size() != g.size()) throw Error(ErrorKind::ShapeMismatch, "beta does not match grid");
    const auto nus = multi_indices(N);
    const auto dth = derivatives(g, theta, N);
    const auto dv = derivatives(g, V, N);
    const double mus = std::pow(ctx.mu, ctx.sigma);
    const double mud = std::pow(ctx.mu, -ctx.delta);
    const double inv_alpha = 1.0 / ctx.alpha;
    const std::ptrdiff_t total = std::ptrdiff_t(g.size());

    Field jw(g.size());
    for (std::ptrdiff_t id = 0; id < total; ++id)
        jw[id] = (1.0 + (beta.empty() ? 0.0 : beta[id])) * std::pow(kin.J[id], -inv_alpha);

    NormValues out;
    Field f_th(g.size()), f_v(g.size()), f_grad(g.size()), f_div(g.size()), f_cv(g.size()), f_ct(g.size()),
        f_en(g.size()), f_dis(g.size()), f_coe(g.size());
    for (std::size_t q = 0; q < nus.size(); ++q) {
        const int ord = order_of(nus[q]);
        const MatField Dt = jacobian(g, dth[q]);
        const MatField Dv = jacobian(g, dv[q]);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t s = 0; s < total; ++s) {
            const std::size_t id = std::size_t(s);
            const Mat3 M = at(kin.Ainv, id);
            const Vec3 th = at(dth[q], id), vv = at(dv[q], id);
            const Mat3 X = at(Dt, id) * M;
            const double dv_eta = trace(X);
            const Mat3 bv = at(Dv, id) * M * ctx.Lambda;
            const Mat3 bt = X * ctx.Lambda;
            double cv = 0.0, ct = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double a = bv(i, j) - bv(j, i), b = bt(i, j) - bt(j, i);
                    cv += a * a;
                    ct += b * b;
                }
            const double fn = weighted_modulated_sq(X, ctx.eig);
            const double elastic = jw[id] * (fn + inv_alpha * dv_eta * dv_eta);
            const double th_sq = dot(th, th);
            f_th[id] = th_sq;
            f_v[id] = dot(vv, vv);
            double xs = 0.0;
            for (double x : X.a) xs += x * x;
            f_grad[id] = xs;
            f_div[id] = dv_eta * dv_eta;
            f_cv[id] = cv;
            f_ct[id] = ct;
            f_en[id] = mus * dot(vv, ctx.LambdaInv * vv) + ctx.cbar * mud * dot(th, ctx.LambdaInv * th) +
                       ctx.cbar * mud * elastic;
            f_dis[id] = th_sq + elastic;
            f_coe[id] = ctx.cbar * dot(th, ctx.LambdaInv * th) + ctx.cbar * elastic;
        }
        PerNu p;
        p.nu = nus[q];
        p.theta_sq = integrate(g, f_th);
        p.V_sq = integrate(g, f_v);
        p.grad_eta_sq = integrate(g, f_grad);
        p.div_eta_sq = integrate(g, f_div);
        p.curl_V_sq = integrate(g, f_cv);
        p.curl_theta_sq = integrate(g, f_ct);
        p.energy = 0.5 * integrate(g, f_en);
        p.dissipation = ctx.cbar * 0.5 * ctx.delta * mud * (ctx.mu_tau / ctx.mu) * integrate(g, f_dis);
        out.per_nu.push_back(p);

        out.SN_inst += mus * p.V_sq + p.theta_sq;
        const double top = ord == N ? mud : 1.0;
        out.SN_inst += top * (p.grad_eta_sq + p.div_eta_sq);
        out.BN_V += top * p.curl_V_sq;
        out.BN_theta += top * p.curl_theta_sq;
        out.EN += p.energy;
        out.DN += p.dissipation;
        if (ord <= N - 1) out.CNm1 += 0.5 * integrate(g, f_coe);
    }
    return out;
}

}  // namespace affinegas
