#include "affinegas/profiles.hpp"

#include "affinegas/error.hpp"

namespace affinegas {

namespace {

constexpr double kR0 = 0.8;
constexpr double kFill = 0.95;

template <class F>
Field sample(const Grid3& g, F&& fn) {
    Field out = g.scalar();
    const int n = g.n;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[g.idx(i, j, k)] = fn(g.coord(i), g.coord(j), g.coord(k));
    return out;
}

double radius(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

VecField scaled(const VecField& F, double c) {
    VecField out = F;
    for (auto& comp : out)
        for (double& v : comp) v *= c;
    return out;
}

}  // namespace

double bump(double r, double r0) {
    if (r >= r0) return 0.0;
    return std::exp(1.0 / (r * r - r0 * r0) + 1.0 / (r0 * r0));
}

double sobolev_sq(const Grid3& g, const Field& f, int order) {
    double s = 0.0;
    for (const Field& d : derivatives(g, f, order)) {
        Field sq(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
        s += integrate(g, sq);
    }
    return s;
}

ProfileBundle build_profiles(const Grid3& g, double lambda, double epsilon, int N, const NormContext& ctx) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda", "must be non-negative");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon", "must be non-negative");
    if (N < 1) throw ConfigError("N", "must be at least 1");
    const double dx = g.dx();
    if ((lambda > 0.0 || epsilon > 0.0) && (kR0 / dx < 4.0 || kR0 > g.L - 3.0 * dx))
        throw Error(ErrorKind::BudgetInfeasible, "grid cannot resolve the bump (need r0/dx >= 4 inside the box)");

    ProfileBundle b;
    WeightProfiles& p = b.profiles;
    p.lambda = lambda;
    p.w = sample(g, [](double x, double y, double z) { return std::exp(-0.5 * (x * x + y * y + z * z)); });
    p.beta = g.scalar();
    if (lambda > 0.0) {
        const Field shape = sample(g, [](double x, double y, double z) { return bump(radius(x, y, z), kR0); });
        const double c = std::sqrt(kFill * lambda / sobolev_sq(g, shape, N + 1));
        for (std::size_t i = 0; i < shape.size(); ++i) p.beta[i] = c * shape[i];
    }
    p.beta_sobolev_sq = sobolev_sq(g, p.beta, N + 1);
    p.grad_beta = gradient(g, p.beta);

    b.theta0 = g.vec();
    b.V0 = g.vec();
    if (epsilon > 0.0) {
        auto comp = [&](auto&& fn) {
            return sample(g, [&](double x, double y, double z) { return bump(radius(x, y, z), kR0) * fn(x, y, z); });
        };
        const VecField phi_theta{comp([](double x, double, double) { return 0.6 * x + 0.2; }),
                                 comp([](double, double y, double) { return -0.4 * y; }),
                                 comp([](double x, double, double z) { return 0.5 * z + 0.1 * x; })};
        const VecField phi_v{comp([](double, double y, double) { return 0.1 - y; }),
                             comp([](double x, double, double) { return x; }),
                             comp([](double x, double y, double) { return 0.3 * x * y + 0.2; })};
        auto measure = [&](double c) {
            const VecField th = scaled(phi_theta, c), v = scaled(phi_v, c);
            const NormValues nv = compute_norms(g, th, v, kinematics(g, th), p.beta, ctx, N);
            return nv.SN_inst + nv.BN_V;
        };
        const double target = kFill * epsilon;
        double c = 1e-3 * std::sqrt(target / measure(1e-3));
        for (int it = 0; it < 6; ++it) {
            const double m = measure(c);
            if (std::fabs(m - target) <= 1e-6 * target) break;
            c *= std::sqrt(target / m);
        }
        b.theta0 = scaled(phi_theta, c);
        b.V0 = scaled(phi_v, c);
    }
    const NormValues nv = compute_norms(g, b.theta0, b.V0, kinematics(g, b.theta0), p.beta, ctx, N);
    b.data_norm = nv.SN_inst + nv.BN_V;
    return b;
}

}  // namespace affinegas
