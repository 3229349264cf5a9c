#include "affinegas/eulerian.hpp"

#include <algorithm>

#include "affinegas/error.hpp"

namespace affinegas {

AffineFields::AffineFields(std::shared_ptr<const AffineTrajectory> traj, bool precise)
    : traj_(std::move(traj)), precise_(precise) {}

std::function<FieldSample(const Vec3&)> AffineFields::instant(double t) const {
    const AffineState s = precise_ ? traj_->eval_precise(t) : traj_->eval(t);
    const double d = det(s.A);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    const Mat3 inv = (1.0 / d) * adjugate(s.A);
    const Mat3 grad_u = s.Adot * inv;
    const double T = traj_->params.cbar() * std::pow(d, -1.0 / traj_->params.alpha);
    return [inv, grad_u, d, T](const Vec3& x) {
        const Vec3 z = inv * x;
        return FieldSample{std::exp(-0.5 * dot(z, z)) / d, grad_u * x, T};
    };
}

double AffineFields::temperature(double t) const {
    const AffineState s = precise_ ? traj_->eval_precise(t) : traj_->eval(t);
    return traj_->params.cbar() * std::pow(det(s.A), -1.0 / traj_->params.alpha);
}

std::vector<FieldSample> affine_fields_eval(std::shared_ptr<const AffineTrajectory> traj, double t,
                                            const std::vector<Vec3>& points) {
    const auto ev = AffineFields(std::move(traj)).instant(t);
    std::vector<FieldSample> out;
    out.reserve(points.size());
    for (const Vec3& x : points) out.push_back(ev(x));
    return out;
}

namespace {

struct Sampled {
    Field rho;
    VecField u;
    Field T;
};

Sampled sample(const Grid3& g, const std::function<FieldSample(const Vec3&)>& ev) {
    Sampled s{g.scalar(), g.vec(), g.scalar()};
    const int n = g.n;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const FieldSample f = ev({g.coord(i), g.coord(j), g.coord(k)});
                s.rho[id] = f.rho;
                for (int a = 0; a < 3; ++a) s.u[a][id] = f.u[a];
                s.T[id] = f.T;
            }
    return s;
}

// Richardson-refined centred difference from samples at t +- h and t +- h/2.
Field time_derivative(const Field& m1, const Field& p1, const Field& m2, const Field& p2, double h) {
    Field out(m1.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double dh = (p1[i] - m1[i]) / (2.0 * h);
        const double dh2 = (p2[i] - m2[i]) / h;
        out[i] = (4.0 * dh2 - dh) / 3.0;
    }
    return out;
}

void norms_of(const Grid3& g, const Field& r2, double& mx, double& l2) {
    mx = 0.0;
    for (double v : r2) mx = std::max(mx, std::sqrt(v));
    l2 = std::sqrt(integrate(g, r2));
}

}  // namespace

ResidualReport eulerian_residual(const EulerianModel& model, double t, const Grid3& grid, double dt_probe,
                                 FieldCorruption corruption) {
    if (!(dt_probe > 0.0)) throw ConfigError("dt_probe", "must be positive");
    Sampled c = sample(grid, model.instant(t));
    for (double& T : c.T) T *= corruption.temperature_factor;
    const Sampled m1 = sample(grid, model.instant(t - dt_probe)), p1 = sample(grid, model.instant(t + dt_probe));
    const Sampled m2 = sample(grid, model.instant(t - 0.5 * dt_probe)),
                  p2 = sample(grid, model.instant(t + 0.5 * dt_probe));
    const Field rho_t = time_derivative(m1.rho, p1.rho, m2.rho, p2.rho, dt_probe);
    const Field T_t = time_derivative(m1.T, p1.T, m2.T, p2.T, dt_probe);
    VecField u_t;
    for (int a = 0; a < 3; ++a) u_t[a] = time_derivative(m1.u[a], p1.u[a], m2.u[a], p2.u[a], dt_probe);

    const std::size_t N = grid.size();
    VecField flux = grid.vec();
    Field p(N);
    for (std::size_t id = 0; id < N; ++id) {
        for (int a = 0; a < 3; ++a) flux[a][id] = c.rho[id] * c.u[a][id];
        p[id] = c.rho[id] * c.T[id];
    }
    const MatField Du = jacobian(grid, c.u);
    const VecField gp = gradient(grid, p);
    const VecField gT = gradient(grid, c.T);
    const Field dfx = diff(grid, flux[0], 0), dfy = diff(grid, flux[1], 1), dfz = diff(grid, flux[2], 2);
    Field rm(N), rv(N), re(N);
    const double alpha = model.alpha();
    for (std::size_t id = 0; id < N; ++id) {
        rm[id] = rho_t[id] + dfx[id] + dfy[id] + dfz[id];
        rm[id] *= rm[id];
        double mom = 0.0, divu = 0.0, adv_T = 0.0;
        for (int i = 0; i < 3; ++i) {
            double adv = 0.0;
            for (int j = 0; j < 3; ++j) adv += c.u[j][id] * Du[3 * i + j][id];
            const double r = c.rho[id] * (u_t[i][id] + adv) + gp[i][id];
            mom += r * r;
            divu += Du[4 * i][id];
            adv_T += c.u[i][id] * gT[i][id];
        }
        rv[id] = mom;
        const double e = alpha * (T_t[id] + adv_T) + c.T[id] * divu;
        re[id] = e * e;
    }
    ResidualReport r;
    r.t = t;
    r.dx = grid.dx();
    r.dt_probe = dt_probe;
    r.n = grid.n;
    norms_of(grid, rm, r.mass_max, r.mass_l2);
    norms_of(grid, rv, r.momentum_max, r.momentum_l2);
    norms_of(grid, re, r.energy_max, r.energy_l2);
    return r;
}

double temperature_invariant_drift(const AffineTrajectory& traj) {
    const AffineParams& p = traj.params;
    const double ref = std::pow(p.cbar(), p.alpha);
    double worst = 0.0;
    for (double d : traj.detA) {
        const double T = p.cbar() * std::pow(d, -1.0 / p.alpha);
        worst = std::max(worst, std::fabs(std::pow(T, p.alpha) * d / ref - 1.0));
    }
    return worst;
}

LagrangianFields lagrangian_reconstruct(const Grid3& g, const FlowState& s, const VecField& accel,
                                        const ModulationFrame& frame, const AffineTrajectory& traj,
                                        const WeightProfiles& p) {
    const AffineParams& par = traj.params;
    const AffineState st = traj.eval_precise(frame.t);
    const Mat3 Add = affine_rhs(st.A, par);
    const double dA = det(st.A);
    const Mat3 Ainv_affine = inverse_unchecked(st.A);
    const double mu = std::cbrt(dA);
    const double mu_tau = mu * mu / 3.0 * trace(st.Adot * Ainv_affine);
    const double cbar = par.cbar(), ia = 1.0 / par.alpha;
    const bool has_beta = !p.beta.empty();
    const std::size_t N = g.size();

    LagrangianFields out;
    out.f.resize(N);
    out.T.resize(N);
    Field h(N), jac_zeta(N);
    for (std::size_t id = 0; id < N; ++id) {
        const double J = s.kin.J[id];
        if (!(J > 0.0)) throw Error(ErrorKind::JacobianDegenerate, "det D eta <= 0");
        const double b1 = 1.0 + (has_beta ? p.beta[id] : 0.0);
        jac_zeta[id] = dA * J;
        out.f[id] = p.w[id] / jac_zeta[id];
        out.T[id] = cbar * b1 * std::pow(jac_zeta[id], -ia);
        h[id] = out.T[id] / jac_zeta[id];
    }
    const VecField gh = gradient(g, h);
    Field mass_density(N);
    const int n = g.n;
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const Vec3 y{g.coord(i), g.coord(j), g.coord(k)};
                const Vec3 th = at(s.theta, id), v = at(s.V, id), a = at(accel, id);
                const Vec3 eta{y[0] + th[0], y[1] + th[1], y[2] + th[2]};
                Vec3 eta_tt, eta_t;
                for (int c = 0; c < 3; ++c) {
                    eta_t[c] = v[c] / mu;
                    eta_tt[c] = a[c] / (mu * mu) - mu_tau * v[c] / (mu * mu * mu);
                }
                const Vec3 z1 = Add * eta, z2 = st.Adot * eta_t, z3 = st.A * eta_tt;
                const Mat3 Az = at(s.kin.Ainv, id) * Ainv_affine;
                Vec3 grad_ft;
                for (int c = 0; c < 3; ++c) grad_ft[c] = p.w[id] * (gh[c][id] - y[c] * h[id]);
                const Vec3 press = transpose(Az) * grad_ft;
                for (int c = 0; c < 3; ++c) {
                    const double inertia = out.f[id] * (z1[c] + 2.0 * z2[c] + z3[c]);
                    worst = std::max(worst, std::fabs(inertia + press[c]));
                    scale = std::max(scale, std::fabs(inertia));
                }
                mass_density[id] = out.f[id] * jac_zeta[id];
            }
    out.momentum_residual = worst;
    out.momentum_scale = scale;
    out.mass = integrate(g, mass_density);
    return out;
}

InitialData initial_data_map(const Grid3& g, const VecField& theta0, const WeightProfiles& p,
                             const AffineParams& params) {
    const Kinematics kin = kinematics(g, theta0);
    const double dA0 = det(params.A0);
    InitialData d;
    const int n = g.n;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const Vec3 eta{g.coord(i) + theta0[0][id], g.coord(j) + theta0[1][id], g.coord(k) + theta0[2][id]};
                d.x.push_back(params.A0 * eta);
                d.rho.push_back(p.w[id] / (dA0 * kin.J[id]));
                const double b1 = 1.0 + (p.beta.empty() ? 0.0 : p.beta[id]);
                d.T.push_back(std::pow(kin.J[id], -1.0 / params.alpha) * params.Tbar * b1);
            }
    return d;
}

}  // namespace affinegas
