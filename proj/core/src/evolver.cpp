#include "affinegas/evolver.hpp"

#include <algorithm>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

void EvolverConfig::validate() const {
    if (!(tau_end > 0.0)) throw ConfigError("evolver.tau_end", "must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("evolver.cfl", "must lie in (0, 1]");
    if (!(dtau_max > 0.0)) throw ConfigError("evolver.dtau_max", "must be positive");
    if (N < 1) throw ConfigError("evolver.N", "must be at least 1");
    if (!(epsilon >= 0.0)) throw ConfigError("evolver.epsilon", "must be non-negative");
    if (!(lambda >= 0.0)) throw ConfigError("evolver.lambda", "must be non-negative");
    if (snapshot_stride < 1) throw ConfigError("evolver.snapshot_stride", "must be at least 1");
    if (!(dv_bound > 0.0)) throw ConfigError("evolver.dv_bound", "must be positive");
    if (!(envelope_bin > 0.0)) throw ConfigError("evolver.envelope_bin", "must be positive");
    Grid3::make(grid.L, grid.n);
}

FlowState FlowState::make(const Grid3& g, double tau, VecField theta, VecField V) {
    FlowState s;
    s.tau = tau;
    s.theta = std::move(theta);
    s.V = std::move(V);
    s.refresh(g);
    return s;
}

VecField rhs_theta(const Grid3& g, const FlowState& s, const ModulationFrame& f, const WeightProfiles& p,
                   const Coefficients& c) {
    const std::ptrdiff_t total = std::ptrdiff_t(g.size());
    const bool has_beta = !p.beta.empty();
    const double inv_alpha = 1.0 / c.alpha;
    MatField G = g.mat();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t q = 0; q < total; ++q) {
        const std::size_t id = std::size_t(q);
        const double jm = std::pow(s.kin.J[id], -inv_alpha);
        const double b1 = 1.0 + (has_beta ? p.beta[id] : 0.0);
        const Mat3 inner = jm * transpose(at(s.kin.Ainv, id)) - Mat3::identity();
        put(G, id, b1 * (f.Lambda * inner));
    }
    VecField divG = g.vec();
    Field tmp;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            diff(g, G[3 * i + k], k, tmp);
            Field& out = divG[i];
            for (std::size_t id = 0; id < out.size(); ++id) out[id] += tmp[id];
        }
    const double damp = f.mu_tau / f.mu;
    const double force = c.cbar * std::pow(f.mu, -c.delta - c.sigma);
    VecField acc = g.vec();
    const int n = g.n;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const Vec3 y{g.coord(i), g.coord(j), g.coord(k)};
                const Vec3 v = at(s.V, id);
                const Vec3 lt = f.Lambda * at(s.theta, id);
                const Vec3 gv = f.GammaStar * v;
                const Mat3 Gm = at(G, id);
                const Vec3 yG = Gm * y;
                Vec3 src{0.0, 0.0, 0.0};
                if (has_beta) {
                    const double b = p.beta[id];
                    src = f.Lambda * Vec3{p.grad_beta[0][id] - b * y[0], p.grad_beta[1][id] - b * y[1],
                                          p.grad_beta[2][id] - b * y[2]};
                }
                for (int a = 0; a < 3; ++a)
                    acc[a][id] = -damp * v[a] - 2.0 * gv[a] - force * (lt[a] + divG[a][id] - yG[a] + src[a]);
            }
    return acc;
}

double max_wave_speed(const FlowState& s, const ModulationFrame& f, const WeightProfiles& p, const Coefficients& c) {
    const double dmax = std::max({f.eig.values[0], f.eig.values[1], f.eig.values[2]});
    const double base = c.cbar * std::pow(f.mu, -c.delta - c.sigma) * (1.0 + 1.0 / c.alpha) * dmax;
    const std::ptrdiff_t total = std::ptrdiff_t(s.kin.J.size());
    const bool has_beta = !p.beta.empty();
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::ptrdiff_t q = 0; q < total; ++q) {
        const std::size_t id = std::size_t(q);
        const double b1 = 1.0 + (has_beta ? p.beta[id] : 0.0);
        const double jm = std::pow(s.kin.J[id], -1.0 / c.alpha);
        bool flat = true;
        for (const auto& comp : s.kin.Dtheta)
            if (comp[id] != 0.0) flat = false;
        const double an = flat ? 1.0 : spectral_norm(at(s.kin.Ainv, id));
        best = std::max(best, std::sqrt(base * b1 * jm) * an);
    }
    return best;
}

double background_cone_speed(const TimeRescaling& rs, const Coefficients& c, double tau_end) {
    if (tau_end > rs.tau_end()) throw Error(ErrorKind::OutOfRange, "tau_end beyond rescaling range");
    constexpr int samples = 200;
    double acc = 0.0;
    for (int q = 0; q <= samples; ++q) {
        const double tau = tau_end * q / samples;
        const ModulationFrame f = frame_at(tau, rs);
        const double dmax = std::max({f.eig.values[0], f.eig.values[1], f.eig.values[2]});
        const double speed = std::sqrt(c.cbar * std::pow(f.mu, -c.delta - c.sigma) * (1.0 + 1.0 / c.alpha) * dmax);
        acc += (q == 0 || q == samples ? 0.5 : 1.0) * speed;
    }
    return 1.25 * acc / samples;
}

bool AprioriFlags::ok() const { return tripped().empty(); }

std::string AprioriFlags::tripped() const {
    if (!(margin_Ainv() > 0.0)) return "Ainv_minus_I";
    if (!(margin_Dtheta() > 0.0)) return "Dtheta";
    if (!(margin_J() > 0.0)) return "J_minus_1";
    if (!(margin_SN() > 0.0)) return "SN";
    if (!(margin_DV() >= 0.0)) return "DV";
    if (!(margin_DV_tau() >= 0.0)) return "DV_tau";
    return {};
}

namespace {

double max_entry(const MatField& m, bool minus_identity) {
    double best = 0.0;
    for (int c = 0; c < 9; ++c) {
        const double shift = (minus_identity && c % 4 == 0) ? 1.0 : 0.0;
        for (double v : m[c]) best = std::max(best, std::fabs(v - shift));
    }
    return best;
}

double max_norm(const VecField& F) {
    double best = 0.0;
    for (std::size_t id = 0; id < F[0].size(); ++id)
        best = std::max(best, std::sqrt(F[0][id] * F[0][id] + F[1][id] * F[1][id] + F[2][id] * F[2][id]));
    return best;
}

}  // namespace

AprioriFlags apriori_monitor(const Grid3& g, const FlowState& s, const VecField& accel, double SN, double bound_C) {
    AprioriFlags a;
    a.bound_C = bound_C;
    a.Ainv_minus_I = max_entry(s.kin.Ainv, true);
    a.Dtheta = max_entry(s.kin.Dtheta, false);
    for (double j : s.kin.J) a.J_minus_1 = std::max(a.J_minus_1, std::fabs(j - 1.0));
    a.SN = SN;
    a.DV = max_entry(jacobian(g, s.V), false);
    a.DV_tau = max_entry(jacobian(g, accel), false);
    return a;
}

std::vector<double> radial_envelope(const Grid3& g, const VecField& theta, const VecField& V, double bin) {
    const std::size_t bins = std::size_t(std::sqrt(3.0) * g.L / bin) + 1;
    std::vector<double> env(bins, 0.0);
    const int n = g.n;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t id = g.idx(i, j, k);
                const double x = g.coord(i), y = g.coord(j), z = g.coord(k);
                const std::size_t b = std::min(bins - 1, std::size_t(std::sqrt(x * x + y * y + z * z) / bin));
                const double v = norm(at(theta, id)) + norm(at(V, id));
                env[b] = std::max(env[b], v);
            }
    return env;
}

double support_radius(const std::vector<double>& envelope, double bin, double threshold) {
    for (std::size_t b = envelope.size(); b-- > 0;)
        if (envelope[b] > threshold) return double(b + 1) * bin;
    return 0.0;
}

void rk4_step(const Grid3& g, FlowState& s, double dtau, const ModulationFrame& f0, const ModulationFrame& fh,
              const ModulationFrame& f1, const WeightProfiles& p, const Coefficients& c) {
    auto advance = [&](const FlowState& base, const VecField& dth, const VecField& dv, double h) {
        FlowState out;
        out.tau = base.tau + h;
        out.theta = base.theta;
        out.V = base.V;
        for (int a = 0; a < 3; ++a)
            for (std::size_t id = 0; id < out.theta[a].size(); ++id) {
                out.theta[a][id] += h * dth[a][id];
                out.V[a][id] += h * dv[a][id];
            }
        clamp_boundary(g, out.theta);
        clamp_boundary(g, out.V);
        out.refresh(g);
        return out;
    };
    const VecField a1 = rhs_theta(g, s, f0, p, c);
    const FlowState s2 = advance(s, s.V, a1, 0.5 * dtau);
    const VecField a2 = rhs_theta(g, s2, fh, p, c);
    const FlowState s3 = advance(s, s2.V, a2, 0.5 * dtau);
    const VecField a3 = rhs_theta(g, s3, fh, p, c);
    const FlowState s4 = advance(s, s3.V, a3, dtau);
    const VecField a4 = rhs_theta(g, s4, f1, p, c);
    for (int a = 0; a < 3; ++a)
        for (std::size_t id = 0; id < s.theta[a].size(); ++id) {
            s.theta[a][id] += dtau / 6.0 * (s.V[a][id] + 2.0 * s2.V[a][id] + 2.0 * s3.V[a][id] + s4.V[a][id]);
            s.V[a][id] += dtau / 6.0 * (a1[a][id] + 2.0 * a2[a][id] + 2.0 * a3[a][id] + a4[a][id]);
        }
    s.tau += dtau;
    clamp_boundary(g, s.theta);
    clamp_boundary(g, s.V);
    s.refresh(g);
}

RunLedger evolve(const EvolverConfig& cfg, const TimeRescaling& rs, const ExponentSet& exps, double cbar,
                 const ProfileBundle& data, const SnapshotHook& hook) {
    cfg.validate();
    if (cfg.tau_end > rs.tau_end() + 1e-12)
        throw Error(ErrorKind::OutOfRange, "tau_end exceeds the integrated affine range");
    const Grid3& g = cfg.grid;
    const Coefficients coef{cbar, exps.alpha, exps.sigma, exps.delta};
    const double dx = g.dx();
    RunLedger led;
    led.alpha = exps.alpha;
    led.sigma = exps.sigma;
    led.delta = exps.delta;
    led.mu1 = exps.mu1;
    led.mu0 = exps.mu0;
    led.cbar = cbar;
    led.L = g.L;
    led.n = g.n;
    led.dx = dx;
    led.N = cfg.N;
    led.epsilon = cfg.epsilon;
    led.lambda = cfg.lambda;
    led.tau_end = cfg.tau_end;
    led.cone_speed = cfg.cone_speed >= 0.0 ? cfg.cone_speed : background_cone_speed(rs, coef, cfg.tau_end);
    led.beta_sobolev_sq = data.profiles.beta_sobolev_sq;
    led.data_norm = data.data_norm;
    if (g.L < 1.0 + led.cone_speed * cfg.tau_end + 4.0 * dx)
        throw ConfigError("evolver.grid.half_width", "L must be at least 1 + K tau_end + 4 dx = " +
                                                         fmt17(1.0 + led.cone_speed * cfg.tau_end + 4.0 * dx));

    FlowState s = FlowState::make(g, 0.0, data.theta0, data.V0);
    clamp_boundary(g, s.theta);
    clamp_boundary(g, s.V);
    s.refresh(g);
    double sn_sup = 0.0;
    int step = 0;
    double last_dtau = 0.0, last_c = 0.0;

    auto snapshot = [&](const ModulationFrame& f) {
        SnapshotRecord r;
        r.step = step;
        r.tau = s.tau;
        r.t = f.t;
        r.dtau = last_dtau;
        r.c_max = last_c;
        r.mu = f.mu;
        r.mu_tau = f.mu_tau;
        const VecField accel = rhs_theta(g, s, f, data.profiles, coef);
        r.norms = compute_norms(g, s.theta, s.V, s.kin, data.profiles.beta,
                                make_context(f, exps.sigma, exps.delta, cbar, exps.alpha), cfg.N);
        sn_sup = std::max(sn_sup, r.norms.SN_inst);
        r.SN = sn_sup;
        r.apriori = apriori_monitor(g, s, accel, sn_sup, cfg.dv_bound);
        r.theta_inf = max_norm(s.theta);
        r.V_inf = max_norm(s.V);
        r.envelope_bin = cfg.envelope_bin * dx;
        r.envelope = radial_envelope(g, s.theta, s.V, r.envelope_bin);
        if (hook) hook(s, f, accel, r);
        led.snapshots.push_back(std::move(r));
        return led.snapshots.back().apriori.ok();
    };

    ModulationFrame f0 = frame_at(0.0, rs);
    last_c = max_wave_speed(s, f0, data.profiles, coef);
    if (!snapshot(f0)) {
        led.status = "AprioriViolated";
        led.detail = led.snapshots.back().apriori.tripped();
        return led;
    }
    while (s.tau < cfg.tau_end) {
        last_c = max_wave_speed(s, f0, data.profiles, coef);
        double dtau = last_c > 0.0 ? cfg.cfl * dx / last_c : cfg.dtau_max;
        dtau = std::min({dtau, cfg.dtau_max, cfg.tau_end - s.tau});
        if (!(dtau > 1e-12)) throw Error(ErrorKind::CflFailure, "step underflow at tau=" + fmt17(s.tau));
        const bool final_step = s.tau + dtau >= cfg.tau_end * (1.0 - 1e-14);
        const double tau_next = final_step ? cfg.tau_end : s.tau + dtau;
        dtau = tau_next - s.tau;
        const ModulationFrame fh = frame_at(s.tau + 0.5 * dtau, rs);
        const ModulationFrame f1 = frame_at(tau_next, rs);
        rk4_step(g, s, dtau, f0, fh, f1, data.profiles, coef);
        s.tau = tau_next;
        last_dtau = dtau;
        ++step;
        f0 = f1;
        AprioriFlags cheap;
        cheap.Ainv_minus_I = max_entry(s.kin.Ainv, true);
        cheap.Dtheta = max_entry(s.kin.Dtheta, false);
        for (double j : s.kin.J) cheap.J_minus_1 = std::max(cheap.J_minus_1, std::fabs(j - 1.0));
        const bool cheap_ok = cheap.margin_Ainv() > 0.0 && cheap.margin_Dtheta() > 0.0 && cheap.margin_J() > 0.0;
        if (!cheap_ok || step % cfg.snapshot_stride == 0 || final_step) {
            if (!snapshot(f1)) {
                led.status = "AprioriViolated";
                led.detail = led.snapshots.back().apriori.tripped();
                return led;
            }
        }
    }
    return led;
}

}  // namespace affinegas
