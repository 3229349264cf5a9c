#include "affinegas/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

NormReport norms_report(const Grid3& g, const FlowState& s, const ModulationFrame& f, const WeightProfiles& p,
                        const ExponentSet& exps, double cbar, int N, double SN_prev) {
    const NormValues v =
        compute_norms(g, s.theta, s.V, s.kin, p.beta, make_context(f, exps.sigma, exps.delta, cbar, exps.alpha), N);
    return {s.tau, std::max(SN_prev, v.SN_inst), v.BN_V, v.BN_theta, v.EN, v.DN, v.CNm1, v.per_nu};
}

Uniform::Uniform(std::uint64_t seed) : engine_(seed) {}

double Uniform::operator()() { return double(engine_() >> 11) * 0x1.0p-53; }

SyntheticFlow::SyntheticFlow(std::uint64_t seed, double amplitude) : amplitude_(amplitude) {
    if (!(amplitude > 0.0)) throw ConfigError("verify.amplitude", "must be positive");
    Uniform u(seed);
    for (auto& row : coef_)
        for (double& c : row) c = u.in(-1.0, 1.0);
    for (int part = 0; part < 2; ++part) {
        double worst = 0.0;
        const int m = 31;
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) {
                    const double x = -3.0 + 0.2 * i, y = -3.0 + 0.2 * j, z = -3.0 + 0.2 * k;
                    for (int c = 0; c < 3; ++c) {
                        const Vec3 d = grad(coef_[3 * part + c], x, y, z);
                        for (double v : d) worst = std::max(worst, std::fabs(v));
                    }
                }
        norm_[part] = amplitude / worst;
    }
}

double SyntheticFlow::eval(const std::array<double, 4>& c, double x, double y, double z) {
    return std::exp(-0.5 * (x * x + y * y + z * z)) * (c[0] + c[1] * x + c[2] * y + c[3] * z);
}

Vec3 SyntheticFlow::grad(const std::array<double, 4>& c, double x, double y, double z) {
    const double e = std::exp(-0.5 * (x * x + y * y + z * z));
    const double p = c[0] + c[1] * x + c[2] * y + c[3] * z;
    return {e * (c[1] - x * p), e * (c[2] - y * p), e * (c[3] - z * p)};
}

Field SyntheticFlow::sample(const Grid3& g, int row) const {
    Field out = g.scalar();
    const int n = g.n;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[g.idx(i, j, k)] = eval(coef_[row], g.coord(i), g.coord(j), g.coord(k));
    return out;
}

VecField SyntheticFlow::theta(const Grid3& g, double tau) const {
    VecField out;
    const double ca = norm_[0] * std::cos(tau), cb = norm_[1] * std::sin(tau);
    for (int c = 0; c < 3; ++c) {
        const Field a = sample(g, c), b = sample(g, 3 + c);
        out[c].resize(a.size());
        for (std::size_t id = 0; id < a.size(); ++id) out[c][id] = ca * a[id] + cb * b[id];
    }
    return out;
}

VecField SyntheticFlow::velocity(const Grid3& g, double tau) const {
    VecField out;
    const double ca = -norm_[0] * std::sin(tau), cb = norm_[1] * std::cos(tau);
    for (int c = 0; c < 3; ++c) {
        const Field a = sample(g, c), b = sample(g, 3 + c);
        out[c].resize(a.size());
        for (std::size_t id = 0; id < a.size(); ++id) out[c][id] = ca * a[id] + cb * b[id];
    }
    return out;
}

Field SyntheticFlow::scalar(const Grid3& g) const { return sample(g, 6); }

FlowState SyntheticFlow::state(const Grid3& g, double tau) const {
    return FlowState::make(g, tau, theta(g, tau), velocity(g, tau));
}

const char* to_string(IdentityKind k) {
    switch (k) {
        case IdentityKind::Exact: return "exact";
        case IdentityKind::Spatial: return "spatial";
        case IdentityKind::Temporal: return "temporal";
        case IdentityKind::Amplitude: return "amplitude";
    }
    return "unknown";
}

std::vector<IdentityRow> spatial_identities(const Grid3& g, const FlowState& s, const Field& f, const Mat3& Lambda,
                                            double alpha) {
    const std::size_t N = g.size();
    const Kinematics& kin = s.kin;
    const Mat3 I = Mat3::identity();
    double a_id = 0.0, lam_id = 0.0, aj_id = 0.0, j_exp = 0.0, aj_exp = 0.0;
    MatField cof = g.mat();
    for (std::size_t id = 0; id < N; ++id) {
        const Mat3 M = at(kin.Ainv, id), D = at(kin.Dtheta, id);
        const double Jm = std::pow(kin.J[id], -1.0 / alpha);
        const double tr = trace(D);
        a_id = std::max(a_id, max_abs(M - I + M * D));
        lam_id = std::max(lam_id, max_abs(Lambda - Lambda * transpose(M * (I + D))));
        aj_id = std::max(aj_id, max_abs(Jm * M - I - (Jm * (M - I) + (Jm - 1.0) * I)));
        j_exp = std::max(j_exp, std::fabs(1.0 - Jm - tr / alpha));
        aj_exp = std::max(aj_exp, max_abs(Jm * M - I + Jm * (M * D) + (tr / alpha) * I));
        put(cof, id, kin.J[id] * M);
    }

    double piola = 0.0;
    for (int i = 0; i < 3; ++i) {
        Field acc(N, 0.0);
        for (int k = 0; k < 3; ++k) {
            const Field d = diff(g, cof[3 * k + i], k);
            for (std::size_t id = 0; id < N; ++id) acc[id] += d[id];
        }
        for (double v : acc) piola = std::max(piola, std::fabs(v));
    }

    const VecField gf = gradient(g, f);
    VecField F = g.vec();
    for (std::size_t id = 0; id < N; ++id) put(F, id, Lambda * (transpose(at(kin.Ainv, id)) * at(gf, id)));
    const MatField curl = curl_LambdaA(g, F, kin, Lambda);
    double cg = 0.0;
    for (const Field& c : curl)
        for (double v : c) cg = std::max(cg, std::fabs(v));

    const double dx = g.dx();
    return {
        {"a_identity", IdentityKind::Exact, 0, 0.0, a_id},
        {"lambda_identity", IdentityKind::Exact, 0, 0.0, lam_id},
        {"aj_identity", IdentityKind::Exact, 0, 0.0, aj_id},
        {"j_expansion", IdentityKind::Amplitude, 2, 0.0, j_exp},
        {"aj_expansion", IdentityKind::Amplitude, 2, 0.0, aj_exp},
        {"piola", IdentityKind::Spatial, 4, dx, piola},
        {"curl_gradient", IdentityKind::Spatial, 4, dx, cg},
    };
}

std::vector<IdentityRow> temporal_identities(const Grid3& g, const FlowState& minus, const FlowState& centre,
                                             const FlowState& plus, const VecField& V, const ModulationFrame& fm,
                                             const ModulationFrame& fc, const ModulationFrame& fp, double h,
                                             int nu_order) {
    const std::size_t N = g.size();
    const MatField DV = jacobian(g, V);
    const Field divV = div_eta_from(DV, centre.kin);
    double jac = 0.0;
    for (std::size_t id = 0; id < N; ++id) {
        const double dJ = (plus.kin.J[id] - minus.kin.J[id]) / (2.0 * h);
        jac = std::max(jac, std::fabs(dJ - centre.kin.J[id] * divV[id]));
    }

    const auto dth_m = derivatives(g, minus.theta, nu_order);
    const auto dth_c = derivatives(g, centre.theta, nu_order);
    const auto dth_p = derivatives(g, plus.theta, nu_order);
    const auto dV = derivatives(g, V, nu_order);
    const Mat3& Lam = fc.Lambda;
    const Mat3& LamInv = fc.LambdaInv;
    const Mat3& LamT = fc.LambdaTau;
    const Mat3 LamInvT = -1.0 * (LamInv * LamT * LamInv);
    double key = 0.0;
    for (std::size_t q = 0; q < dth_c.size(); ++q) {
        const MatField Xm = grad_eta(g, dth_m[q], minus.kin);
        const MatField Xp = grad_eta(g, dth_p[q], plus.kin);
        const MatField DPhi = jacobian(g, dth_c[q]);
        const MatField DPhiV = jacobian(g, dV[q]);
        for (std::size_t id = 0; id < N; ++id) {
            const Mat3 M = at(centre.kin.Ainv, id);
            const Mat3 Dp = at(DPhi, id);
            const Mat3 X = Dp * M;
            const Mat3 Xt = at(DPhiV, id) * M - Dp * M * at(DV, id) * M;
            const Mat3 Xtr = transpose(X);
            const double lhs = trace(Lam * Xtr * LamInv * Xt);
            const double T = -0.5 * (trace(LamT * Xtr * LamInv * X) + trace(Lam * Xtr * LamInvT * X));
            const double dW =
                (weighted_modulated_sq(at(Xp, id), fp.eig) - weighted_modulated_sq(at(Xm, id), fm.eig)) / (2.0 * h);
            key = std::max(key, std::fabs(lhs - 0.5 * dW - T));
        }
    }
    return {
        {"jacobi", IdentityKind::Temporal, 2, h, jac},
        {"key_energy", IdentityKind::Temporal, 2, h, key},
    };
}

std::vector<IdentityRow> identity_suite(const Grid3& g, const SyntheticFlow& flow, const TimeRescaling& rs,
                                        double tau, double h, double alpha, int nu_order) {
    if (!(h > 0.0) || tau - h < 0.0) throw ConfigError("verify.temporal_h", "need 0 < h <= tau");
    const ModulationFrame fc = frame_at(tau, rs);
    const ModulationFrame fm = frame_at(tau - h, rs, &fc.eig.rotation);
    const ModulationFrame fp = frame_at(tau + h, rs, &fc.eig.rotation);
    const FlowState c = flow.state(g, tau);
    std::vector<IdentityRow> rows = spatial_identities(g, c, flow.scalar(g), fc.Lambda, alpha);
    for (IdentityRow& r : rows)
        if (r.kind == IdentityKind::Amplitude) r.param = flow.amplitude();
    const auto t = temporal_identities(g, flow.state(g, tau - h), c, flow.state(g, tau + h), c.V, fm, fc, fp, h,
                                       nu_order);
    rows.insert(rows.end(), t.begin(), t.end());
    return rows;
}

void VerifyConfig::validate() const {
    auto halving = [](const std::vector<double>& p, const char* field) {
        if (p.size() < 2) throw ConfigError(field, "need at least two levels");
        for (std::size_t i = 0; i + 1 < p.size(); ++i)
            if (!(p[i + 1] < p[i] && p[i + 1] > 0.0)) throw ConfigError(field, "levels must decrease and stay positive");
    };
    if (spatial_n.size() < 2) throw ConfigError("verify.spatial_n", "need at least two levels");
    for (std::size_t i = 0; i + 1 < spatial_n.size(); ++i)
        if (spatial_n[i + 1] <= spatial_n[i]) throw ConfigError("verify.spatial_n", "levels must increase");
    halving(temporal_h, "verify.temporal_h");
    halving(amplitude_levels, "verify.amplitude_levels");
    if (!(amplitude > 0.0)) throw ConfigError("verify.amplitude", "must be positive");
    if (!(half_width > 0.0)) throw ConfigError("verify.half_width", "must be positive");
    if (frame_tau < temporal_h.front()) throw ConfigError("verify.frame_tau", "must be at least the largest h");
    if (nu_order < 0) throw ConfigError("verify.nu_order", "must be non-negative");
}

std::vector<IdentityConvergence> identity_convergence(const VerifyConfig& cfg, const TimeRescaling& rs,
                                                      double alpha, std::vector<IdentityRow>* raw) {
    cfg.validate();
    std::vector<IdentityRow> all;
    const ModulationFrame fc = frame_at(cfg.frame_tau, rs);
    for (int n : cfg.spatial_n) {
        const Grid3 g = Grid3::make(cfg.half_width, n);
        const SyntheticFlow flow(cfg.seed, cfg.amplitude);
        for (const IdentityRow& r : spatial_identities(g, flow.state(g, cfg.frame_tau), flow.scalar(g), fc.Lambda, alpha))
            if (r.kind != IdentityKind::Amplitude) all.push_back(r);
    }
    const Grid3 gt = Grid3::make(cfg.half_width, cfg.temporal_n);
    {
        const SyntheticFlow flow(cfg.seed, cfg.amplitude);
        const FlowState c = flow.state(gt, cfg.frame_tau);
        for (double h : cfg.temporal_h) {
            const ModulationFrame fm = frame_at(cfg.frame_tau - h, rs, &fc.eig.rotation);
            const ModulationFrame fp = frame_at(cfg.frame_tau + h, rs, &fc.eig.rotation);
            const auto rows = temporal_identities(gt, flow.state(gt, cfg.frame_tau - h), c,
                                                  flow.state(gt, cfg.frame_tau + h), c.V, fm, fc, fp, h, cfg.nu_order);
            all.insert(all.end(), rows.begin(), rows.end());
        }
    }
    for (double a : cfg.amplitude_levels) {
        const SyntheticFlow flow(cfg.seed, a);
        for (IdentityRow r : spatial_identities(gt, flow.state(gt, cfg.frame_tau), flow.scalar(gt), fc.Lambda, alpha))
            if (r.kind == IdentityKind::Amplitude) {
                r.param = a;
                all.push_back(r);
            }
    }

    std::vector<IdentityConvergence> out;
    std::map<std::string, std::size_t> pos;
    for (const IdentityRow& r : all) {
        auto it = pos.find(r.name);
        if (it == pos.end()) {
            it = pos.emplace(r.name, out.size()).first;
            IdentityConvergence c;
            c.name = r.name;
            c.kind = r.kind;
            c.order = r.order;
            out.push_back(c);
        }
        out[it->second].params.push_back(r.param);
        out[it->second].residuals.push_back(r.residual);
    }

    constexpr double kFloor = 1e-13;
    for (IdentityConvergence& c : out) {
        const auto& p = c.params;
        const auto& e = c.residuals;
        if (c.kind == IdentityKind::Exact) {
            c.calibrated_constant = *std::max_element(e.begin(), e.end());
            c.pass = c.calibrated_constant <= cfg.exact_tol;
            continue;
        }
        c.calibrated_constant = e.front() / std::pow(p.front(), c.order);
        c.min_ratio = std::numeric_limits<double>::infinity();
        c.observed_order = std::numeric_limits<double>::infinity();
        bool cal_ok = true;
        for (std::size_t k = 0; k + 1 < e.size(); ++k) {
            if (e[k + 1] > kFloor) {
                const double ratio = e[k] / e[k + 1];
                c.min_ratio = std::min(c.min_ratio, ratio);
                c.observed_order = std::min(c.observed_order, std::log(ratio) / std::log(p[k] / p[k + 1]));
            }
            cal_ok = cal_ok && e[k + 1] <= 10.0 * c.calibrated_constant * std::pow(p[k + 1], c.order);
        }
        c.pass = cal_ok && c.observed_order >= c.order - 0.25;
    }
    if (raw) *raw = std::move(all);
    return out;
}

void write_identity_csv(std::ostream& os, const std::vector<IdentityRow>& rows) {
    os << "name,kind,order,param,residual\n";
    for (const IdentityRow& r : rows)
        os << r.name << ',' << to_string(r.kind) << ',' << r.order << ',' << fmt17(r.param) << ',' << fmt17(r.residual)
           << '\n';
}

void write_convergence_csv(std::ostream& os, const std::vector<IdentityConvergence>& rows) {
    os << "name,kind,order,levels,residual_first,residual_last,min_ratio,observed_order,calibrated_constant,pass\n";
    for (const IdentityConvergence& c : rows)
        os << c.name << ',' << to_string(c.kind) << ',' << c.order << ',' << c.residuals.size() << ','
           << fmt17(c.residuals.front()) << ',' << fmt17(c.residuals.back()) << ',' << fmt17(c.min_ratio) << ','
           << fmt17(c.observed_order) << ',' << fmt17(c.calibrated_constant) << ',' << (c.pass ? "pass" : "fail")
           << '\n';
}

PropagationReport support_and_propagation(const RunLedger& led, double threshold) {
    if (led.snapshots.size() < 5) throw Error(ErrorKind::WindowTooShort, "support fit needs at least 5 snapshots");
    PropagationReport r;
    r.threshold = threshold;
    r.c_max0 = led.snapshots.front().c_max;
    double rmax = 0.0;
    for (const SnapshotRecord& s : led.snapshots) {
        r.tau.push_back(s.tau);
        r.radius.push_back(support_radius(s.envelope, s.envelope_bin, threshold));
        rmax = std::max(rmax, r.radius.back());
    }
    if (rmax == 0.0) {
        r.empty_support = true;
        r.within_cone = true;
        return r;
    }
    const LineFit fit = fit_line(r.tau, r.radius);
    r.K_fit = fit.slope;
    r.intercept = fit.intercept;
    r.r2 = fit.r2;
    r.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.tau.size(); ++k)
        r.worst_excess = std::max(r.worst_excess, r.radius[k] - (1.0 + r.K_fit * r.tau[k] + 3.0 * led.dx));
    r.within_cone = r.worst_excess <= 0.0;
    return r;
}

namespace {

QuantityFit log_fit(const std::string& name, const std::vector<double>& tau, const std::vector<double>& val) {
    QuantityFit q;
    q.quantity = name;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < tau.size(); ++k)
        if (val[k] > 0.0) {
            x.push_back(tau[k]);
            y.push_back(std::log(val[k]));
        }
    if (x.empty()) {
        q.skipped = true;
        if (!tau.empty()) {
            q.tau_lo = tau.front();
            q.tau_hi = tau.back();
        }
        return q;
    }
    if (x.size() < 3) throw Error(ErrorKind::WindowTooShort, name + ": fewer than 3 positive samples in the window");
    const LineFit f = fit_line(x, y);
    q.exponent = f.slope;
    q.r2 = f.r2;
    q.tau_lo = x.front();
    q.tau_hi = x.back();
    return q;
}

double guarded_ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace

DecayReport decay_and_coercivity(const RunLedger& led, const ExponentSet& exps, const DecayOptions& opt) {
    const auto& snaps = led.snapshots;
    if (snaps.empty()) throw Error(ErrorKind::WindowTooShort, "empty ledger");
    if (led.tau_end * exps.mu0 < 5.0)
        throw Error(ErrorKind::WindowTooShort, "ledger spans fewer than 5 e-foldings of exp(-mu0 tau)");
    DecayReport d;
    d.target = -2.0 * exps.mu0;
    const double tau_last = snaps.back().tau;

    const double lo = std::max(opt.tau_min, (1.0 - opt.window_fraction) * tau_last);
    std::vector<double> tw, bw;
    for (const SnapshotRecord& s : snaps)
        if (s.tau >= lo) {
            tw.push_back(s.tau);
            bw.push_back(s.norms.BN_V / (1.0 + s.tau * s.tau));
        }
    d.BN_V = log_fit("BN_V/(1+tau^2)", tw, bw);
    d.decay_pass = d.BN_V.skipped || std::fabs(d.BN_V.exponent - d.target) <= 0.5 * std::fabs(d.target);

    d.SN_plateau = snaps.front().SN;
    for (const SnapshotRecord& s : snaps)
        if (s.tau <= opt.plateau_tau) d.SN_plateau = s.SN;
    d.SN_final = snaps.back().SN;
    std::vector<double> ts, ss;
    for (const SnapshotRecord& s : snaps)
        if (s.tau >= 0.5 * tau_last) {
            ts.push_back(s.tau);
            ss.push_back(s.SN);
        }
    d.SN_tail = log_fit("SN", ts, ss);
    d.bounded_pass = d.SN_tail.skipped || (d.SN_final <= 3.0 * d.SN_plateau && d.SN_tail.exponent <= 0.01);

    const auto nus = multi_indices(led.N);
    std::vector<std::map<MultiIndex, const PerNu*>> table(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k)
        for (const PerNu& p : snaps[k].norms.per_nu) table[k][p.nu] = &p;
    auto get = [&](std::size_t k, const MultiIndex& nu) -> const PerNu& {
        auto it = table[k].find(nu);
        if (it == table[k].end()) throw Error(ErrorKind::LedgerCorrupt, "snapshot lacks a per-nu entry");
        return *it->second;
    };
    d.coercivity_constant = 0.0;
    for (const MultiIndex& nu : nus) {
        if (order_of(nu) > led.N - 1) continue;
        CoercivityRow row;
        row.nu = nu;
        double sup0 = 0.0, sup1 = 0.0;
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            const double w = std::pow(snaps[k].mu, led.sigma);
            sup0 = std::max(sup0, w * get(k, nu).V_sq);
            double s1 = 0.0;
            for (const MultiIndex& nu1 : nus)
                if (order_of(nu1) == order_of(nu) + 1) s1 += get(k, nu1).V_sq;
            sup1 = std::max(sup1, w * s1);
            const PerNu& now = get(k, nu);
            const PerNu& init = get(0, nu);
            const double rt = guarded_ratio(now.theta_sq, sup0 + init.theta_sq);
            const double rg = guarded_ratio(now.grad_eta_sq, sup1 + init.grad_eta_sq);
            const double rd = guarded_ratio(now.div_eta_sq, sup1 + init.div_eta_sq);
            row.theta = std::max(row.theta, rt);
            row.grad = std::max(row.grad, rg);
            row.div = std::max(row.div, rd);
            row.final_theta = rt;
            row.final_grad = rg;
            row.final_div = rd;
        }
        d.coercivity_constant = std::max({d.coercivity_constant, row.theta, row.grad, row.div});
        d.coercivity.push_back(row);
    }
    d.coercivity_pass = std::isfinite(d.coercivity_constant) && d.coercivity_constant <= opt.coercivity_max;

    double run = 0.0;
    d.C1 = std::numeric_limits<double>::infinity();
    d.C2 = 0.0;
    const double S0 = snaps.front().SN;
    for (const SnapshotRecord& s : snaps) {
        run = std::max(run, s.norms.EN + s.norms.CNm1);
        if (s.SN > 0.0) d.C1 = std::min(d.C1, run / s.SN);
        if (s.SN + S0 > 0.0) d.C2 = std::max(d.C2, run / (s.SN + S0));
    }
    if (!std::isfinite(d.C1)) d.C1 = 0.0;
    return d;
}

}  // namespace affinegas
