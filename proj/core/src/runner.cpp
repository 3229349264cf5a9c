#include "affinegas/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

namespace fs = std::filesystem;

bool RunResult::all_pass() const {
    return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.pass; });
}

namespace {

std::string kv(std::initializer_list<std::pair<const char*, double>> items) {
    std::string s;
    for (const auto& [k, v] : items) {
        if (!s.empty()) s += ' ';
        s += std::string(k) + '=' + fmt17(v);
    }
    return s;
}

std::ofstream open_out(const fs::path& p, RunResult& r) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("--out", "cannot write " + p.string());
    r.files.push_back(p);
    return os;
}

void write_slice(const fs::path& p, const Grid3& g, const FlowState& s) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("--out", "cannot write " + p.string());
    os << "x,y,theta_x,theta_y,theta_z,V_x,V_y,V_z\n";
    const int k = g.n / 2;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const std::size_t id = g.idx(i, j, k);
            os << fmt17(g.coord(i)) << ',' << fmt17(g.coord(j));
            for (int c = 0; c < 3; ++c) os << ',' << fmt17(s.theta[c][id]);
            for (int c = 0; c < 3; ++c) os << ',' << fmt17(s.V[c][id]);
            os << '\n';
        }
}

}  // namespace

AffineSetup prepare_affine(const Scenario& s, double tau_needed) {
    double t_end = std::max(s.t_end, 100.0);
    AffineSetup out;
    while (true) {
        auto traj = std::make_shared<AffineTrajectory>(integrate_affine(s.affine, t_end, s.rel_tol));
        if (traj->status == TrajectoryStatus::Collapsed)
            throw Error(ErrorKind::NonPositiveDeterminant, "affine trajectory collapsed before t=" + fmt17(t_end));
        out.rs = build_rescaling(traj);
        out.traj = traj;
        if (out.rs.tau_end() >= tau_needed) break;
        if (t_end > 1e12) throw Error(ErrorKind::OutOfRange, "cannot reach tau=" + fmt17(tau_needed));
        t_end *= 4.0;
    }
    out.fit = asymptotic_fit(*out.traj);
    out.mu1 = estimate_mu1(*out.traj, out.rs);
    return out;
}

RunResult run_affine(const Scenario& s, const RunOptions& opt) {
    fs::create_directories(opt.out);
    const AffineSetup st = prepare_affine(s, s.diagnostics.frame_tau_max);
    const AffineTrajectory& tr = *st.traj;
    const AffineParams& p = s.affine;
    RunResult res;

    // The asymptotic fits use the configured horizon; the extended one only serves the frame sweep.
    const AffineTrajectory base = integrate_affine(p, s.t_end, s.rel_tol);
    const AsymptoticFit fit = asymptotic_fit(base);
    const double E0 = ode_energy(tr.A.front(), tr.Adot.front(), p);
    double drift100 = 0.0;
    for (std::size_t k = 0; k < tr.t.size() && tr.t[k] <= 100.0; ++k)
        drift100 = std::max(drift100, std::fabs(ode_energy(tr.A[k], tr.Adot[k], p) - E0) / std::fabs(E0));

    LedgerFile f;
    f.kind = "affine";
    f.scenario = s.name;
    f.run.alpha = p.alpha;
    f.run.cbar = p.cbar();
    f.run.mu1 = st.mu1.mu1;
    const double T0 = p.cbar() * std::pow(det(p.A0), -1.0 / p.alpha);
    double band_lo = INFINITY, band_hi = 0.0;
    const int m = 200;
    for (int k = 0; k < m; ++k) {
        const double t = std::pow(1.0 + s.t_end, double(k) / (m - 1)) - 1.0;
        const AffineState a = tr.eval_precise(std::min(t, tr.t_end()));
        const double d = det(a.A);
        const double E = ode_energy(a.A, a.Adot, p);
        const double T = p.cbar() * std::pow(d, -1.0 / p.alpha);
        const double ratio = d / (1.0 + t * t * t);
        if (t >= 1.0) {
            band_lo = std::min(band_lo, ratio);
            band_hi = std::max(band_hi, ratio);
        }
        f.samples.push_back({{"t", t},
                             {"detA", d},
                             {"det_ratio", ratio},
                             {"energy", E},
                             {"energy_drift", std::fabs(E - E0) / std::fabs(E0)},
                             {"T", T},
                             {"T_invariant", std::pow(T / T0, p.alpha) * d / det(p.A0)}});
    }
    const double tinv = temperature_invariant_drift(tr);
    f.metrics = {{"t_end", s.t_end},
                 {"rel_tol", s.rel_tol},
                 {"energy_drift_100", drift100},
                 {"det_band_lo", band_lo},
                 {"det_band_hi", band_hi},
                 {"M_decay_exponent", fit.M_decay_exponent},
                 {"mu1", st.mu1.mu1},
                 {"mu1_pre_asymptotic", st.mu1.pre_asymptotic ? 1.0 : 0.0},
                 {"T_invariant_drift", tinv}};

    f.claims.push_back({"affine_energy", drift100 <= 1e-8, kv({{"max_rel_drift_0_100", drift100}})});
    if (s.t_end >= 1000.0) {
        const double var = ratio_variation(fit, 100.0, 1000.0);
        f.metrics["det_ratio_variation_100_1000"] = var;
        f.claims.push_back({"det_growth", band_lo > 0.0 && std::isfinite(band_hi) && var < 0.01,
                            kv({{"band_lo", band_lo}, {"band_hi", band_hi}, {"variation_100_1000", var}})});
    }
    const double bound = -3.0 / p.alpha + 0.3;
    f.claims.push_back({"derivative_decay", fit.M_decay_exponent <= bound,
                        kv({{"slope", fit.M_decay_exponent}, {"bound", bound}})});
    f.claims.push_back({"temperature_invariant", tinv <= 1e-10, kv({{"max_rel_drift", tinv}})});

    const ExponentSet exps = s.exponent_set(st.mu1.mu1);
    std::vector<double> taus;
    for (double t = 0.0; t <= s.diagnostics.frame_tau_max + 1e-12; t += s.diagnostics.frame_step) taus.push_back(t);
    const auto frames = frames_along(taus, st.rs);
    const BoundReport b = verify_frame_bounds(frames, exps, s.diagnostics.decay.tau_min);
    f.claims.push_back({"frame_bounds",
                        std::isfinite(b.lambda_norm_sum) && std::isfinite(b.eig_sum) && b.lambda_tau.pass &&
                            b.eig_derivs.pass,
                        kv({{"lambda_norm_sum", b.lambda_norm_sum},
                            {"eig_sum", b.eig_sum},
                            {"lambda_tau_rate", b.lambda_tau.rate},
                            {"eig_derivs_rate", b.eig_derivs.rate},
                            {"bound_rate", -0.75 * exps.mu1}})});

    write_ledger(opt.out / "affine_ledger.jsonl", f);
    res.files.push_back(opt.out / "affine_ledger.jsonl");
    {
        auto os = open_out(opt.out / "affine_samples.csv", res);
        os << "t,detA,det_ratio,energy,energy_drift,T,T_invariant\n";
        for (const auto& smp : f.samples)
            os << fmt17(smp.at("t")) << ',' << fmt17(smp.at("detA")) << ',' << fmt17(smp.at("det_ratio")) << ','
               << fmt17(smp.at("energy")) << ',' << fmt17(smp.at("energy_drift")) << ',' << fmt17(smp.at("T")) << ','
               << fmt17(smp.at("T_invariant")) << '\n';
    }
    {
        auto os = open_out(opt.out / "trajectory.csv", res);
        write_trajectory_csv(os, tr);
    }
    {
        auto os = open_out(opt.out / "frames.csv", res);
        write_frames_csv(os, frames);
    }
    res.claims = f.claims;
    return res;
}

std::vector<Claim> evolve_claims(const LedgerFile& f) {
    const RunLedger& led = f.run;
    std::vector<Claim> out;
    auto metric = [&](const char* k, double fallback) {
        auto it = f.metrics.find(k);
        return it == f.metrics.end() ? fallback : it->second;
    };
    out.push_back({"apriori_monitors", led.status == "Completed", led.status + (led.detail.empty() ? "" : ": " + led.detail)});
    bool mono = true;
    for (std::size_t k = 1; k < led.snapshots.size(); ++k) mono = mono && led.snapshots[k].SN >= led.snapshots[k - 1].SN;
    out.push_back({"sn_monotone", mono, kv({{"snapshots", double(led.snapshots.size())}})});

    if (led.epsilon == 0.0 && led.lambda == 0.0) {
        double worst = 0.0;
        for (const SnapshotRecord& s : led.snapshots) worst = std::max(worst, s.theta_inf + s.V_inf);
        const double reached = led.snapshots.empty() ? 0.0 : led.snapshots.back().tau;
        out.push_back({"zero_fixed_point", worst <= 1e-12 && reached >= led.tau_end,
                       kv({{"max_theta_plus_V", worst}, {"tau_reached", reached}})});
    }

    const double threshold = metric("support_threshold", 1e-8);
    try {
        const PropagationReport p = support_and_propagation(led, threshold);
        out.push_back({"finite_propagation", p.empty_support || (p.within_cone && p.r2 >= 0.98),
                       kv({{"threshold", threshold},
                           {"K_fit", p.K_fit},
                           {"intercept", p.intercept},
                           {"r2", p.r2},
                           {"worst_excess", p.worst_excess},
                           {"c_max0", p.c_max0},
                           {"radius_final", p.radius.back()}})});
    } catch (const Error& e) {
        out.push_back({"finite_propagation", false, e.what()});
    }

    DecayOptions opt;
    opt.tau_min = metric("decay_tau_min", opt.tau_min);
    opt.window_fraction = metric("window_fraction", opt.window_fraction);
    opt.plateau_tau = metric("plateau_tau", opt.plateau_tau);
    opt.coercivity_max = metric("coercivity_max", opt.coercivity_max);
    const ExponentSet exps{led.sigma, led.delta, led.mu1, led.mu0, led.alpha};
    try {
        const DecayReport d = decay_and_coercivity(led, exps, opt);
        out.push_back({"global_boundedness", d.bounded_pass,
                       kv({{"SN_plateau", d.SN_plateau},
                           {"SN_final", d.SN_final},
                           {"ratio", d.SN_plateau > 0.0 ? d.SN_final / d.SN_plateau : 0.0},
                           {"tail_log_slope", d.SN_tail.exponent}})});
        out.push_back({"curl_decay", d.decay_pass,
                       kv({{"exponent", d.BN_V.exponent},
                           {"target", d.target},
                           {"r2", d.BN_V.r2},
                           {"tau_lo", d.BN_V.tau_lo},
                           {"tau_hi", d.BN_V.tau_hi}})});
        out.push_back({"coercivity", d.coercivity_pass,
                       kv({{"constant", d.coercivity_constant}, {"limit", opt.coercivity_max}})});
        out.push_back({"norm_energy_equivalence",
                       std::isfinite(d.C2) && d.C1 > 0.0 && d.C2 > 0.0 && d.C1 <= 2.0 * d.C2,
                       kv({{"C1", d.C1}, {"C2", d.C2}, {"C1_over_C2", d.C2 > 0.0 ? d.C1 / d.C2 : 0.0}})});
    } catch (const Error& e) {
        for (const char* name : {"global_boundedness", "curl_decay", "coercivity", "norm_energy_equivalence"})
            out.push_back({name, false, e.what()});
    }

    double mass0 = -1.0, mass_drift = 0.0, mom = 0.0;
    bool have = false;
    for (const SnapshotRecord& s : led.snapshots) {
        if (s.mass < 0.0) continue;
        if (!have) mass0 = s.mass;
        have = true;
        mass_drift = std::max(mass_drift, std::fabs(s.mass - mass0) / mass0);
        mom = std::max(mom, s.momentum_residual);
    }
    if (have) {
        out.push_back({"lagrangian_mass", mass_drift <= 1e-12, kv({{"max_rel_drift", mass_drift}})});
        out.push_back({"lagrangian_momentum", std::isfinite(mom),
                       kv({{"max_residual", mom}, {"relative", mom / std::max(metric("momentum_scale", 1.0), 1e-300)}})});
    }
    return out;
}

RunResult run_evolve(const Scenario& s, const RunOptions& opt) {
    fs::create_directories(opt.out);
    const EvolverConfig& cfg = s.evolver;
    const AffineSetup st = prepare_affine(s, cfg.tau_end * 1.01 + 0.01);
    const ExponentSet exps = s.exponent_set(st.mu1.mu1);
    const double cbar = s.affine.cbar();
    const Grid3& g = cfg.grid;
    const ModulationFrame f0 = frame_at(0.0, st.rs);
    const ProfileBundle bundle =
        build_profiles(g, cfg.lambda, cfg.epsilon, cfg.N, make_context(f0, exps.sigma, exps.delta, cbar, exps.alpha));

    RunResult res;
    if (s.diagnostics.field_slices) fs::create_directories(opt.out / "slices");
    double momentum_scale = 0.0;
    auto hook = [&](const FlowState& fs_, const ModulationFrame& fr, const VecField& accel, SnapshotRecord& r) {
        if (s.diagnostics.lagrangian_check) {
            const LagrangianFields lf = lagrangian_reconstruct(g, fs_, accel, fr, *st.traj, bundle.profiles);
            r.momentum_residual = lf.momentum_residual;
            r.mass = lf.mass;
            momentum_scale = std::max(momentum_scale, lf.momentum_scale);
        }
        if (s.diagnostics.field_slices) {
            char name[64];
            std::snprintf(name, sizeof name, "slice_%06d.csv", r.step);
            write_slice(opt.out / "slices" / name, g, fs_);
            res.files.push_back(opt.out / "slices" / name);
        }
        if (opt.progress)
            std::fprintf(stderr, "step %d tau %.4f SN %.6e BN_V %.6e\n", r.step, r.tau, r.norms.SN_inst,
                         r.norms.BN_V);
    };
    LedgerFile f;
    f.kind = "evolve";
    f.scenario = s.name;
    f.run = evolve(cfg, st.rs, exps, cbar, bundle, hook);
    f.metrics = {{"support_threshold", s.diagnostics.support_threshold},
                 {"decay_tau_min", s.diagnostics.decay.tau_min},
                 {"window_fraction", s.diagnostics.decay.window_fraction},
                 {"plateau_tau", s.diagnostics.decay.plateau_tau},
                 {"coercivity_max", s.diagnostics.decay.coercivity_max},
                 {"momentum_scale", momentum_scale},
                 {"mu1_pre_asymptotic", st.mu1.pre_asymptotic ? 1.0 : 0.0},
                 {"cfl", cfg.cfl},
                 {"dtau_max", cfg.dtau_max}};
    f.claims = evolve_claims(f);

    write_ledger(opt.out / "ledger.jsonl", f);
    res.files.push_back(opt.out / "ledger.jsonl");
    {
        auto os = open_out(opt.out / "snapshots.csv", res);
        write_snapshots_csv(os, f.run, s.diagnostics.support_threshold);
    }
    {
        std::vector<double> taus;
        for (const SnapshotRecord& r : f.run.snapshots)
            if (taus.empty() || r.tau > taus.back()) taus.push_back(r.tau);
        auto os = open_out(opt.out / "frames.csv", res);
        write_frames_csv(os, frames_along(taus, st.rs));
    }
    res.claims = f.claims;
    return res;
}

RunResult run_verify(const Scenario& s, const RunOptions& opt) {
    fs::create_directories(opt.out);
    const VerifyConfig& v = s.verify;
    const AffineSetup st = prepare_affine(s, v.frame_tau + v.temporal_h.front() + 0.01);
    RunResult res;
    LedgerFile f;
    f.kind = "verify";
    f.scenario = s.name;
    f.run.alpha = s.affine.alpha;
    f.metrics = {{"seed", double(v.seed)}, {"amplitude", v.amplitude}};

    std::vector<IdentityRow> raw;
    const auto conv = identity_convergence(v, st.rs, s.affine.alpha, &raw);
    for (const IdentityConvergence& c : conv)
        f.claims.push_back({"identity:" + c.name, c.pass,
                            kv({{"observed_order", c.observed_order},
                                {"expected_order", double(c.order)},
                                {"min_ratio", c.min_ratio},
                                {"residual_last", c.residuals.back()}})});
    {
        auto os = open_out(opt.out / "identities.csv", res);
        write_identity_csv(os, raw);
    }
    {
        auto os = open_out(opt.out / "identity_orders.csv", res);
        write_convergence_csv(os, conv);
    }

    const ResidualLadder& lad = s.residual;
    const AffineFields model(st.traj);
    double dt = lad.dt_probe;
    for (int n : lad.n) {
        f.residuals.push_back(eulerian_residual(model, lad.t, Grid3::make(lad.half_width, n), dt));
        dt *= 0.5;
    }
    constexpr double kFloor = 1e-9;
    double worst_ratio = INFINITY;
    for (std::size_t k = 0; k + 1 < f.residuals.size(); ++k) {
        const ResidualReport &a = f.residuals[k], &b = f.residuals[k + 1];
        for (auto [ra, rb] : {std::pair{a.mass_max, b.mass_max}, std::pair{a.momentum_max, b.momentum_max},
                              std::pair{a.energy_max, b.energy_max}})
            if (ra > kFloor) worst_ratio = std::min(worst_ratio, ra / rb);
    }
    f.claims.push_back({"dyson_residual", worst_ratio >= 8.0,
                        kv({{"min_ratio", worst_ratio},
                            {"mass_max_last", f.residuals.back().mass_max},
                            {"momentum_max_last", f.residuals.back().momentum_max},
                            {"energy_max_last", f.residuals.back().energy_max}})});

    const Grid3 gfine = Grid3::make(lad.half_width, lad.n.back());
    const ResidualReport corrupted =
        eulerian_residual(model, lad.t, gfine, dt * 2.0, FieldCorruption{lad.corruption});
    const double jump = corrupted.energy_max / f.residuals.back().energy_max;
    f.claims.push_back({"corrupted_temperature", jump >= 100.0,
                        kv({{"energy_ratio", jump}, {"factor", lad.corruption}})});

    const ResidualReport rest =
        eulerian_residual(RestState(1.3, 0.7, s.affine.alpha), lad.t, Grid3::make(lad.half_width, lad.n.front()), dt);
    const double rest_max = std::max({rest.mass_max, rest.momentum_max, rest.energy_max});
    f.claims.push_back({"rest_state_residual", rest_max == 0.0, kv({{"max_residual", rest_max}})});

    const auto mass_at = [&](double t) {
        const Grid3 gm = Grid3::make(8.0 * spectral_norm(st.traj->eval_precise(t).A), 81);
        const auto ev = model.instant(t);
        Field rho = gm.scalar();
        for (int k = 0; k < gm.n; ++k)
            for (int j = 0; j < gm.n; ++j)
                for (int i = 0; i < gm.n; ++i) rho[gm.idx(i, j, k)] = ev({gm.coord(i), gm.coord(j), gm.coord(k)}).rho;
        return integrate(gm, rho);
    };
    const double exact = std::pow(2.0 * std::numbers::pi, 1.5);
    const double m_err = std::max(std::fabs(mass_at(0.0) / exact - 1.0), std::fabs(mass_at(lad.t) / exact - 1.0));
    f.claims.push_back({"affine_mass", m_err <= 1e-6, kv({{"max_rel_error", m_err}})});

    {
        auto os = open_out(opt.out / "dyson_residuals.csv", res);
        os << "n,dx,dt_probe,mass_max,mass_l2,momentum_max,momentum_l2,energy_max,energy_l2\n";
        for (const ResidualReport& r : f.residuals)
            os << r.n << ',' << fmt17(r.dx) << ',' << fmt17(r.dt_probe) << ',' << fmt17(r.mass_max) << ','
               << fmt17(r.mass_l2) << ',' << fmt17(r.momentum_max) << ',' << fmt17(r.momentum_l2) << ','
               << fmt17(r.energy_max) << ',' << fmt17(r.energy_l2) << '\n';
    }
    write_ledger(opt.out / "verify_ledger.jsonl", f);
    res.files.push_back(opt.out / "verify_ledger.jsonl");
    res.claims = f.claims;
    return res;
}

RunResult emit_report(const std::vector<fs::path>& ledgers, const fs::path& out) {
    if (ledgers.empty()) throw ConfigError("ledgers", "empty ledger set");
    struct Entry {
        fs::path path;
        LedgerFile file;
        std::vector<Claim> claims;
    };
    std::vector<std::string> order;
    std::map<std::string, std::vector<Entry>> groups;
    for (const fs::path& p : ledgers) {
        Entry e{p, read_ledger(p), {}};
        e.claims = e.file.kind == "evolve" ? evolve_claims(e.file) : e.file.claims;
        if (!groups.count(e.file.scenario)) order.push_back(e.file.scenario);
        groups[e.file.scenario].push_back(std::move(e));
    }
    fs::create_directories(out);
    RunResult res;
    auto txt = open_out(out / "summary.txt", res);
    auto csv = open_out(out / "report.csv", res);
    csv << "scenario,kind,ledger,claim,pass,measured\n";
    for (const std::string& name : order) {
        const auto& entries = groups[name];
        txt << "== scenario " << name << " (alpha=" << fmt17(entries.front().file.run.alpha) << ") ==\n";
        for (const Entry& e : entries) {
            txt << "[" << e.file.kind << "] " << e.path.string() << '\n';
            for (const Claim& c : e.claims) {
                txt << "  " << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << "  " << c.measured << '\n';
                csv << name << ',' << e.file.kind << ',' << e.path.string() << ',' << c.name << ','
                    << (c.pass ? "pass" : "fail") << ",\"" << c.measured << "\"\n";
                res.claims.push_back(c);
            }
        }
        txt << '\n';
    }
    return res;
}

}  // namespace affinegas
