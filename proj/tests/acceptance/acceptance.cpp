// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status 1 if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "affinegas/diagnostics.hpp"
#include "affinegas/error.hpp"
#include "affinegas/eulerian.hpp"
#include "affinegas/runner.hpp"

using namespace affinegas;
namespace fs = std::filesystem;

namespace {

struct Line {
    std::string name;
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw Error(ErrorKind::ConfigInvalid, "cannot open " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Five seeded configurations, alpha in {3/2, 3, 3/2, 2, 5/2}.
std::vector<AffineParams> seeded_family() {
    const double alphas[5] = {1.5, 3.0, 1.5, 2.0, 2.5};
    std::vector<AffineParams> out;
    for (int s = 0; s < 5; ++s) {
        Uniform u(1000 + s);
        AffineParams p;
        for (int k = 0; k < 9; ++k) {
            p.A0.a[k] += 0.1 * u.in(-1.0, 1.0);
            p.A0dot.a[k] = 0.2 * u.in(-1.0, 1.0);
        }
        for (int k = 0; k < 3; ++k) p.A0dot(k, k) += 1.0;
        p.Tbar = u.in(0.5, 1.5);
        p.alpha = alphas[s];
        out.push_back(p);
    }
    return out;
}

Line energy_conservation(const std::vector<AffineParams>& family) {
    Line l{"affine_energy_conservation", false, ""};
    l.pass = true;
    double worst = 0.0, slowest = 0.0;
    for (const AffineParams& p : family) {
        const Timer clock;
        const AffineTrajectory tr = integrate_affine(p, 100.0, 1e-10);
        const double E0 = ode_energy(p.A0, p.A0dot, p);
        double drift = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            drift = std::max(drift, std::fabs(ode_energy(tr.A[k], tr.Adot[k], p) - E0) / std::fabs(E0));
        for (int k = 0; k <= 100; ++k) {
            const AffineState s = tr.eval_precise(double(k));
            drift = std::max(drift, std::fabs(ode_energy(s.A, s.Adot, p) - E0) / std::fabs(E0));
        }
        const double secs = clock.seconds();
        worst = std::max(worst, drift);
        slowest = std::max(slowest, secs);
        l.pass = l.pass && drift <= 1e-8 && secs < 5.0;
    }
    l.detail = "max_rel_drift=" + num(worst) + " (<= 1e-8) slowest_s=" + num(slowest) + " (< 5)";
    return l;
}

Line det_growth(const std::vector<AffineParams>& family) {
    Line l{"det_growth", false, ""};
    l.pass = true;
    const Timer clock;
    std::string vars;
    double lo = INFINITY, hi = 0.0;
    for (const AffineParams& p : family) {
        const AffineTrajectory tr = integrate_affine(p, 1000.0, 1e-10);
        double mn = INFINITY, mx = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            const double t = tr.t[k];
            const double r = det(tr.A[k]) / (1.0 + t * t * t);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            if (t >= 100.0) {
                mn = std::min(mn, r);
                mx = std::max(mx, r);
            }
        }
        const double var = mx / mn - 1.0;
        vars += (vars.empty() ? "" : "/") + num(var);
        l.pass = l.pass && var < 0.01;
    }
    const double secs = clock.seconds();
    l.pass = l.pass && lo > 0.0 && std::isfinite(hi) && secs < 30.0;
    l.detail = "band=[" + num(lo) + "," + num(hi) + "] variation_100_1000=" + vars + " (< 0.01 each) s=" + num(secs);
    return l;
}

Line derivative_decay(const std::vector<AffineParams>& family) {
    Line l{"asymptotic_derivative_decay", false, ""};
    l.pass = true;
    std::string slopes;
    for (const AffineParams& p : family) {
        const AsymptoticFit fit = asymptotic_fit(integrate_affine(p, 1000.0, 1e-10));
        const double bound = -3.0 / p.alpha + 0.3;
        slopes += (slopes.empty() ? "" : " ") + num(fit.M_decay_exponent) + "<=" + num(bound);
        l.pass = l.pass && fit.M_decay_exponent <= bound;
    }
    l.detail = "slopes " + slopes;
    return l;
}

Line dyson_residual(const Scenario& ref) {
    Line l{"dyson_exact_solution_residual", false, ""};
    const AffineFields model(std::make_shared<AffineTrajectory>(integrate_affine(ref.affine, 10.0, 1e-12)));
    const ResidualLadder& lad = ref.residual;
    std::vector<ResidualReport> levels;
    double dt = lad.dt_probe;
    for (int n : lad.n) {
        levels.push_back(eulerian_residual(model, lad.t, Grid3::make(lad.half_width, n), dt));
        dt *= 0.5;
    }
    constexpr double floor = 1e-9;
    double worst = INFINITY;
    int live = 0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const ResidualReport &a = levels[k], &b = levels[k + 1];
        for (auto [ra, rb] : {std::pair{a.mass_max, b.mass_max}, std::pair{a.momentum_max, b.momentum_max},
                              std::pair{a.energy_max, b.energy_max}})
            if (ra > floor) {
                worst = std::min(worst, ra / rb);
                ++live;
            }
    }
    l.pass = levels.size() >= 3 && live > 0 && worst >= 8.0;
    l.detail = "levels=" + std::to_string(levels.size()) + " min_ratio=" + num(worst) + " (>= 8) energy_last=" +
               num(levels.back().energy_max);
    return l;
}

Line temperature_invariance(const std::vector<AffineParams>& family, const Scenario& ref) {
    Line l{"temperature_invariance", false, ""};
    double worst = 0.0;
    std::vector<AffineParams> all = family;
    all.push_back(ref.affine);
    for (const AffineParams& p : all) {
        const AffineTrajectory tr = integrate_affine(p, 1000.0, 1e-10);
        const double T0 = p.Tbar;
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            const double d = det(tr.A[k]);
            const double T = p.cbar() * std::pow(d, -1.0 / p.alpha);
            worst = std::max(worst, std::fabs(std::pow(T / T0, p.alpha) * d / det(p.A0) - 1.0));
        }
        worst = std::max(worst, temperature_invariant_drift(tr));
    }
    l.pass = worst <= 1e-10;
    l.detail = "max_rel_drift=" + num(worst) + " (<= 1e-10)";
    return l;
}

Line zero_fixed_point(const std::string& ref_text, const fs::path& out) {
    Line l{"zero_fixed_point", false, ""};
    const Timer clock;
    const Scenario s = parse_scenario(ref_text, {{"name", "\"zero\""},
                                                 {"evolver__epsilon", "0"},
                                                 {"evolver__lambda", "0"},
                                                 {"evolver__tau_end", "10"},
                                                 {"evolver__grid__n", "33"},
                                                 {"evolver__grid__half_width", "4.2"}});
    run_evolve(s, RunOptions{out});
    const LedgerFile f = read_ledger(out / "ledger.jsonl");
    double worst = 0.0;
    for (const SnapshotRecord& r : f.run.snapshots) worst = std::max(worst, r.theta_inf + r.V_inf);
    const double reached = f.run.snapshots.empty() ? 0.0 : f.run.snapshots.back().tau;
    const double secs = clock.seconds();
    l.pass = f.run.n == 33 && worst <= 1e-12 && reached >= 10.0 - 1e-12 && secs < 120.0;
    l.detail = "grid=" + std::to_string(f.run.n) + "^3 tau_reached=" + num(reached) +
               " max_theta_plus_V=" + num(worst) + " (<= 1e-12) s=" + num(secs) + " (< 120)";
    return l;
}

struct ReferenceRun {
    LedgerFile ledger;
    double seconds = 0.0;
};

ReferenceRun reference_run(const Scenario& ref, const fs::path& out) {
    const Timer clock;
    run_evolve(ref, RunOptions{out});
    return {read_ledger(out / "ledger.jsonl"), clock.seconds()};
}

Line finite_propagation(const ReferenceRun& run, double threshold) {
    Line l{"finite_propagation", false, ""};
    const RunLedger& led = run.ledger.run;
    const PropagationReport p = support_and_propagation(led, threshold);
    double worst = -INFINITY;
    for (std::size_t k = 0; k < p.tau.size(); ++k)
        worst = std::max(worst, p.radius[k] - (1.0 + p.K_fit * p.tau[k] + 3.0 * led.dx));
    l.pass = !p.empty_support && worst <= 0.0 && p.r2 >= 0.98;
    l.detail = "K_fit=" + num(p.K_fit) + " r2=" + num(p.r2) + " (>= 0.98) worst_excess=" + num(worst) +
               " (<= 0) radius_final=" + num(p.radius.back());
    return l;
}

ExponentSet exponents_of(const RunLedger& led) { return {led.sigma, led.delta, led.mu1, led.mu0, led.alpha}; }

DecayOptions decay_options(const Scenario& ref) { return ref.diagnostics.decay; }

Line global_boundedness(const ReferenceRun& run, const Scenario& ref) {
    Line l{"global_boundedness", false, ""};
    const RunLedger& led = run.ledger.run;
    const DecayReport d = decay_and_coercivity(led, exponents_of(led), decay_options(ref));
    const bool shape = led.n == 49 && led.tau_end == 10.0 && led.epsilon == 1e-4 && led.lambda == 1e-5;
    const bool done = led.status == "Completed" && !led.snapshots.empty() && led.snapshots.back().tau >= 10.0 - 1e-9;
    l.pass = shape && done && d.SN_final <= 3.0 * d.SN_plateau && d.SN_tail.exponent <= 0.01 && run.seconds < 1800.0;
    l.detail = "SN_final/SN_plateau=" + num(d.SN_final / d.SN_plateau) + " (<= 3) tail_slope=" +
               num(d.SN_tail.exponent) + " (<= 0.01) status=" + led.status + " s=" + num(run.seconds) + " (< 1800)";
    return l;
}

Line curl_decay(const ReferenceRun& run, const Scenario& ref) {
    Line l{"curl_decay_trend", false, ""};
    const RunLedger& led = run.ledger.run;
    const DecayReport d = decay_and_coercivity(led, exponents_of(led), decay_options(ref));
    const double target = -2.0 * led.mu0;
    l.pass = !d.BN_V.skipped && std::fabs(d.BN_V.exponent - target) <= 0.5 * std::fabs(target);
    l.detail = "exponent=" + num(d.BN_V.exponent) + " target=" + num(target) + " band=[" + num(1.5 * target) + "," +
               num(0.5 * target) + "] window=[" + num(d.BN_V.tau_lo) + "," + num(d.BN_V.tau_hi) + "]";
    return l;
}

Line coercivity(const ReferenceRun& run, const Scenario& ref) {
    Line l{"coercivity", false, ""};
    const RunLedger& led = run.ledger.run;
    const DecayReport d = decay_and_coercivity(led, exponents_of(led), decay_options(ref));
    bool finite = !d.coercivity.empty();
    std::size_t expected = 0;
    for (const MultiIndex& nu : multi_indices(led.N))
        if (order_of(nu) <= led.N - 1) ++expected;
    for (const CoercivityRow& r : d.coercivity)
        finite = finite && std::isfinite(r.theta) && std::isfinite(r.grad) && std::isfinite(r.div);
    l.pass = finite && d.coercivity.size() == expected && d.coercivity_constant <= 10.0;
    l.detail = "rows=" + std::to_string(d.coercivity.size()) + "/" + std::to_string(expected) +
               " constant=" + num(d.coercivity_constant) + " (<= 10)";
    return l;
}

Line identity_suites(const Scenario& ref) {
    Line l{"identity_suites", false, ""};
    const AffineSetup st = prepare_affine(ref, ref.verify.frame_tau + ref.verify.temporal_h.front() + 1.0);
    const auto rows = identity_convergence(ref.verify, st.rs, ref.affine.alpha);
    const auto again = identity_convergence(ref.verify, st.rs, ref.affine.alpha);
    bool deterministic = rows.size() == again.size();
    for (std::size_t k = 0; deterministic && k < rows.size(); ++k)
        deterministic = rows[k].residuals == again[k].residuals;
    const char* required[] = {"curl_gradient", "piola", "jacobi", "key_energy", "a_identity",
                              "lambda_identity", "aj_identity", "j_expansion", "aj_expansion"};
    bool all = deterministic;
    std::string parts;
    for (const char* name : required) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const IdentityConvergence& c) { return c.name == name; });
        if (it == rows.end()) {
            all = false;
            parts += std::string(" ") + name + "=missing";
            continue;
        }
        all = all && it->pass;
        parts += std::string(" ") + name + "=";
        if (it->kind == IdentityKind::Exact)
            parts += num(it->calibrated_constant);
        else
            parts += "x" + num(it->min_ratio) + "/x" + num(std::pow(2.0, it->order));
    }
    l.pass = all;
    l.detail = std::string("deterministic=") + (deterministic ? "yes" : "no") + parts;
    return l;
}

Line frame_bounds(const Scenario& ref) {
    Line l{"frame_bounds", false, ""};
    const double tau_max = ref.diagnostics.frame_tau_max;
    const AffineSetup st = prepare_affine(ref, tau_max);
    const ExponentSet e = ref.exponent_set(st.mu1.mu1);
    std::vector<double> taus;
    for (double t = 0.0; t <= tau_max + 1e-12; t += ref.diagnostics.frame_step) taus.push_back(t);
    const BoundReport b = verify_frame_bounds(frames_along(taus, st.rs), e, ref.diagnostics.decay.tau_min);
    const double bound = -0.75 * e.mu1;
    l.pass = std::isfinite(b.lambda_norm_sum) && std::isfinite(b.eig_sum) && b.lambda_tau.rate <= bound &&
             b.eig_derivs.rate <= bound;
    l.detail = "lambda_norm_sum=" + num(b.lambda_norm_sum) + " eig_sum=" + num(b.eig_sum) +
               " lambda_tau_rate=" + num(b.lambda_tau.rate) + " eig_derivs_rate=" + num(b.eig_derivs.rate) +
               " (<= " + num(bound) + ")";
    return l;
}

Line guarded(const std::string& name, const std::function<Line()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {name, false, std::string("error: ") + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path source = argc > 1 ? fs::path(argv[1]) : fs::path(AFFINEGAS_SOURCE_DIR);
    const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "affinegas_acceptance";
    fs::create_directories(out);
    const std::string ref_text = read_file(source / "configs" / "reference.json");
    const Scenario ref = parse_scenario(ref_text);
    const auto family = seeded_family();

    std::vector<Line> lines;
    auto report = [&](Line l) {
        std::printf("%s %s  %s\n", l.pass ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
        std::fflush(stdout);
        lines.push_back(std::move(l));
    };

    report(guarded("affine_energy_conservation", [&] { return energy_conservation(family); }));
    report(guarded("det_growth", [&] { return det_growth(family); }));
    report(guarded("asymptotic_derivative_decay", [&] { return derivative_decay(family); }));
    report(guarded("dyson_exact_solution_residual", [&] { return dyson_residual(ref); }));
    report(guarded("temperature_invariance", [&] { return temperature_invariance(family, ref); }));
    report(guarded("zero_fixed_point", [&] { return zero_fixed_point(ref_text, out / "zero"); }));

    ReferenceRun run;
    std::string run_error;
    try {
        run = reference_run(ref, out / "reference");
    } catch (const std::exception& e) {
        run_error = std::string("reference run: ") + e.what();
    }
    auto on_run = [&](const std::string& name, const std::function<Line()>& fn) {
        if (!run_error.empty()) return Line{name, false, run_error};
        return guarded(name, fn);
    };
    report(on_run("finite_propagation", [&] { return finite_propagation(run, ref.diagnostics.support_threshold); }));
    report(on_run("global_boundedness", [&] { return global_boundedness(run, ref); }));
    report(on_run("curl_decay_trend", [&] { return curl_decay(run, ref); }));
    report(guarded("identity_suites", [&] { return identity_suites(ref); }));
    report(on_run("coercivity", [&] { return coercivity(run, ref); }));
    report(guarded("frame_bounds", [&] { return frame_bounds(ref); }));

    const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line& l) { return !l.pass; });
    std::printf("%zu/%zu criteria pass\n", lines.size() - std::size_t(failed), lines.size());
    return failed == 0 ? 0 : 1;
}
