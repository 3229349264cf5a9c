#include "affinegas/affine.hpp"

#include <algorithm>
#include <array>
#include <ostream>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

double AffineParams::cbar() const { return Tbar * std::pow(det(A0), 1.0 / alpha); }

void AffineParams::validate() const {
    if (!(det(A0) > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A0 must be positive");
    if (!(Tbar > 0.0)) throw ConfigError("Tbar", "must be positive");
    if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
}

Mat3 affine_rhs(const Mat3& A, const AffineParams& params) {
    const double d = det(A);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    const Mat3 inv_t = transpose((1.0 / d) * adjugate(A));
    return (params.force_scale * params.cbar() * std::pow(d, -1.0 / params.alpha)) * inv_t;
}

double ode_energy(const Mat3& A, const Mat3& Adot, const AffineParams& params) {
    const double d = det(A);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    double kin = 0.0;
    for (double v : Adot.a) kin += v * v;
    return 0.5 * kin + params.force_scale * params.alpha * params.cbar() * std::pow(d, -1.0 / params.alpha);
}

namespace {

using State = std::array<double, 18>;

State pack(const Mat3& A, const Mat3& Adot) {
    State s;
    std::copy(A.a.begin(), A.a.end(), s.begin());
    std::copy(Adot.a.begin(), Adot.a.end(), s.begin() + 9);
    return s;
}

Mat3 part(const State& s, int off) {
    Mat3 m;
    std::copy(s.begin() + off, s.begin() + off + 9, m.a.begin());
    return m;
}

State deriv(const State& s, const AffineParams& p) {
    const Mat3 acc = affine_rhs(part(s, 0), p);
    State d;
    std::copy(s.begin() + 9, s.end(), d.begin());
    std::copy(acc.a.begin(), acc.a.end(), d.begin() + 9);
    return d;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct StepResult {
    State y;
    State f_new;
    double err = 0.0;
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State r = y;
    for (const auto& [c, k] : terms)
        for (int i = 0; i < 18; ++i) r[i] += h * c * (*k)[i];
    return r;
}

StepResult dp_step(const State& y, const State& k1, double h, double rtol, const AffineParams& p) {
    const State k2 = deriv(axpy(y, h, {{a21, &k1}}), p);
    const State k3 = deriv(axpy(y, h, {{a31, &k1}, {a32, &k2}}), p);
    const State k4 = deriv(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), p);
    const State k5 = deriv(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), p);
    const State k6 = deriv(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), p);
    StepResult r;
    r.y = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    if (!(det(part(r.y, 0)) > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "trial step left GL+");
    r.f_new = deriv(r.y, p);
    double acc = 0.0;
    for (int i = 0; i < 18; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * r.f_new[i]);
        const double sc = rtol * (1.0 + std::max(std::fabs(y[i]), std::fabs(r.y[i])));
        acc += (e / sc) * (e / sc);
    }
    r.err = std::sqrt(acc / 18.0);
    return r;
}

// Drives the adaptive loop; `on_accept` sees every accepted node.
template <class Callback>
TrajectoryStatus drive(const AffineParams& p, double t0, State y, double t1, double rtol, Callback&& on_accept) {
    State f = deriv(y, p);
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::fabs(v));
    double h = std::min(t1 - t0, 0.01 / std::max(1.0, scale));
    double t = t0;
    double err_prev = 1.0;
    const double det0 = det(part(y, 0));
    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h <= 1e-14 * std::max(1.0, std::fabs(t))) {
            if (det(part(y, 0)) <= 1e-10 * det0) return TrajectoryStatus::Collapsed;
            throw Error(ErrorKind::StepFailure, "step size underflow at t=" + fmt17(t));
        }
        StepResult r;
        bool ok = true;
        try {
            r = dp_step(y, f, h, rtol, p);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonPositiveDeterminant) throw;
            ok = false;
        }
        if (!ok || !std::isfinite(r.err)) {
            h *= 0.25;
            continue;
        }
        if (r.err <= 1.0) {
            const bool last = (t + h >= t1);
            t = last ? t1 : t + h;
            y = r.y;
            f = r.f_new;
            on_accept(t, y, f);
            const double e = std::max(r.err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            h *= fac;
            err_prev = e;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
        }
    }
    return TrajectoryStatus::Completed;
}

double hermite(double y0, double y1, double d0, double d1, double h, double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

}  // namespace

AffineTrajectory integrate_affine(const AffineParams& params, double t_end, double rel_tol) {
    params.validate();
    if (!(t_end > 0.0)) throw ConfigError("t_end", "must be positive");
    if (!(rel_tol >= 1e-12 && rel_tol <= 1e-4)) throw ConfigError("rel_tol", "must lie in [1e-12, 1e-4]");
    AffineTrajectory tr;
    tr.params = params;
    auto push = [&](double t, const State& y, const State& f) {
        tr.t.push_back(t);
        tr.A.push_back(part(y, 0));
        tr.Adot.push_back(part(y, 9));
        tr.Addot.push_back(part(f, 9));
        tr.detA.push_back(det(tr.A.back()));
    };
    const State y0 = pack(params.A0, params.A0dot);
    push(0.0, y0, deriv(y0, params));
    tr.status = drive(params, 0.0, y0, t_end, rel_tol, push);
    return tr;
}

AffineState propagate_affine(const AffineParams& params, double t0, const AffineState& state, double t1,
                             double rel_tol) {
    if (t1 == t0) return state;
    State last = pack(state.A, state.Adot);
    drive(params, t0, last, t1, rel_tol, [&](double, const State& y, const State&) { last = y; });
    return {part(last, 0), part(last, 9)};
}

std::size_t AffineTrajectory::interval(double time) const {
    if (t.size() < 2 || time < t.front() || time > t.back())
        throw Error(ErrorKind::OutOfRange, "time " + fmt17(time) + " outside trajectory");
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = std::size_t(it - t.begin());
    return i == 0 ? 0 : std::min(i - 1, t.size() - 2);
}

AffineState AffineTrajectory::eval(double time) const {
    const std::size_t i = interval(time);
    const double h = t[i + 1] - t[i];
    const double s = (time - t[i]) / h;
    AffineState out;
    for (int k = 0; k < 9; ++k) {
        out.A.a[k] = hermite(A[i].a[k], A[i + 1].a[k], Adot[i].a[k], Adot[i + 1].a[k], h, s);
        out.Adot.a[k] = hermite(Adot[i].a[k], Adot[i + 1].a[k], Addot[i].a[k], Addot[i + 1].a[k], h, s);
    }
    return out;
}

AffineState AffineTrajectory::eval_precise(double time) const {
    const std::size_t i = interval(time);
    return propagate_affine(params, t[i], {A[i], Adot[i]}, time, 1e-13);
}

AsymptoticFit asymptotic_fit(const AffineTrajectory& traj) {
    if (traj.t.empty() || traj.t_end() < 100.0)
        throw Error(ErrorKind::TrajectoryTooShort, "asymptotic fit needs t_end >= 100");
    AsymptoticFit fit;
    fit.A1_est = traj.Adot.back();
    const double d1 = det(fit.A1_est);
    fit.mu1_est = d1 > 0.0 ? std::cbrt(d1) : 0.0;
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        fit.ratio_series.emplace_back(traj.t[i], traj.detA[i] / (1.0 + traj.t[i] * traj.t[i] * traj.t[i]));
    const double lo = traj.t_end() / 100.0, hi = traj.t_end() / 10.0;
    std::vector<double> xs, ys;
    constexpr int samples = 40;
    for (int k = 0; k < samples; ++k) {
        const double tt = lo * std::pow(hi / lo, double(k) / (samples - 1));
        const double dev = frobenius(traj.eval(tt).Adot - fit.A1_est);
        if (dev > 0.0) {
            xs.push_back(std::log(1.0 + tt));
            ys.push_back(std::log(dev));
        }
    }
    fit.M_decay_exponent = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
    return fit;
}

double ratio_variation(const AsymptoticFit& fit, double t_lo, double t_hi) {
    double mn = INFINITY, mx = -INFINITY;
    for (const auto& [t, r] : fit.ratio_series) {
        if (t < t_lo || t > t_hi) continue;
        mn = std::min(mn, r);
        mx = std::max(mx, r);
    }
    if (!(mn > 0.0)) throw Error(ErrorKind::WindowTooShort, "no positive ratio samples in window");
    return mx / mn - 1.0;
}

void write_trajectory_csv(std::ostream& os, const AffineTrajectory& traj) {
    os << "t";
    for (int k = 0; k < 9; ++k) os << ",A" << k / 3 << k % 3;
    for (int k = 0; k < 9; ++k) os << ",Adot" << k / 3 << k % 3;
    os << ",detA,energy\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        os << fmt17(traj.t[i]);
        for (double v : traj.A[i].a) os << ',' << fmt17(v);
        for (double v : traj.Adot[i].a) os << ',' << fmt17(v);
        os << ',' << fmt17(traj.detA[i]) << ',' << fmt17(ode_energy(traj.A[i], traj.Adot[i], traj.params)) << '\n';
    }
}

}  // namespace affinegas
