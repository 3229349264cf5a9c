#include "affinegas/modulation.hpp"

#include <algorithm>
#include <ostream>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

Mat3 lambda_of(const Mat3& A) {
    const double d = det(A);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    const Mat3 inv = (1.0 / d) * adjugate(A);
    return std::cbrt(d * d) * (inv * transpose(inv));
}

namespace {

Mat3 lambda_at_tau(const TimeRescaling& rs, double tau) { return lambda_of(rs.traj->eval(rs.t_at(tau)).A); }

Mat3 lambda_tau(const TimeRescaling& rs, double tau) {
    const double h = 1e-4 * std::max(1.0, tau);
    const double lo = rs.tau_nodes.front(), hi = rs.tau_end();
    auto diff = [&](double step) -> Mat3 {
        if (tau - step >= lo && tau + step <= hi)
            return (0.5 / step) * (lambda_at_tau(rs, tau + step) - lambda_at_tau(rs, tau - step));
        const double s = tau + 2.0 * step <= hi ? step : -step;
        const Mat3 l0 = lambda_at_tau(rs, tau);
        return (0.5 / s) * (4.0 * lambda_at_tau(rs, tau + s) - 3.0 * l0 - lambda_at_tau(rs, tau + 2.0 * s));
    };
    const Mat3 dh = diff(h);
    const Mat3 dh2 = diff(0.5 * h);
    return (1.0 / 3.0) * (4.0 * dh2 - dh);
}

}  // namespace

ModulationFrame frame_at(double tau, const TimeRescaling& rs, const Mat3* prev) {
    if (tau < rs.tau_nodes.front() || tau > rs.tau_end())
        throw Error(ErrorKind::OutOfRange, "tau " + fmt17(tau) + " outside integrated range");
    ModulationFrame f;
    f.tau = tau;
    f.t = rs.t_at(tau);
    const AffineState s = rs.traj->eval(f.t);
    const Polar pol = polar_split(s.A);
    const Mat3 inv = inverse_unchecked(s.A);
    const double growth = trace(s.Adot * inv) / 3.0;  // mu_t / mu
    f.mu = pol.mu;
    f.mu_tau = f.mu * f.mu * growth;
    f.O = pol.o;
    f.GammaStar = f.mu * (inv * s.Adot - growth * Mat3::identity());
    f.Lambda = lambda_of(s.A);
    f.LambdaInv = (1.0 / (f.mu * f.mu)) * (transpose(s.A) * s.A);
    f.LambdaTau = lambda_tau(rs, tau);
    f.eig = sym_eig3(f.Lambda);
    if (prev) align_rotation(f.eig, *prev);
    const Mat3& P = f.eig.rotation;
    auto row = [&](int i) { return Vec3{P(i, 0), P(i, 1), P(i, 2)}; };
    const double gap_tol = 1e-9 * std::max({f.eig.values[0], f.eig.values[1], f.eig.values[2]});
    for (int i = 0; i < 3; ++i) {
        const Vec3 pi = row(i);
        f.d_tau[i] = dot(pi, f.LambdaTau * pi);
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            const double gap = f.eig.values[i] - f.eig.values[j];
            if (std::fabs(gap) < gap_tol) continue;
            const Vec3 pj = row(j);
            const double c = dot(pj, f.LambdaTau * pi) / gap;
            for (int k = 0; k < 3; ++k) f.P_tau(i, k) += c * pj[k];
        }
    }
    return f;
}

std::vector<ModulationFrame> frames_along(const std::vector<double>& taus, const TimeRescaling& rs) {
    std::vector<ModulationFrame> out;
    out.reserve(taus.size());
    for (double tau : taus) out.push_back(frame_at(tau, rs, out.empty() ? nullptr : &out.back().eig.rotation));
    return out;
}

namespace {

DecayFit fit_decay(const std::vector<double>& tau, const std::vector<double>& val, double mu1, double tau_min) {
    DecayFit fit;
    std::vector<double> xs, ys;
    bool all_zero = true;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (val[i] != 0.0) all_zero = false;
        if (tau[i] < tau_min || !(val[i] > 0.0)) continue;
        xs.push_back(tau[i]);
        ys.push_back(std::log(val[i]));
        fit.constant = std::max(fit.constant, val[i] * std::exp(mu1 * tau[i]));
    }
    if (all_zero) {
        fit.identically_zero = true;
        fit.pass = true;
        fit.within_25pct = true;
        return fit;
    }
    if (xs.size() < 3) return fit;
    fit.rate = fit_line(xs, ys).slope;
    fit.pass = fit.rate <= -0.75 * mu1;
    fit.within_25pct = std::fabs(fit.rate + mu1) <= 0.25 * mu1;
    return fit;
}

}  // namespace

BoundReport verify_frame_bounds(const std::vector<ModulationFrame>& frames, const ExponentSet& exps,
                                double fit_tau_min) {
    if (frames.size() < 10) throw Error(ErrorKind::InsufficientFrames, "need at least 10 frames");
    if (frames.back().tau - frames.front().tau < 10.0 * (1.0 - 1e-12))
        throw Error(ErrorKind::InsufficientFrames, "frames must span at least 10 in tau");
    BoundReport r;
    r.quad_lower = INFINITY;
    r.mu_ratio_lower = INFINITY;
    std::vector<double> taus, lt, ed;
    for (const auto& f : frames) {
        const Vec3& d = f.eig.values;
        const double dmax = std::max({d[0], d[1], d[2]}), dmin = std::min({d[0], d[1], d[2]});
        r.lambda_norm_sum = std::max(r.lambda_norm_sum, dmax + 1.0 / dmin);
        r.eig_sum = std::max(r.eig_sum, d[0] + d[1] + d[2] + 1.0 / d[0] + 1.0 / d[1] + 1.0 / d[2]);
        r.quad_lower = std::min(r.quad_lower, 1.0 / dmax);
        r.quad_upper = std::max(r.quad_upper, 1.0 / dmin);
        const double mr = f.mu * std::exp(-exps.mu1 * f.tau);
        r.mu_ratio_lower = std::min(r.mu_ratio_lower, mr);
        r.mu_ratio_upper = std::max(r.mu_ratio_upper, mr);
        taus.push_back(f.tau);
        lt.push_back(spectral_norm(f.LambdaTau));
        ed.push_back(std::fabs(f.d_tau[0]) + std::fabs(f.d_tau[1]) + std::fabs(f.d_tau[2]) + spectral_norm(f.P_tau));
    }
    r.lambda_tau = fit_decay(taus, lt, exps.mu1, fit_tau_min);
    r.eig_derivs = fit_decay(taus, ed, exps.mu1, fit_tau_min);
    return r;
}

void write_frames_csv(std::ostream& os, const std::vector<ModulationFrame>& frames) {
    os << "tau,mu,d1,d2,d3,normLambdaTau,normGammaStar\n";
    for (const auto& f : frames)
        os << fmt17(f.tau) << ',' << fmt17(f.mu) << ',' << fmt17(f.eig.values[0]) << ',' << fmt17(f.eig.values[1])
           << ',' << fmt17(f.eig.values[2]) << ',' << fmt17(spectral_norm(f.LambdaTau)) << ','
           << fmt17(spectral_norm(f.GammaStar)) << '\n';
}

}  // namespace affinegas
