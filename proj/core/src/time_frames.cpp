#include "affinegas/time_frames.hpp"

#include <algorithm>
#include <functional>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw Error(ErrorKind::QuadratureFailure, "adaptive Simpson recursion limit reached");
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double r = simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * std::fabs(whole), 40);
    if (!std::isfinite(r)) throw Error(ErrorKind::QuadratureFailure, "non-finite quadrature value");
    return r;
}

double mu_of(const AffineState& s) {
    const double d = det(s.A);
    if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDeterminant, "det A must be positive");
    return std::cbrt(d);
}

}  // namespace

double TimeRescaling::mu_at_t(double t) const { return mu_of(traj->eval(t)); }

double TimeRescaling::mu_tau_at_t(double t) const {
    const AffineState s = traj->eval(t);
    const double m = mu_of(s);
    return m * m / 3.0 * trace(s.Adot * inverse_unchecked(s.A));
}

double TimeRescaling::tau_at(double t) const {
    if (t < t_nodes.front() || t > t_nodes.back())
        throw Error(ErrorKind::OutOfRange, "t outside rescaling range");
    auto it = std::upper_bound(t_nodes.begin(), t_nodes.end(), t);
    const std::size_t i = it == t_nodes.begin() ? 0 : std::size_t(it - t_nodes.begin()) - 1;
    if (t == t_nodes[i]) return tau_nodes[i];
    auto inv_mu = [this](double s) { return 1.0 / mu_at_t(s); };
    return tau_nodes[i] + simpson(inv_mu, t_nodes[i], t, 1e-12);
}

double TimeRescaling::t_at(double tau) const {
    if (tau < tau_nodes.front() || tau > tau_nodes.back())
        throw Error(ErrorKind::OutOfRange, "tau " + fmt17(tau) + " outside rescaling range");
    auto it = std::upper_bound(tau_nodes.begin(), tau_nodes.end(), tau);
    std::size_t i = it == tau_nodes.begin() ? 0 : std::size_t(it - tau_nodes.begin()) - 1;
    if (tau == tau_nodes[i]) return t_nodes[i];
    i = std::min(i, tau_nodes.size() - 2);
    const double h = tau_nodes[i + 1] - tau_nodes[i];
    const double s = (tau - tau_nodes[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    double t = (2 * s3 - 3 * s2 + 1) * t_nodes[i] + (s3 - 2 * s2 + s) * h * mu[i] + (-2 * s3 + 3 * s2) * t_nodes[i + 1] +
               (s3 - s2) * h * mu[i + 1];
    auto inv_mu = [this](double x) { return 1.0 / mu_at_t(x); };
    for (int iter = 0; iter < 30; ++iter) {
        t = std::clamp(t, t_nodes[i], t_nodes[i + 1]);
        const double g = tau_nodes[i] + simpson(inv_mu, t_nodes[i], t, 1e-13) - tau;
        const double dt = g * mu_at_t(t);
        t -= dt;
        if (std::fabs(dt) <= 1e-15 * std::max(1.0, std::fabs(t))) break;
    }
    return std::clamp(t, t_nodes[i], t_nodes[i + 1]);
}

TimeRescaling build_rescaling(std::shared_ptr<const AffineTrajectory> traj) {
    if (!traj || traj->t.size() < 2) throw Error(ErrorKind::TrajectoryTooShort, "rescaling needs two nodes");
    TimeRescaling rs;
    rs.traj = traj;
    rs.t_nodes = traj->t;
    rs.tau_nodes.assign(traj->t.size(), 0.0);
    auto inv_mu = [&rs](double s) { return 1.0 / rs.mu_at_t(s); };
    for (std::size_t i = 0; i + 1 < traj->t.size(); ++i)
        rs.tau_nodes[i + 1] = rs.tau_nodes[i] + simpson(inv_mu, traj->t[i], traj->t[i + 1], 1e-10);
    for (std::size_t i = 0; i < traj->t.size(); ++i) {
        const double m = std::cbrt(traj->detA[i]);
        rs.mu.push_back(m);
        rs.mu_tau.push_back(m * m / 3.0 * trace(traj->Adot[i] * inverse_unchecked(traj->A[i])));
    }
    for (std::size_t i = 0; i + 1 < rs.tau_nodes.size(); ++i)
        if (!(rs.tau_nodes[i + 1] > rs.tau_nodes[i]))
            throw Error(ErrorKind::QuadratureFailure, "tau not strictly increasing");
    return rs;
}

ExponentSet exponents(double alpha, double sigma_choice, double mu1) {
    if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
    const double hi = sigma_upper(alpha);
    if (!(sigma_choice > 0.0 && sigma_choice < hi))
        throw Error(ErrorKind::SigmaOutOfRange, "sigma must lie in (0, " + fmt17(hi) + ")");
    if (!(mu1 > 0.0)) throw Error(ErrorKind::OutOfRange, "mu1 must be positive");
    ExponentSet e;
    e.alpha = alpha;
    e.sigma = sigma_choice;
    e.delta = 3.0 / alpha - sigma_choice;
    e.mu1 = mu1;
    e.mu0 = 0.5 * sigma_choice * mu1;
    return e;
}

Mu1Estimate estimate_mu1(const AffineTrajectory& traj, const TimeRescaling& rs) {
    Mu1Estimate m;
    const double d1 = det(traj.Adot.back());
    m.mu1 = d1 > 0.0 ? std::cbrt(d1) : 0.0;
    m.ratio_at_end = rs.mu_tau.back() / rs.mu.back();
    m.pre_asymptotic = !(m.mu1 > 0.0) || std::fabs(m.ratio_at_end - m.mu1) > 0.05 * m.mu1;
    return m;
}

}  // namespace affinegas
