#include "affinegas/ledger.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "affinegas/error.hpp"
#include "affinegas/fitting.hpp"

namespace affinegas {

using nlohmann::json;

namespace {

// Non-finite values are written as strings so the file stays valid JSON.
json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double get_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::runtime_error("expected a number");
}

double field(const json& j, const char* key) { return get_num(j.at(key)); }

json per_nu_json(const PerNu& p) {
    return {{"nu", {p.nu[0], p.nu[1], p.nu[2]}},
            {"theta_sq", num(p.theta_sq)},
            {"V_sq", num(p.V_sq)},
            {"grad_eta_sq", num(p.grad_eta_sq)},
            {"div_eta_sq", num(p.div_eta_sq)},
            {"curl_V_sq", num(p.curl_V_sq)},
            {"curl_theta_sq", num(p.curl_theta_sq)},
            {"energy", num(p.energy)},
            {"dissipation", num(p.dissipation)}};
}

PerNu per_nu_from(const json& j) {
    PerNu p;
    const auto nu = j.at("nu");
    p.nu = {nu.at(0).get<int>(), nu.at(1).get<int>(), nu.at(2).get<int>()};
    p.theta_sq = field(j, "theta_sq");
    p.V_sq = field(j, "V_sq");
    p.grad_eta_sq = field(j, "grad_eta_sq");
    p.div_eta_sq = field(j, "div_eta_sq");
    p.curl_V_sq = field(j, "curl_V_sq");
    p.curl_theta_sq = field(j, "curl_theta_sq");
    p.energy = field(j, "energy");
    p.dissipation = field(j, "dissipation");
    return p;
}

json snapshot_json(const SnapshotRecord& s) {
    json per = json::array();
    for (const PerNu& p : s.norms.per_nu) per.push_back(per_nu_json(p));
    json env = json::array();
    for (double v : s.envelope) env.push_back(num(v));
    const AprioriFlags& a = s.apriori;
    return {{"record", "snapshot"},
            {"step", s.step},
            {"tau", num(s.tau)},
            {"t", num(s.t)},
            {"dtau", num(s.dtau)},
            {"c_max", num(s.c_max)},
            {"mu", num(s.mu)},
            {"mu_tau", num(s.mu_tau)},
            {"SN", num(s.SN)},
            {"SN_inst", num(s.norms.SN_inst)},
            {"BN_V", num(s.norms.BN_V)},
            {"BN_theta", num(s.norms.BN_theta)},
            {"EN", num(s.norms.EN)},
            {"DN", num(s.norms.DN)},
            {"CNm1", num(s.norms.CNm1)},
            {"per_nu", per},
            {"apriori",
             {{"Ainv_minus_I", num(a.Ainv_minus_I)},
              {"Dtheta", num(a.Dtheta)},
              {"J_minus_1", num(a.J_minus_1)},
              {"SN", num(a.SN)},
              {"DV", num(a.DV)},
              {"DV_tau", num(a.DV_tau)},
              {"bound_C", num(a.bound_C)}}},
            {"theta_inf", num(s.theta_inf)},
            {"V_inf", num(s.V_inf)},
            {"envelope_bin", num(s.envelope_bin)},
            {"envelope", env},
            {"momentum_residual", num(s.momentum_residual)},
            {"mass", num(s.mass)}};
}

SnapshotRecord snapshot_from(const json& j) {
    SnapshotRecord s;
    s.step = j.at("step").get<int>();
    s.tau = field(j, "tau");
    s.t = field(j, "t");
    s.dtau = field(j, "dtau");
    s.c_max = field(j, "c_max");
    s.mu = field(j, "mu");
    s.mu_tau = field(j, "mu_tau");
    s.SN = field(j, "SN");
    s.norms.SN_inst = field(j, "SN_inst");
    s.norms.BN_V = field(j, "BN_V");
    s.norms.BN_theta = field(j, "BN_theta");
    s.norms.EN = field(j, "EN");
    s.norms.DN = field(j, "DN");
    s.norms.CNm1 = field(j, "CNm1");
    for (const json& p : j.at("per_nu")) s.norms.per_nu.push_back(per_nu_from(p));
    const json& a = j.at("apriori");
    s.apriori.Ainv_minus_I = field(a, "Ainv_minus_I");
    s.apriori.Dtheta = field(a, "Dtheta");
    s.apriori.J_minus_1 = field(a, "J_minus_1");
    s.apriori.SN = field(a, "SN");
    s.apriori.DV = field(a, "DV");
    s.apriori.DV_tau = field(a, "DV_tau");
    s.apriori.bound_C = field(a, "bound_C");
    s.theta_inf = field(j, "theta_inf");
    s.V_inf = field(j, "V_inf");
    s.envelope_bin = field(j, "envelope_bin");
    for (const json& v : j.at("envelope")) s.envelope.push_back(get_num(v));
    s.momentum_residual = field(j, "momentum_residual");
    s.mass = field(j, "mass");
    return s;
}

json residual_json(const ResidualReport& r) {
    return {{"record", "eulerian_residual"}, {"t", num(r.t)},
            {"dx", num(r.dx)},               {"dt_probe", num(r.dt_probe)},
            {"n", r.n},                      {"mass_max", num(r.mass_max)},
            {"mass_l2", num(r.mass_l2)},     {"momentum_max", num(r.momentum_max)},
            {"momentum_l2", num(r.momentum_l2)}, {"energy_max", num(r.energy_max)},
            {"energy_l2", num(r.energy_l2)}};
}

ResidualReport residual_from(const json& j) {
    ResidualReport r;
    r.t = field(j, "t");
    r.dx = field(j, "dx");
    r.dt_probe = field(j, "dt_probe");
    r.n = j.at("n").get<int>();
    r.mass_max = field(j, "mass_max");
    r.mass_l2 = field(j, "mass_l2");
    r.momentum_max = field(j, "momentum_max");
    r.momentum_l2 = field(j, "momentum_l2");
    r.energy_max = field(j, "energy_max");
    r.energy_l2 = field(j, "energy_l2");
    return r;
}

json header_json(const LedgerFile& f) {
    const RunLedger& r = f.run;
    json metrics = json::object();
    for (const auto& [k, v] : f.metrics) metrics[k] = num(v);
    return {{"record", "header"},
            {"kind", f.kind},
            {"scenario", f.scenario},
            {"status", r.status},
            {"detail", r.detail},
            {"alpha", num(r.alpha)},
            {"sigma", num(r.sigma)},
            {"delta", num(r.delta)},
            {"mu1", num(r.mu1)},
            {"mu0", num(r.mu0)},
            {"cbar", num(r.cbar)},
            {"L", num(r.L)},
            {"dx", num(r.dx)},
            {"cone_speed", num(r.cone_speed)},
            {"epsilon", num(r.epsilon)},
            {"lambda", num(r.lambda)},
            {"tau_end", num(r.tau_end)},
            {"n", r.n},
            {"N", r.N},
            {"beta_sobolev_sq", num(r.beta_sobolev_sq)},
            {"data_norm", num(r.data_norm)},
            {"metrics", metrics}};
}

void header_from(const json& j, LedgerFile& f) {
    RunLedger& r = f.run;
    f.kind = j.at("kind").get<std::string>();
    f.scenario = j.at("scenario").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.detail = j.at("detail").get<std::string>();
    r.alpha = field(j, "alpha");
    r.sigma = field(j, "sigma");
    r.delta = field(j, "delta");
    r.mu1 = field(j, "mu1");
    r.mu0 = field(j, "mu0");
    r.cbar = field(j, "cbar");
    r.L = field(j, "L");
    r.dx = field(j, "dx");
    r.cone_speed = field(j, "cone_speed");
    r.epsilon = field(j, "epsilon");
    r.lambda = field(j, "lambda");
    r.tau_end = field(j, "tau_end");
    r.n = j.at("n").get<int>();
    r.N = j.at("N").get<int>();
    r.beta_sobolev_sq = field(j, "beta_sobolev_sq");
    r.data_norm = field(j, "data_norm");
    for (const auto& [k, v] : j.at("metrics").items()) f.metrics[k] = get_num(v);
}

}  // namespace

void write_ledger(std::ostream& os, const LedgerFile& f) {
    os << header_json(f).dump() << '\n';
    for (const SnapshotRecord& s : f.run.snapshots) os << snapshot_json(s).dump() << '\n';
    for (const ResidualReport& r : f.residuals) os << residual_json(r).dump() << '\n';
    for (const auto& s : f.samples) {
        json j = {{"record", "sample"}};
        for (const auto& [k, v] : s) j[k] = num(v);
        os << j.dump() << '\n';
    }
    int passed = 0;
    for (const Claim& c : f.claims) {
        os << json{{"record", "claim"}, {"name", c.name}, {"pass", c.pass}, {"measured", c.measured}}.dump() << '\n';
        passed += c.pass ? 1 : 0;
    }
    os << json{{"record", "summary"}, {"claims", f.claims.size()}, {"passed", passed}}.dump() << '\n';
}

void write_ledger(const std::filesystem::path& path, const LedgerFile& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
    write_ledger(os, f);
}

LedgerFile read_ledger(std::istream& is, const std::string& source) {
    LedgerFile f;
    bool header = false;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string rec = j.at("record").get<std::string>();
            if (rec == "header") {
                if (header) throw std::runtime_error("second header");
                header_from(j, f);
                header = true;
            } else if (!header) {
                throw std::runtime_error("record before header");
            } else if (rec == "snapshot") {
                f.run.snapshots.push_back(snapshot_from(j));
            } else if (rec == "eulerian_residual") {
                f.residuals.push_back(residual_from(j));
            } else if (rec == "sample") {
                std::map<std::string, double> s;
                for (const auto& [k, v] : j.items())
                    if (k != "record") s[k] = get_num(v);
                f.samples.push_back(std::move(s));
            } else if (rec == "claim") {
                f.claims.push_back(
                    {j.at("name").get<std::string>(), j.at("pass").get<bool>(), j.at("measured").get<std::string>()});
            } else if (rec != "summary") {
                throw std::runtime_error("unknown record type '" + rec + "'");
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorKind::LedgerCorrupt, source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header) throw Error(ErrorKind::LedgerCorrupt, source + ": no header record");
    return f;
}

LedgerFile read_ledger(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::LedgerCorrupt, "cannot open " + path.string());
    return read_ledger(is, path.string());
}

void write_snapshots_csv(std::ostream& os, const RunLedger& led, double threshold) {
    os << "step,tau,t,dtau,c_max,mu,mu_tau,SN,SN_inst,BN_V,BN_theta,EN,DN,CNm1,theta_inf,V_inf,radius,"
          "momentum_residual,mass\n";
    for (const SnapshotRecord& s : led.snapshots) {
        os << s.step;
        for (double v : {s.tau, s.t, s.dtau, s.c_max, s.mu, s.mu_tau, s.SN, s.norms.SN_inst, s.norms.BN_V,
                         s.norms.BN_theta, s.norms.EN, s.norms.DN, s.norms.CNm1, s.theta_inf, s.V_inf,
                         support_radius(s.envelope, s.envelope_bin, threshold), s.momentum_residual, s.mass})
            os << ',' << fmt17(v);
        os << '\n';
    }
}

}  // namespace affinegas
