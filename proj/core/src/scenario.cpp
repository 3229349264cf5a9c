#include "affinegas/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "affinegas/error.hpp"

extern char** environ;

namespace affinegas {

using nlohmann::json;

namespace {

constexpr const char* kEnvPrefix = "AFFINEGAS_CFG_";

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const std::string full = path.empty() ? key : path + "." + key;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(full, "has the wrong type");
    }
}

Mat3 read_mat(const json& obj, const std::string& path, const char* key, const Mat3& fallback) {
    if (!obj.contains(key)) return fallback;
    const std::string full = path + "." + key;
    const json& m = obj.at(key);
    if (!m.is_array() || m.size() != 3) throw ConfigError(full, "must be a 3x3 array");
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        if (!m[i].is_array() || m[i].size() != 3) throw ConfigError(full, "must be a 3x3 array");
        for (int j = 0; j < 3; ++j) {
            if (!m[i][j].is_number()) throw ConfigError(full, "entries must be numbers");
            r(i, j) = m[i][j].get<double>();
        }
    }
    return r;
}

json mat_json(const Mat3& m) {
    return json::array({{m(0, 0), m(0, 1), m(0, 2)}, {m(1, 0), m(1, 1), m(1, 2)}, {m(2, 0), m(2, 1), m(2, 2)}});
}

void apply_overrides(json& root, const std::map<std::string, std::string>& overrides) {
    for (const auto& [path, text] : overrides) {
        std::string ptr;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = path.find("__", start);
            ptr += "/" + path.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
            if (pos == std::string::npos) break;
            start = pos + 2;
        }
        json value;
        try {
            value = json::parse(text);
        } catch (const json::exception&) {
            value = text;
        }
        try {
            root[json::json_pointer(ptr)] = value;
        } catch (const json::exception&) {
            throw ConfigError(path, "override does not address a config entry");
        }
    }
}

}  // namespace

ExponentSet Scenario::exponent_set(double mu1) const {
    return exponents(affine.alpha, sigma_auto ? default_sigma(affine.alpha) : sigma, mu1);
}

Scenario parse_scenario(const std::string& text, const std::map<std::string, std::string>& overrides) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
    }
    apply_overrides(root, overrides);
    check_keys(root, "",
               {"name", "seed", "output_dir", "sigma_choice", "affine", "evolver", "diagnostics", "verify", "residual"});
    Scenario s;
    read(root, "", "name", s.name);
    read(root, "", "seed", s.seed);
    read(root, "", "output_dir", s.output_dir);

    if (!root.contains("sigma_choice")) throw ConfigError("sigma_choice", "is required (a number or \"auto\")");
    const json& sc = root.at("sigma_choice");
    if (sc.is_string() && sc.get<std::string>() == "auto") {
        s.sigma_auto = true;
    } else if (sc.is_number()) {
        s.sigma_auto = false;
        s.sigma = sc.get<double>();
    } else {
        throw ConfigError("sigma_choice", "must be a number or \"auto\"");
    }

    if (root.contains("affine")) {
        const json& a = root.at("affine");
        check_keys(a, "affine", {"A0", "A0dot", "Tbar", "alpha", "t_end", "rel_tol"});
        s.affine.A0 = read_mat(a, "affine", "A0", s.affine.A0);
        s.affine.A0dot = read_mat(a, "affine", "A0dot", s.affine.A0dot);
        read(a, "affine", "Tbar", s.affine.Tbar);
        read(a, "affine", "alpha", s.affine.alpha);
        read(a, "affine", "t_end", s.t_end);
        read(a, "affine", "rel_tol", s.rel_tol);
    }
    try {
        s.affine.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("affine.A0", e.what());
    }
    if (!(s.t_end > 0.0)) throw ConfigError("affine.t_end", "must be positive");
    if (!s.sigma_auto && !(s.sigma > 0.0 && s.sigma < sigma_upper(s.affine.alpha)))
        throw ConfigError("sigma_choice", "must lie in (0, min(3/alpha, 2))");

    EvolverConfig& e = s.evolver;
    e.sigma = s.sigma_auto ? default_sigma(s.affine.alpha) : s.sigma;
    if (root.contains("evolver")) {
        const json& j = root.at("evolver");
        check_keys(j, "evolver",
                   {"tau_end", "cfl", "dtau_max", "N", "epsilon", "lambda", "grid", "snapshot_stride", "cone_speed",
                    "dv_bound", "envelope_bin"});
        read(j, "evolver", "tau_end", e.tau_end);
        read(j, "evolver", "cfl", e.cfl);
        read(j, "evolver", "dtau_max", e.dtau_max);
        read(j, "evolver", "N", e.N);
        read(j, "evolver", "epsilon", e.epsilon);
        read(j, "evolver", "lambda", e.lambda);
        read(j, "evolver", "snapshot_stride", e.snapshot_stride);
        read(j, "evolver", "dv_bound", e.dv_bound);
        read(j, "evolver", "envelope_bin", e.envelope_bin);
        if (j.contains("cone_speed")) {
            const json& c = j.at("cone_speed");
            if (c.is_string() && c.get<std::string>() == "auto")
                e.cone_speed = -1.0;
            else if (c.is_number() && c.get<double>() > 0.0)
                e.cone_speed = c.get<double>();
            else
                throw ConfigError("evolver.cone_speed", "must be a positive number or \"auto\"");
        }
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            check_keys(g, "evolver.grid", {"half_width", "n"});
            double L = e.grid.L;
            int n = e.grid.n;
            read(g, "evolver.grid", "half_width", L);
            read(g, "evolver.grid", "n", n);
            e.grid = Grid3::make(L, n);
        }
    }
    e.validate();

    DiagnosticsToggles& d = s.diagnostics;
    if (root.contains("diagnostics")) {
        const json& j = root.at("diagnostics");
        check_keys(j, "diagnostics",
                   {"support_threshold", "decay_tau_min", "window_fraction", "plateau_tau", "coercivity_max",
                    "lagrangian_check", "field_slices", "frame_tau_max", "frame_step"});
        read(j, "diagnostics", "support_threshold", d.support_threshold);
        read(j, "diagnostics", "decay_tau_min", d.decay.tau_min);
        read(j, "diagnostics", "window_fraction", d.decay.window_fraction);
        read(j, "diagnostics", "plateau_tau", d.decay.plateau_tau);
        read(j, "diagnostics", "coercivity_max", d.decay.coercivity_max);
        read(j, "diagnostics", "lagrangian_check", d.lagrangian_check);
        read(j, "diagnostics", "field_slices", d.field_slices);
        read(j, "diagnostics", "frame_tau_max", d.frame_tau_max);
        read(j, "diagnostics", "frame_step", d.frame_step);
    }
    if (!(d.support_threshold > 0.0)) throw ConfigError("diagnostics.support_threshold", "must be positive");
    if (!(d.decay.window_fraction > 0.0 && d.decay.window_fraction <= 1.0))
        throw ConfigError("diagnostics.window_fraction", "must lie in (0, 1]");
    if (!(d.frame_step > 0.0)) throw ConfigError("diagnostics.frame_step", "must be positive");

    VerifyConfig& v = s.verify;
    if (root.contains("verify")) {
        const json& j = root.at("verify");
        check_keys(j, "verify",
                   {"amplitude", "half_width", "spatial_n", "temporal_n", "temporal_h", "amplitude_levels",
                    "frame_tau", "nu_order", "exact_tol"});
        read(j, "verify", "amplitude", v.amplitude);
        read(j, "verify", "half_width", v.half_width);
        read(j, "verify", "spatial_n", v.spatial_n);
        read(j, "verify", "temporal_n", v.temporal_n);
        read(j, "verify", "temporal_h", v.temporal_h);
        read(j, "verify", "amplitude_levels", v.amplitude_levels);
        read(j, "verify", "frame_tau", v.frame_tau);
        read(j, "verify", "nu_order", v.nu_order);
        read(j, "verify", "exact_tol", v.exact_tol);
    }
    v.seed = s.seed;
    v.validate();

    ResidualLadder& r = s.residual;
    if (root.contains("residual")) {
        const json& j = root.at("residual");
        check_keys(j, "residual", {"t", "half_width", "n", "dt_probe", "corruption"});
        read(j, "residual", "t", r.t);
        read(j, "residual", "half_width", r.half_width);
        read(j, "residual", "n", r.n);
        read(j, "residual", "dt_probe", r.dt_probe);
        read(j, "residual", "corruption", r.corruption);
    }
    if (r.n.size() < 2) throw ConfigError("residual.n", "need at least two levels");
    if (!(r.dt_probe > 0.0)) throw ConfigError("residual.dt_probe", "must be positive");
    if (!(r.t - r.dt_probe >= 0.0)) throw ConfigError("residual.t", "must be at least dt_probe");
    return s;
}

std::map<std::string, std::string> env_overrides() {
    std::map<std::string, std::string> out;
    const std::string prefix = kEnvPrefix;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry = *e;
        if (entry.rfind(prefix, 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        out[entry.substr(prefix.size(), eq - prefix.size())] = entry.substr(eq + 1);
    }
    return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("--config", "cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str(), env_overrides());
}

std::string to_json(const Scenario& s) {
    const EvolverConfig& e = s.evolver;
    const DiagnosticsToggles& d = s.diagnostics;
    const VerifyConfig& v = s.verify;
    const ResidualLadder& r = s.residual;
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["output_dir"] = s.output_dir;
    j["sigma_choice"] = s.sigma_auto ? json("auto") : json(s.sigma);
    j["affine"] = {{"A0", mat_json(s.affine.A0)},
                   {"A0dot", mat_json(s.affine.A0dot)},
                   {"Tbar", s.affine.Tbar},
                   {"alpha", s.affine.alpha},
                   {"t_end", s.t_end},
                   {"rel_tol", s.rel_tol}};
    j["evolver"] = {{"tau_end", e.tau_end},
                    {"cfl", e.cfl},
                    {"dtau_max", e.dtau_max},
                    {"N", e.N},
                    {"epsilon", e.epsilon},
                    {"lambda", e.lambda},
                    {"grid", {{"half_width", e.grid.L}, {"n", e.grid.n}}},
                    {"snapshot_stride", e.snapshot_stride},
                    {"cone_speed", e.cone_speed < 0.0 ? json("auto") : json(e.cone_speed)},
                    {"dv_bound", e.dv_bound},
                    {"envelope_bin", e.envelope_bin}};
    j["diagnostics"] = {{"support_threshold", d.support_threshold},
                        {"decay_tau_min", d.decay.tau_min},
                        {"window_fraction", d.decay.window_fraction},
                        {"plateau_tau", d.decay.plateau_tau},
                        {"coercivity_max", d.decay.coercivity_max},
                        {"lagrangian_check", d.lagrangian_check},
                        {"field_slices", d.field_slices},
                        {"frame_tau_max", d.frame_tau_max},
                        {"frame_step", d.frame_step}};
    j["verify"] = {{"amplitude", v.amplitude},
                   {"half_width", v.half_width},
                   {"spatial_n", v.spatial_n},
                   {"temporal_n", v.temporal_n},
                   {"temporal_h", v.temporal_h},
                   {"amplitude_levels", v.amplitude_levels},
                   {"frame_tau", v.frame_tau},
                   {"nu_order", v.nu_order},
                   {"exact_tol", v.exact_tol}};
    j["residual"] = {{"t", r.t},
                     {"half_width", r.half_width},
                     {"n", r.n},
                     {"dt_probe", r.dt_probe},
                     {"corruption", r.corruption}};
    return j.dump(2);
}

}  // namespace affinegas
