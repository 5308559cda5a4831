#ifndef POROSTAB_IO_CONFIG_HPP
#define POROSTAB_IO_CONFIG_HPP

/// @file config.hpp
/// JSON run configuration: strict schema (unknown keys rejected), model
/// defaults filled for absent keys, write/parse round-trips exactly.

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "porostab/common.hpp"
#include "porostab/dispersion.hpp"
#include "porostab/model.hpp"
#include "porostab/stabmap.hpp"

namespace porostab {

struct RunConfig {
    std::string mode; ///< homog | map | dispersion | critical | patterning | simulate
    ModelParams params;
    bool has_params = false; ///< a "params" block was given (not compared by ==)
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    // map / critical / dispersion
    std::string param = "beta2";
    std::array<double, 2> param_range{0.0, 1.0};
    bool has_param_range = false;
    int param_count = 100;
    std::array<double, 2> k_range{1e-2, 1e3};
    int k_count = 100;
    bool k_log = true;
    std::string expression = "a0";
    Regime regime = Regime::General;
    RhoMode rho_mode = RhoMode::Inertial;

    // patterning
    std::array<double, 2> beta2_range{1e-3, 1.0};
    std::array<double, 2> beta3_range{1e-3, 1.0};
    int n_beta2 = 300;
    int n_beta3 = 300;

    // simulate
    std::string scenario = "test2"; ///< test1 | test2 | test3
    double dt = 0.0;                ///< 0: preset default
    double t_final = 0.0;           ///< 0: preset default
    int resolution = 0;             ///< rings (disk) or cells per side (rectangle); 0: preset
    double perturb_amplitude = 1e-3;
    int sample_stride = 1;
    int snapshot_stride = 0;
    double tau2 = 10.0; ///< growth-activation rate, test3 only

    bool operator==(const RunConfig& o) const {
        auto pe = [](const ModelParams& a, const ModelParams& b) {
            return a.D1 == b.D1 && a.D2 == b.D2 && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
                   a.beta3 == b.beta3 && a.gamma == b.gamma && a.tau == b.tau && a.E == b.E &&
                   a.nu == b.nu && a.rho == b.rho && a.c0 == b.c0 && a.kappa == b.kappa &&
                   a.eta == b.eta && a.alpha == b.alpha && a.ell == b.ell &&
                   a.k_dir == b.k_dir && a.theta_variant == b.theta_variant &&
                   a.theta_constant_form == b.theta_constant_form;
        };
        return mode == o.mode && pe(params, o.params) && seed == o.seed && out_dir == o.out_dir &&
               param == o.param && param_range == o.param_range &&
               has_param_range == o.has_param_range && param_count == o.param_count &&
               k_range == o.k_range && k_count == o.k_count && k_log == o.k_log &&
               expression == o.expression && regime == o.regime && rho_mode == o.rho_mode &&
               beta2_range == o.beta2_range && beta3_range == o.beta3_range &&
               n_beta2 == o.n_beta2 && n_beta3 == o.n_beta3 && scenario == o.scenario &&
               dt == o.dt && t_final == o.t_final && resolution == o.resolution &&
               perturb_amplitude == o.perturb_amplitude && sample_stride == o.sample_stride &&
               snapshot_stride == o.snapshot_stride && tau2 == o.tau2;
    }
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw SchemaError("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) +
                              "'");
    }
}

inline double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError("key '" + path + "' must be a number");
    return j.get<double>();
}

inline int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError("key '" + path + "' must be an integer");
    return j.get<int>();
}

inline std::string get_str(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError("key '" + path + "' must be a string");
    return j.get<std::string>();
}

inline std::array<double, 2> get_range(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError("key '" + path + "' must be a 2-element numeric array");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline void parse_params(const json& j, ModelParams& p) {
    check_keys(j, "params",
               {"D1", "D2", "beta1", "beta2", "beta3", "gamma", "tau", "E", "nu", "rho", "c0",
                "kappa", "eta", "alpha", "ell", "k_dir", "theta", "theta_constant_form"});
    auto num = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = get_num(j.at(k), std::string("params.") + k);
    };
    num("D1", p.D1);
    num("D2", p.D2);
    num("beta1", p.beta1);
    num("beta2", p.beta2);
    num("beta3", p.beta3);
    num("gamma", p.gamma);
    num("tau", p.tau);
    num("E", p.E);
    num("nu", p.nu);
    num("rho", p.rho);
    num("c0", p.c0);
    num("kappa", p.kappa);
    num("eta", p.eta);
    num("alpha", p.alpha);
    num("ell", p.ell);
    if (j.contains("k_dir")) p.k_dir = get_range(j.at("k_dir"), "params.k_dir");
    if (j.contains("theta")) {
        const std::string t = get_str(j.at("theta"), "params.theta");
        if (t == "linear") p.theta_variant = ThetaVariant::Linear;
        else if (t == "quadratic") p.theta_variant = ThetaVariant::Quadratic;
        else throw ValueError("params.theta: unknown value '" + t + "'");
    }
    if (j.contains("theta_constant_form")) {
        if (!j.at("theta_constant_form").is_boolean())
            throw SchemaError("key 'params.theta_constant_form' must be a boolean");
        p.theta_constant_form = j.at("theta_constant_form").get<bool>();
    }
}

inline Regime parse_regime(const std::string& s) {
    if (s == "general") return Regime::General;
    if (s == "uncoupled") return Regime::Uncoupled;
    if (s == "zero_beta1") return Regime::ZeroBeta1;
    if (s == "zero_beta2") return Regime::ZeroBeta2;
    if (s == "zero_beta3") return Regime::ZeroBeta3;
    throw ValueError("regime: unknown value '" + s + "'");
}

inline std::string regime_name(Regime r) {
    switch (r) {
    case Regime::General: return "general";
    case Regime::Uncoupled: return "uncoupled";
    case Regime::ZeroBeta1: return "zero_beta1";
    case Regime::ZeroBeta2: return "zero_beta2";
    case Regime::ZeroBeta3: return "zero_beta3";
    }
    return "general";
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("config root must be an object");
    if (!j.contains("mode")) throw SchemaError("missing key 'mode'");

    RunConfig c;
    c.mode = detail::get_str(j.at("mode"), "mode");

    std::initializer_list<const char*> common = {"mode", "params", "seed", "out"};
    auto base = [&](std::initializer_list<const char*> extra) {
        std::vector<const char*> all(common);
        all.insert(all.end(), extra.begin(), extra.end());
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* a : all)
                if (it.key() == a) ok = true;
            if (!ok) throw SchemaError("unknown key '" + it.key() + "'");
        }
    };

    if (c.mode == "homog") base({"rho_mode"});
    else if (c.mode == "map")
        base({"param", "param_range", "param_count", "k_range", "k_count", "k_log", "expression",
              "regime", "rho_mode"});
    else if (c.mode == "dispersion") base({"k_range", "k_count", "k_log", "regime"});
    else if (c.mode == "critical")
        base({"param", "param_range", "k_range", "expression", "regime", "rho_mode"});
    else if (c.mode == "patterning") base({"beta2_range", "beta3_range", "n_beta2", "n_beta3"});
    else if (c.mode == "simulate")
        base({"scenario", "dt", "t_final", "resolution", "perturb_amplitude", "sample_stride",
              "snapshot_stride", "tau2"});
    else throw ValueError("mode: unknown value '" + c.mode + "'");

    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw SchemaError("key 'params' must be an object");
        detail::parse_params(j.at("params"), c.params);
        c.has_params = true;
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw SchemaError("key 'seed' must be an unsigned integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("out")) c.out_dir = detail::get_str(j.at("out"), "out");

    auto opt_num = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = detail::get_num(j.at(k), k);
    };
    auto opt_int = [&](const char* k, int& dst) {
        if (j.contains(k)) dst = detail::get_int(j.at(k), k);
    };

    if (c.mode == "map" || c.mode == "critical") {
        if (j.contains("param")) c.param = detail::get_str(j.at("param"), "param");
        if (!j.contains("param_range"))
            throw SchemaError("mode '" + c.mode + "' requires key 'param_range'");
        c.param_range = detail::get_range(j.at("param_range"), "param_range");
        c.has_param_range = true;
        opt_int("param_count", c.param_count);
    }
    if (c.mode == "map" || c.mode == "critical" || c.mode == "dispersion") {
        if (j.contains("k_range")) c.k_range = detail::get_range(j.at("k_range"), "k_range");
        opt_int("k_count", c.k_count);
        if (j.contains("k_log")) {
            if (!j.at("k_log").is_boolean()) throw SchemaError("key 'k_log' must be a boolean");
            c.k_log = j.at("k_log").get<bool>();
        }
        if (j.contains("expression"))
            c.expression = detail::get_str(j.at("expression"), "expression");
        if (j.contains("regime"))
            c.regime = detail::parse_regime(detail::get_str(j.at("regime"), "regime"));
    }
    if (j.contains("rho_mode")) {
        const std::string r = detail::get_str(j.at("rho_mode"), "rho_mode");
        if (r == "inertial") c.rho_mode = RhoMode::Inertial;
        else if (r == "quasistatic") c.rho_mode = RhoMode::QuasiStatic;
        else throw ValueError("rho_mode: unknown value '" + r + "'");
    }
    if (c.mode == "patterning") {
        if (j.contains("beta2_range"))
            c.beta2_range = detail::get_range(j.at("beta2_range"), "beta2_range");
        if (j.contains("beta3_range"))
            c.beta3_range = detail::get_range(j.at("beta3_range"), "beta3_range");
        opt_int("n_beta2", c.n_beta2);
        opt_int("n_beta3", c.n_beta3);
    }
    if (c.mode == "simulate") {
        if (j.contains("scenario")) c.scenario = detail::get_str(j.at("scenario"), "scenario");
        if (c.scenario != "test1" && c.scenario != "test2" && c.scenario != "test3")
            throw ValueError("scenario: unknown value '" + c.scenario + "'");
        opt_num("dt", c.dt);
        opt_num("t_final", c.t_final);
        opt_int("resolution", c.resolution);
        opt_num("perturb_amplitude", c.perturb_amplitude);
        opt_int("sample_stride", c.sample_stride);
        opt_int("snapshot_stride", c.snapshot_stride);
        opt_num("tau2", c.tau2);
        if (c.dt < 0 || c.t_final < 0 || c.resolution < 0)
            throw ValueError("simulate: dt, t_final and resolution must be non-negative");
    }

    // value sanity shared by scan-like modes
    if (c.has_param_range && !(c.param_range[1] > c.param_range[0]))
        throw ValueError("param_range: must be increasing");
    if (c.mode == "map" || c.mode == "critical" || c.mode == "dispersion") {
        if (!(c.k_range[1] > c.k_range[0])) throw ValueError("k_range: must be increasing");
        if (c.k_count < 2) throw ValueError("k_count: need at least 2 points");
    }
    if (c.mode == "map" && c.param_count < 2)
        throw ValueError("param_count: need at least 2 points");

    c.params.validate();
    return c;
}

inline std::string write_config(const RunConfig& c) {
    using detail::json;
    json j;
    j["mode"] = c.mode;
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    json p;
    const ModelParams& m = c.params;
    p["D1"] = m.D1;
    p["D2"] = m.D2;
    p["beta1"] = m.beta1;
    p["beta2"] = m.beta2;
    p["beta3"] = m.beta3;
    p["gamma"] = m.gamma;
    p["tau"] = m.tau;
    p["E"] = m.E;
    p["nu"] = m.nu;
    p["rho"] = m.rho;
    p["c0"] = m.c0;
    p["kappa"] = m.kappa;
    p["eta"] = m.eta;
    p["alpha"] = m.alpha;
    p["ell"] = m.ell;
    p["k_dir"] = {m.k_dir[0], m.k_dir[1]};
    p["theta"] = m.theta_variant == ThetaVariant::Linear ? "linear" : "quadratic";
    p["theta_constant_form"] = m.theta_constant_form;
    j["params"] = std::move(p);

    if (c.mode == "homog") j["rho_mode"] = c.rho_mode == RhoMode::Inertial ? "inertial" : "quasistatic";
    if (c.mode == "map" || c.mode == "critical") {
        j["param"] = c.param;
        j["param_range"] = {c.param_range[0], c.param_range[1]};
        if (c.mode == "map") j["param_count"] = c.param_count;
        j["rho_mode"] = c.rho_mode == RhoMode::Inertial ? "inertial" : "quasistatic";
    }
    if (c.mode == "map" || c.mode == "critical" || c.mode == "dispersion") {
        j["k_range"] = {c.k_range[0], c.k_range[1]};
        if (c.mode != "critical") {
            j["k_count"] = c.k_count;
            j["k_log"] = c.k_log;
        }
        if (c.mode != "dispersion") j["expression"] = c.expression;
        j["regime"] = detail::regime_name(c.regime);
    }
    if (c.mode == "patterning") {
        j["beta2_range"] = {c.beta2_range[0], c.beta2_range[1]};
        j["beta3_range"] = {c.beta3_range[0], c.beta3_range[1]};
        j["n_beta2"] = c.n_beta2;
        j["n_beta3"] = c.n_beta3;
    }
    if (c.mode == "simulate") {
        j["scenario"] = c.scenario;
        j["dt"] = c.dt;
        j["t_final"] = c.t_final;
        j["resolution"] = c.resolution;
        j["perturb_amplitude"] = c.perturb_amplitude;
        j["sample_stride"] = c.sample_stride;
        j["snapshot_stride"] = c.snapshot_stride;
        j["tau2"] = c.tau2;
    }
    return j.dump(2);
}

} // namespace porostab

#endif
