#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "chanlab/fields.hpp"
#include "chanlab/toymap.hpp"

namespace chanlab {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// unknown keys are rejected: silent typos in an epsilon or delta would
/// invalidate an experiment
inline void require_keys(const json& j, const std::set<std::string>& required,
                         const std::set<std::string>& optional = {}) {
    if (!j.is_object()) throw ConfigError("config block must be a JSON object");
    for (const auto& item : j.items()) {
        if (!required.count(item.key()) && !optional.count(item.key()))
            throw ConfigError("unknown config key: '" + item.key() + "'");
    }
    for (const auto& k : required)
        if (!j.contains(k)) throw ConfigError("missing config key: '" + k + "'");
}

inline json field_to_json(const FieldSeries1D& f) {
    return json{{"kind", "series1d"}, {"coeffs", f.coeffs()}};
}

inline json field_to_json(const FieldSeries2D& f) {
    json terms = json::array();
    for (const auto& t : f.terms())
        terms.push_back({static_cast<int>(t[0]), static_cast<int>(t[1]), static_cast<int>(t[2]),
                         t[3]});
    return json{{"kind", "series2d"}, {"coeffs", terms}};
}

inline FieldSeries1D field1d_from_json(const json& j) {
    require_keys(j, {"kind", "coeffs"});
    if (j.at("kind") != "series1d") throw ConfigError("expected kind 'series1d'");
    return FieldSeries1D(j.at("coeffs").get<std::vector<double>>());
}

inline FieldSeries2D field2d_from_json(const json& j) {
    require_keys(j, {"kind", "coeffs"});
    if (j.at("kind") != "series2d") throw ConfigError("expected kind 'series2d'");
    FieldSeries2D f;
    for (const auto& t : j.at("coeffs")) {
        if (!t.is_array() || t.size() != 4) throw ConfigError("series2d term must be [k,m,s,value]");
        f.set(t[0].get<int>(), t[1].get<int>(), t[2].get<int>(), t[3].get<double>());
    }
    return f;
}

inline ToyModelSpec toy_model_from_json(const json& j) {
    require_keys(j, {"p", "sigma", "omega", "h"}, {"p0", "sigma0", "r0", "omega0"});
    auto opt2d = [&](const char* key) {
        return j.contains(key) ? field2d_from_json(j.at(key)) : FieldSeries2D{};
    };
    return ToyModelSpec(field1d_from_json(j.at("p")), field1d_from_json(j.at("sigma")),
                        field1d_from_json(j.at("omega")), opt2d("p0"), opt2d("sigma0"),
                        opt2d("r0"), opt2d("omega0"), j.at("h").get<double>());
}

inline GlobalMapSpec global_map_from_json(const json& j) {
    require_keys(j, {"a1", "b0"}, {"b1", "c0", "c1"});
    auto opt2d = [&](const char* key) {
        return j.contains(key) ? field2d_from_json(j.at(key)) : FieldSeries2D{};
    };
    return GlobalMapSpec(field2d_from_json(j.at("a1")), field2d_from_json(j.at("b0")), opt2d("b1"),
                         opt2d("c0"), opt2d("c1"));
}

inline ZMapCoeffs zmap_coeffs_from_json(const json& j) {
    require_keys(j, {"Omega", "Gamma", "b0", "c"},
                 {"mode", "z_mod_one", "eps_z", "eps_r", "eps_phi", "rho_z", "rho_r", "rho_phi"});
    ZMapCoeffs k;
    k.Omega = field2d_from_json(j.at("Omega"));
    k.Gamma = field2d_from_json(j.at("Gamma"));
    k.b0 = field2d_from_json(j.at("b0"));
    k.c = field2d_from_json(j.at("c"));
    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "truncated")
            k.mode = ZMapMode::truncated;
        else if (m == "extended")
            k.mode = ZMapMode::extended;
        else
            throw ConfigError("mode must be 'truncated' or 'extended'");
    }
    if (j.contains("z_mod_one")) k.z_mod_one = j.at("z_mod_one").get<bool>();
    if (j.contains("eps_z")) k.eps_z = j.at("eps_z").get<double>();
    if (j.contains("eps_r")) k.eps_r = j.at("eps_r").get<double>();
    if (j.contains("eps_phi")) k.eps_phi = j.at("eps_phi").get<double>();
    if (j.contains("rho_z")) k.rho_z = field2d_from_json(j.at("rho_z"));
    if (j.contains("rho_r")) k.rho_r = field2d_from_json(j.at("rho_r"));
    if (j.contains("rho_phi")) k.rho_phi = field2d_from_json(j.at("rho_phi"));
    k.validate();
    return k;
}

inline json zmap_coeffs_to_json(const ZMapCoeffs& k) {
    json j{{"Omega", field_to_json(k.Omega)},
           {"Gamma", field_to_json(k.Gamma)},
           {"b0", field_to_json(k.b0)},
           {"c", field_to_json(k.c)},
           {"mode", k.mode == ZMapMode::truncated ? "truncated" : "extended"},
           {"z_mod_one", k.z_mod_one}};
    if (k.eps_z != 0.0) {
        j["eps_z"] = k.eps_z;
        j["rho_z"] = field_to_json(k.rho_z);
    }
    if (k.eps_r != 0.0) {
        j["eps_r"] = k.eps_r;
        j["rho_r"] = field_to_json(k.rho_r);
    }
    if (k.eps_phi != 0.0) {
        j["eps_phi"] = k.eps_phi;
        j["rho_phi"] = field_to_json(k.rho_phi);
    }
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

} // namespace chanlab
