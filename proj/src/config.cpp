#include "lagflow/config.hpp"

#include <fstream>

#include "lagflow/parallel.hpp"

namespace lagflow {

namespace {

[[noreturn]] void config_error(const std::string& what) {
    throw ValidationError("ConfigError", what);
}

double require_number(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        config_error(std::string("missing or non-numeric field '") + key + "'");
    }
    return j[key].get<double>();
}

std::string require_string(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        config_error(std::string("missing or non-string field '") + key + "'");
    }
    return j[key].get<std::string>();
}

Expr parse_expr_field(const Json& j, const char* key) {
    const std::string src = require_string(j, key);
    try {
        return parse_expr(src);
    } catch (const ParseError& e) {
        config_error(std::string("bad expression in '") + key + "': " + e.what());
    }
}

Bindings bindings_from_json(const Json& j) {
    Bindings b;
    if (!j.is_object()) config_error("'params' must be an object");
    for (const auto& [name, value] : j.items()) {
        if (value.is_number()) {
            b.set(name, value.get<double>());
        } else {
            b.set(name, complex_from_json(value));
        }
    }
    return b;
}

Json bindings_to_json(const Bindings& b) {
    Json j = Json::object();
    for (const auto& [name, value] : b.entries()) {
        if (value.imag() == 0.0) {
            j[name] = value.real();
        } else {
            j[name] = complex_to_json(value);
        }
    }
    return j;
}

}  // namespace

Json complex_to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Complex complex_from_json(const Json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_object() || !j.contains("re") || !j.contains("im")) {
        config_error("complex values are numbers or {\"re\":..., \"im\":...}");
    }
    return Complex(j["re"].get<double>(), j["im"].get<double>());
}

Json domain_to_json(const Domain& d) {
    Json j;
    if (const auto* r = d.rectangle_shape()) {
        j["shape"] = "rectangle";
        j["a_min"] = r->a_min;
        j["a_max"] = r->a_max;
        j["b_min"] = r->b_min;
        j["b_max"] = r->b_max;
    } else {
        const auto* disk = d.disk_shape();
        j["shape"] = "disk";
        j["center"] = complex_to_json(disk->center);
        j["radius"] = disk->radius;
    }
    j["grid"] = Json::array({d.n_a(), d.n_b()});
    return j;
}

Domain domain_from_json(const Json& j) {
    if (!j.is_object()) config_error("'domain' must be an object");
    int n_a = 41, n_b = 41;
    if (j.contains("grid")) {
        if (!j["grid"].is_array() || j["grid"].size() != 2) {
            config_error("'grid' must be [n_a, n_b]");
        }
        n_a = j["grid"][0].get<int>();
        n_b = j["grid"][1].get<int>();
    }
    const std::string shape = require_string(j, "shape");
    if (shape == "rectangle") {
        return Domain::rectangle(require_number(j, "a_min"), require_number(j, "a_max"),
                                 require_number(j, "b_min"), require_number(j, "b_max"),
                                 n_a, n_b);
    }
    if (shape == "disk") {
        if (!j.contains("center")) config_error("disk domain needs 'center'");
        return Domain::disk(complex_from_json(j["center"]), require_number(j, "radius"),
                            n_a, n_b);
    }
    config_error("unknown domain shape '" + shape + "'");
}

namespace {

Tamper tamper_from_json(const Json& j) {
    Tamper t;
    if (!j.is_object()) config_error("'tamper' must be an object");
    const std::string kind = require_string(j, "kind");
    if (kind == "g_scale_rate") {
        t.kind = Tamper::Kind::GScaleRate;
    } else if (kind == "alpha_scale_step") {
        t.kind = Tamper::Kind::AlphaScaleStep;
    } else {
        config_error("unknown tamper kind '" + kind + "'");
    }
    t.amount = require_number(j, "amount");
    return t;
}

Json tamper_to_json(const Tamper& t) {
    Json j;
    j["kind"] = t.kind == Tamper::Kind::GScaleRate ? "g_scale_rate" : "alpha_scale_step";
    j["amount"] = t.amount;
    return j;
}

FlowSpec resolve_preset_flow(const Json& flow_json, const Json* domain_override) {
    const std::string name = require_string(flow_json, "preset");
    auto id = preset_from_name(name);
    if (!id) config_error("unknown preset '" + name + "'");
    const Json params = flow_json.contains("params") ? flow_json["params"] : Json::object();
    auto param_or = [&](const char* key, double fallback) {
        return params.contains(key) ? params[key].get<double>() : fallback;
    };
    switch (*id) {
        case PresetId::Gerstner: {
            Domain dom = domain_override ? domain_from_json(*domain_override)
                                         : gerstner_default_domain();
            return gerstner(param_or("k", 1.0), param_or("g", 9.81), std::move(dom));
        }
        case PresetId::Kirchhoff: {
            Domain dom = domain_override ? domain_from_json(*domain_override)
                                         : kirchhoff_default_domain();
            return kirchhoff(param_or("A", 1.0), param_or("k", 1.0), param_or("lambda", 0.5),
                             std::move(dom));
        }
        case PresetId::SteadyShear: {
            FlowSpec spec = steady_shear();
            if (domain_override) spec.domain = domain_from_json(*domain_override);
            return spec;
        }
        case PresetId::HarmonicKoebe:
            config_error("preset 'harmonic_koebe' is a map, not a flow");
    }
    config_error("unreachable preset id");
}

}  // namespace

FlowSpec flow_spec_from_json(const Json& j, const Json* domain_override) {
    if (!j.is_object()) config_error("'flow' must be an object");
    if (j.contains("preset")) {
        FlowSpec spec = resolve_preset_flow(j, domain_override);
        if (j.contains("tamper")) spec.tamper = tamper_from_json(j["tamper"]);
        return spec;
    }

    if (!domain_override) config_error("explicit flow configs require a 'domain'");
    Domain dom = domain_from_json(*domain_override);
    Bindings params =
        j.contains("params") ? bindings_from_json(j["params"]) : Bindings{};
    const std::string family = require_string(j, "family");

    std::optional<FlowSpec> spec;
    if (family == "linear_dependent") {
        Expr F0 = parse_expr_field(j, "F0");
        if (!j.contains("lambda")) config_error("linear_dependent flow needs 'lambda'");
        Complex lambda = complex_from_json(j["lambda"]);
        BetaPath beta = j.contains("beta") ? BetaPath(parse_expr_field(j, "beta"))
                                           : BetaPath::constant(lambda);
        spec = FlowSpec{LinearDependentSpec{std::move(F0), lambda, std::move(beta),
                                            j.value("nu0", 0.0)},
                        std::move(dom), std::move(params), Tamper{}};
    } else if (family == "affine") {
        BetaPath beta = j.contains("beta") ? BetaPath(parse_expr_field(j, "beta"))
                                           : BetaPath::constant(Complex(0.0, 0.0));
        spec = FlowSpec{AffineSpec{parse_expr_field(j, "F0"), parse_expr_field(j, "G0"),
                                   std::move(beta), j.value("nu0", 0.0)},
                        std::move(dom), std::move(params), Tamper{}};
    } else if (family == "rotational") {
        if (!j.contains("xi0")) config_error("rotational flow needs 'xi0'");
        spec = FlowSpec{RotationalSpec{parse_expr_field(j, "F0"), parse_expr_field(j, "G0"),
                                       j.value("nu0", 0.0), require_number(j, "xi0")},
                        std::move(dom), std::move(params), Tamper{}};
    } else {
        config_error("unknown flow family '" + family + "'");
    }
    if (j.contains("tamper")) spec->tamper = tamper_from_json(j["tamper"]);
    return std::move(*spec);
}

Json flow_spec_to_json(const FlowSpec& spec) {
    Json j;
    if (const auto* ld = std::get_if<LinearDependentSpec>(&spec.family)) {
        j["family"] = "linear_dependent";
        j["F0"] = ld->F0.to_string();
        j["lambda"] = complex_to_json(ld->lambda);
        j["beta"] = ld->beta.expr().to_string();
        j["nu0"] = ld->nu0;
    } else if (const auto* af = std::get_if<AffineSpec>(&spec.family)) {
        j["family"] = "affine";
        j["F0"] = af->F0.to_string();
        j["G0"] = af->G0.to_string();
        j["beta"] = af->beta.expr().to_string();
        j["nu0"] = af->nu0;
    } else {
        const auto& rot = std::get<RotationalSpec>(spec.family);
        j["family"] = "rotational";
        j["F0"] = rot.F0.to_string();
        j["G0"] = rot.G0.to_string();
        j["nu0"] = rot.nu0;
        j["xi0"] = rot.xi0;
    }
    if (!spec.params.entries().empty()) j["params"] = bindings_to_json(spec.params);
    if (spec.tamper.kind != Tamper::Kind::None) j["tamper"] = tamper_to_json(spec.tamper);
    return j;
}

Json preset_show_json(PresetId id) {
    Json j;
    if (id == PresetId::HarmonicKoebe) {
        HarmonicMap map = harmonic_koebe(Complex(1.0, 0.0));
        Json pair;
        pair["F"] = map.F().to_string();
        pair["G"] = map.G().to_string();
        j["map1"] = pair;
        j["map2"] = pair;
        j["domain"] = domain_to_json(map.domain());
        return j;
    }
    FlowSpec spec = id == PresetId::Gerstner    ? gerstner(1.0, 9.81, gerstner_default_domain())
                    : id == PresetId::Kirchhoff ? kirchhoff(1.0, 1.0, 0.5, kirchhoff_default_domain())
                                                : steady_shear();
    j["flow"] = flow_spec_to_json(spec);
    j["domain"] = domain_to_json(spec.domain);
    j["times"] = Json::array({0.0, 0.5, 1.0, 2.0});
    j["output"] = Json{{"dir", "out"}, {"formats", Json::array({"csv", "json"})}};
    return j;
}

Json apply_overrides(Json j, const ConfigOverrides& o) {
    if (o.out_dir) {
        if (!j.contains("output")) j["output"] = Json::object();
        j["output"]["dir"] = *o.out_dir;
    }
    if (o.grid) {
        if (!j.contains("domain")) config_error("--grid given but config has no 'domain'");
        j["domain"]["grid"] = Json::array({o.grid->first, o.grid->second});
    }
    if (o.times) j["times"] = *o.times;
    if (o.tol) {
        if (!j.contains("tolerances")) j["tolerances"] = Json::object();
        j["tolerances"]["mass"] = *o.tol;
        j["tolerances"]["governing"] = *o.tol;
    }
    return j;
}

RunConfig parse_config(const Json& j) {
    if (!j.is_object()) config_error("config root must be an object");
    RunConfig cfg;
    cfg.raw = j;

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    cfg.hash = hash_hex;

    const Json* domain_json = j.contains("domain") ? &j["domain"] : nullptr;

    if (j.contains("flow")) {
        cfg.flow = flow_spec_from_json(j["flow"], domain_json);
    }

    if (j.contains("map1") != j.contains("map2")) {
        config_error("relation configs need both 'map1' and 'map2'");
    }
    if (j.contains("map1")) {
        if (!domain_json) config_error("relation configs need a 'domain'");
        Domain dom = domain_from_json(*domain_json);
        Bindings params =
            j.contains("params") ? bindings_from_json(j["params"]) : Bindings{};
        cfg.map1 = HarmonicMap(parse_expr_field(j["map1"], "F"),
                               parse_expr_field(j["map1"], "G"), dom, params);
        cfg.map2 = HarmonicMap(parse_expr_field(j["map2"], "F"),
                               parse_expr_field(j["map2"], "G"), dom, params);
    }

    if (j.contains("times")) {
        if (!j["times"].is_array() || j["times"].empty()) {
            config_error("'times' must be a nonempty array");
        }
        cfg.times.clear();
        for (const auto& t : j["times"]) cfg.times.push_back(t.get<double>());
        for (std::size_t k = 1; k < cfg.times.size(); ++k) {
            if (!(cfg.times[k] > cfg.times[k - 1])) config_error("'times' must be ascending");
        }
        if (cfg.times.front() < 0.0) config_error("'times' must be nonnegative");
    }

    if (j.contains("output")) {
        const Json& out = j["output"];
        if (out.contains("dir")) cfg.output.dir = out["dir"].get<std::string>();
        if (out.contains("formats")) {
            cfg.output.csv = cfg.output.json = false;
            for (const auto& f : out["formats"]) {
                const std::string name = f.get<std::string>();
                if (name == "csv") {
                    cfg.output.csv = true;
                } else if (name == "json") {
                    cfg.output.json = true;
                } else {
                    config_error("unknown output format '" + name + "'");
                }
            }
        }
    }

    if (j.contains("tolerances")) {
        const Json& tol = j["tolerances"];
        cfg.tolerances.mass = tol.value("mass", cfg.tolerances.mass);
        cfg.tolerances.governing = tol.value("governing", cfg.tolerances.governing);
        cfg.tolerances.euler_h = tol.value("euler_h", cfg.tolerances.euler_h);
        cfg.tolerances.euler_order_min =
            tol.value("euler_order_min", cfg.tolerances.euler_order_min);
        cfg.tolerances.residual_floor =
            tol.value("residual_floor", cfg.tolerances.residual_floor);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        config_error("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

}  // namespace lagflow
