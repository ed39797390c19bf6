#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagflow/presets.hpp"
#include "lagflow/verify.hpp"

namespace lagflow {

using Json = nlohmann::ordered_json;

struct OutputConfig {
    std::string dir = "out";
    bool csv = true;
    bool json = true;
};

// Parsed run configuration. `hash` fingerprints the effective JSON (after
// command-line overrides), so reports echo exactly what was run.
struct RunConfig {
    Json raw;
    std::string hash;
    std::optional<FlowSpec> flow;
    std::optional<HarmonicMap> map1, map2;
    std::vector<double> times{0.0, 0.5, 1.0, 2.0};
    OutputConfig output;
    VerifyTolerances tolerances;
};

Json complex_to_json(Complex c);
Complex complex_from_json(const Json& j);

Json domain_to_json(const Domain& d);
Domain domain_from_json(const Json& j);

Json flow_spec_to_json(const FlowSpec& spec);
FlowSpec flow_spec_from_json(const Json& j, const Json* domain_override);

// Full config object for a preset id: a runnable flow config for the flow
// presets, a map-pair config (map vs itself) for harmonic_koebe.
Json preset_show_json(PresetId id);

RunConfig parse_config(const Json& j);
RunConfig load_config_file(const std::string& path);

// Applies command-line overrides onto the raw JSON before parsing.
struct ConfigOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::pair<int, int>> grid;
    std::optional<std::vector<double>> times;
    std::optional<double> tol;
};
Json apply_overrides(Json j, const ConfigOverrides& o);

}  // namespace lagflow
