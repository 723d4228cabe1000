#include "ksreg/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ksreg {

using nlohmann::json;

void ScenarioFile::validate() const {
    if (bodies.size() < 2) throw ScenarioError("bodies", "at least 2 bodies required");
    for (std::size_t i = 0; i < bodies.size(); ++i)
        if (!(bodies[i].mass > 0.0))
            throw ScenarioError("bodies[" + std::to_string(i) + "].mass", "must be > 0");
    for (std::size_t i = 0; i < tolerances.size(); ++i)
        if (!(tolerances[i] > 0.0))
            throw ScenarioError("tolerances[" + std::to_string(i) + "]", "must be > 0");
    if (t_end && s_end) throw ScenarioError("t_end", "give either t_end or s_end, not both");
    if (t_end && !(*t_end > 0.0)) throw ScenarioError("t_end", "must be > 0");
    if (s_end && !(*s_end > 0.0)) throw ScenarioError("s_end", "must be > 0");
    if (checkpoint_spacing && !(*checkpoint_spacing > 0.0))
        throw ScenarioError("checkpoint_spacing", "must be > 0");
}

namespace {

double finite_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ScenarioError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ScenarioError(path, "must be finite");
    return v;
}

Vec3 vec3_field(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ScenarioError(path, "expected an array of 3 numbers");
    return Vec3{finite_number(j[0], path + "[0]"), finite_number(j[1], path + "[1]"),
                finite_number(j[2], path + "[2]")};
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& path) {
    for (const auto& item : j.items())
        if (!known.contains(item.key()))
            throw ScenarioError(path.empty() ? item.key() : path + "." + item.key(),
                                "unknown key");
}

}  // namespace

ScenarioFile parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError("<document>", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ScenarioError("<document>", "expected a JSON object");
    reject_unknown_keys(j,
                        {"name", "bodies", "theta_ref_deg", "vartheta_deg", "tolerances", "t_end",
                         "s_end", "checkpoint_spacing", "output_dir"},
                        "");

    ScenarioFile sc;
    if (!j.contains("name") || !j["name"].is_string())
        throw ScenarioError("name", "required string field");
    sc.name = j["name"].get<std::string>();

    if (!j.contains("bodies")) throw ScenarioError("bodies", "required field");
    const json& jb = j["bodies"];
    if (!jb.is_array()) throw ScenarioError("bodies", "expected an array");
    for (std::size_t i = 0; i < jb.size(); ++i) {
        const std::string path = "bodies[" + std::to_string(i) + "]";
        const json& e = jb[i];
        if (!e.is_object()) throw ScenarioError(path, "expected an object");
        reject_unknown_keys(e, {"mass", "position", "velocity"}, path);
        if (!e.contains("mass")) throw ScenarioError(path + ".mass", "required field");
        if (!e.contains("position")) throw ScenarioError(path + ".position", "required field");
        if (!e.contains("velocity")) throw ScenarioError(path + ".velocity", "required field");
        Body b;
        b.mass = finite_number(e["mass"], path + ".mass");
        b.position = vec3_field(e["position"], path + ".position");
        b.velocity = vec3_field(e["velocity"], path + ".velocity");
        sc.bodies.push_back(b);
    }

    if (j.contains("theta_ref_deg")) sc.theta_ref_deg = finite_number(j["theta_ref_deg"], "theta_ref_deg");
    if (j.contains("vartheta_deg")) {
        if (!j["vartheta_deg"].is_array()) throw ScenarioError("vartheta_deg", "expected an array");
        for (std::size_t i = 0; i < j["vartheta_deg"].size(); ++i)
            sc.vartheta_deg.push_back(
                finite_number(j["vartheta_deg"][i], "vartheta_deg[" + std::to_string(i) + "]"));
    }
    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_array()) throw ScenarioError("tolerances", "expected an array");
        for (std::size_t i = 0; i < j["tolerances"].size(); ++i)
            sc.tolerances.push_back(
                finite_number(j["tolerances"][i], "tolerances[" + std::to_string(i) + "]"));
    }
    if (j.contains("t_end")) sc.t_end = finite_number(j["t_end"], "t_end");
    if (j.contains("s_end")) sc.s_end = finite_number(j["s_end"], "s_end");
    if (j.contains("checkpoint_spacing"))
        sc.checkpoint_spacing = finite_number(j["checkpoint_spacing"], "checkpoint_spacing");
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ScenarioError("output_dir", "expected a string");
        sc.output_dir = j["output_dir"].get<std::string>();
    }

    sc.validate();
    return sc;
}

ScenarioFile parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("<file>", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

bool is_builtin_scenario(const std::string& name) {
    return name == "pythagorean" || name == "binary-scattering";
}

ScenarioFile builtin_scenario(const std::string& name) {
    ScenarioFile sc;
    sc.name = name;
    if (name == "pythagorean") {
        // three bodies at rest on the vertices of a 3-4-5 right triangle
        sc.bodies = {
            Body{3.0, Vec3{1.0, 3.0, 0.0}, Vec3{}},
            Body{4.0, Vec3{-2.0, -1.0, 0.0}, Vec3{}},
            Body{5.0, Vec3{1.0, -1.0, 0.0}, Vec3{}},
        };
        sc.theta_ref_deg = 0.0;
        sc.vartheta_deg = {120.0};
        sc.tolerances = {1e-13};
        sc.t_end = 95.0;  // past the escape, with room for its confirmation
    } else if (name == "binary-scattering") {
        // equal-mass binary with two field stars arriving simultaneously
        sc.bodies = {
            Body{5.0, Vec3{0.6245, 0.6207, 0.0}, Vec3{-0.7873, 0.0200, -0.0100}},
            Body{5.0, Vec3{0.6245, -0.6207, 0.0}, Vec3{0.7873, 0.0200, 0.0100}},
            Body{3.0, Vec3{3.0, 3.0, 3.0}, Vec3{-0.3000, -0.3000, -0.3000}},
            Body{3.0, Vec3{-5.0817, -3.0, -3.0}, Vec3{0.3000, 0.2333, 0.3000}},
        };
        sc.theta_ref_deg = 90.0;
        sc.vartheta_deg = {30.0};
        sc.tolerances = {1e-13};
        sc.t_end = 80.0;
    } else {
        throw ScenarioError("scenario", "unknown builtin scenario '" + name + "'");
    }
    sc.validate();
    return sc;
}

ScenarioFile load_scenario(const std::string& name_or_path) {
    if (is_builtin_scenario(name_or_path)) return builtin_scenario(name_or_path);
    return parse_scenario(name_or_path);
}

}  // namespace ksreg
