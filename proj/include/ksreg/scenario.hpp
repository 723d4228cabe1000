#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksreg/nbody_reg.hpp"

namespace ksreg {

/// Scenario input error; `field` carries the path of the offending key.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field(field) {}
    std::string field;
};

/// An experiment description: bodies, fiber angles, tolerances, horizon.
/// Dimensionless units with G = 1.
struct ScenarioFile {
    std::string name;
    std::vector<Body> bodies;
    double theta_ref_deg = 0.0;
    std::vector<double> vartheta_deg;      // fiber offsets to compare against the reference
    std::vector<double> tolerances;        // integration tolerances
    std::optional<double> t_end;           // horizon in physical time ...
    std::optional<double> s_end;           // ... or in fictitious time
    std::optional<double> checkpoint_spacing;  // in s; chosen automatically when absent
    std::string output_dir = "out";

    void validate() const;  // throws ScenarioError
};

/// Parse a scenario from strict JSON text: unknown keys are rejected,
/// all numbers must be finite 64-bit floats.
ScenarioFile parse_scenario_text(const std::string& text);

/// Parse a scenario file from disk.
ScenarioFile parse_scenario(const std::filesystem::path& path);

bool is_builtin_scenario(const std::string& name);

/// Built-in experiment setups: "pythagorean" (three bodies at rest on a
/// 3-4-5 right triangle) and "binary-scattering" (an equal-mass binary
/// with two incoming field stars).
ScenarioFile builtin_scenario(const std::string& name);

/// Load by builtin name or by file path.
ScenarioFile load_scenario(const std::string& name_or_path);

}  // namespace ksreg
