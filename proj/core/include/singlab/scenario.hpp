#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "singlab/capacity.hpp"
#include "singlab/elliptic.hpp"
#include "singlab/ladder.hpp"
#include "singlab/measure.hpp"

namespace singlab {

enum class SchemeSelection { Split, Monotone, Both };

struct CapacityStudyConfig {
    CondenserProblem base;
    std::vector<double> radii;  // singleton = one estimate, >= 3 = trend
    double tol = 1e-6;
};

/// Parsed, validated scenario. The JSON schema is strict: unknown keys are
/// rejected with their path, and every key is consumed by exactly one module.
struct ScenarioConfig {
    std::string name = "scenario";
    int dim = 1;
    int resolution = 65;
    Domain::Extents extents{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
    CoefficientField coefficient = CoefficientField::identity();
    double gamma = 1.0;
    SchemeSelection scheme = SchemeSelection::Monotone;
    MeasureSpec measure;
    bool has_measure = false;
    std::vector<double> schedule;
    SingularSolverOptions solver;
    double convergence_tol = 1e-3;
    double omega_delta = 0.1;
    std::vector<double> trace_eps_factors;  // multiples of h; empty -> {8,4,2}
    double capture_delta = 0.0;             // >0 restricts captured mass to dist >= delta
    double mollification_radius = 0.0;      // 0 -> h/2
    double uniqueness_tol = 1e-2;           // cross-scheme sup-distance threshold
    std::optional<CapacityStudyConfig> capacity;
    std::string out_dir;  // optional default from the config file
};

ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& json_text);

/// Stable-key-order JSON serialization; parse(serialize(cfg)) is idempotent.
std::string serialize_scenario(const ScenarioConfig& cfg);

struct ScenarioOutcome {
    int status = 0;  // 0 ok, 3 solver failure (partial artifacts), 4 checks failed
    std::vector<std::string> check_failures;
    std::string summary_path;
    std::string levels_path;
    std::string capacity_path;
    std::string summary_json;
};

/// Execute the scenario and write levels.csv / summary.json / capacity.csv
/// under out_dir. Deterministic: identical configs produce byte-identical
/// artifacts.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                             std::ostream* log = nullptr);

/// Run the capacity block only (capacity.csv + summary).
ScenarioOutcome run_capacity_study(const ScenarioConfig& cfg, const std::string& out_dir,
                                   std::ostream* log = nullptr);

/// Oracle self-tests (closed forms, shooting, exponents, quadrature
/// identities). Prints one line per check; returns 0 on pass, 4 otherwise.
int run_validation_suite(std::ostream& log);

}  // namespace singlab
