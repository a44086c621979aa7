#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/conformal.hpp"
#include "finsler/oracle.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

inline constexpr const char* kConfigSchemaId = "finsler.scanconfig/1";
inline constexpr const char* kReportSchemaId = "finsler.scanreport/1";
inline constexpr const char* kToolVersion = "0.1.0";

/// Configuration problems: unknown kinds, malformed fields, invalid
/// parameters. The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A constructed metric plus whatever auxiliary structure its kind carries
/// (the Riemannian field behind a wrapper, the factors of a warped product,
/// the pair of a conformal deformation).
struct MetricBundle {
    FinslerMetric metric;
    std::shared_ptr<RiemannianField> field;
    std::shared_ptr<WarpedProductMetric> warped;
    std::shared_ptr<ConformalPair> conformal;
    std::shared_ptr<WarpedSphereExample> sphere_example;
};

/// Builds a metric from {"kind": ..., "params": {...}}; see README for the
/// catalog. Unknown kinds and invalid parameters raise ConfigError.
MetricBundle build_metric(const nlohmann::json& spec);
ScalarFactor build_factor(const nlohmann::json& spec);
CurveFunction build_curve(const nlohmann::json& spec);
std::vector<std::string> known_metric_kinds();

struct SampleSpec {
    int count = 20;
    std::uint64_t seed = 1;
    double y_scale = 1.0;
    std::optional<BoxDomain> domain;  // overrides the metric's chart box
};

struct OutputSpec {
    std::string format = "json";  // json | csv
    std::string path;             // empty -> stdout
};

struct ScanConfig {
    nlohmann::json metric_spec;
    SampleSpec samples;
    int order = 4;
    std::map<std::string, double> tolerances;  // overrides of the defaults
    std::vector<std::string> checks = {"properties"};
    std::optional<nlohmann::json> conformal_u;
    std::optional<nlohmann::json> cylinder_phi;
    double cylinder_eps = 0.0;
    bool with_oracle = false;
    std::optional<int> threads;
    OutputSpec output;

    nlohmann::json echo() const;  // normalized form embedded in reports
};

/// Strict parse: unknown keys anywhere are rejected.
ScanConfig parse_scan_config(const nlohmann::json& j);

/// Default tolerance per named residual; config tolerances override.
const std::map<std::string, double>& default_tolerances();

struct ScanOutcome {
    int exit_code = 0;  // 0 all enabled checks pass, 1 otherwise
    nlohmann::json report;
};

/// Runs the configured checks over the sample plan. Per-point evaluation
/// errors are recorded in the report, not thrown; configuration problems
/// throw ConfigError.
ScanOutcome run_scan(const ScanConfig& config);

/// Serializes the report per the output spec. Relative paths are resolved
/// against $FINSLER_OUTPUT_DIR when set. Unwritable paths raise ConfigError.
void write_report(const nlohmann::json& report, const OutputSpec& output);

/// Full command-line entry point (argv form), shared by the binary and the
/// test suite. Returns the process exit code: 0 pass, 1 check failure,
/// 2 usage/config error.
int cli_main(int argc, const char* const* argv);

}  // namespace finsler
