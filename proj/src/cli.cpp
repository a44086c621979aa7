#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "finsler/scan.hpp"

namespace finsler {

using nlohmann::json;

namespace {

json metric_spec_from_name(const std::string& name, const std::vector<double>& b,
                           double c) {
    static const std::regex euclid_re("^euclidean([0-9]+)$");
    static const std::regex randers_re("^randers([0-9]+)$");
    std::smatch m;
    if (std::regex_match(name, m, euclid_re))
        return json{{"kind", "euclidean"}, {"params", {{"dim", std::stoi(m[1])}}}};
    if (std::regex_match(name, m, randers_re)) {
        if (b.empty())
            throw ConfigError("metric '" + name + "' needs --b (e.g. --b 0.5,0)");
        if (static_cast<int>(b.size()) != std::stoi(m[1]))
            throw ConfigError("--b arity does not match '" + name + "'");
        return json{{"kind", "randers"}, {"params", {{"b", b}}}};
    }
    if (name == "sphere2") return json{{"kind", "sphere2"}};
    if (name == "hyperbolic2") return json{{"kind", "hyperbolic2"}};
    if (name == "s3chart") return json{{"kind", "s3chart"}};
    if (name == "warped_s3")
        return json{{"kind", "warped_s3"}, {"params", {{"c", c}}}};
    if (name == "warped_hyperbolic") return json{{"kind", "warped_hyperbolic"}};
    throw ConfigError("unknown metric name '" + name + "'");
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

// "const:1.0", "linear:0.1,0,0", "cos_plus_c:2", "neg_log_cos_plus_c:2"
json factor_spec_from_string(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args =
        colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    try {
        if (kind == "const")
            return json{{"kind", "const"}, {"params", {{"value", std::stod(args)}}}};
        if (kind == "linear")
            return json{{"kind", "linear"}, {"params", {{"coeffs", parse_doubles(args)}}}};
        if (kind == "cos_plus_c")
            return json{{"kind", "cos_plus_c"}, {"params", {{"c", std::stod(args)}}}};
        if (kind == "neg_log_cos_plus_c")
            return json{{"kind", "neg_log_cos_plus_c"},
                        {"params", {{"c", std::stod(args)}}}};
        if (kind == "log_cos_plus_c")
            return json{{"kind", "log_cos_plus_c"}, {"params", {{"c", std::stod(args)}}}};
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed factor spec '" + spec + "'");
    }
    throw ConfigError("unknown factor spec '" + spec +
                      "' (const:V | linear:a,b,... | cos_plus_c:C | "
                      "neg_log_cos_plus_c:C | log_cos_plus_c:C)");
}

json curve_spec_from_string(const std::string& name, double c, double slope,
                            double intercept) {
    if (name == "cos+c" || name == "cos_plus_c")
        return json{{"kind", "cos_plus_c"}, {"params", {{"c", c}}}};
    if (name == "linear")
        return json{{"kind", "linear"},
                    {"params", {{"slope", slope}, {"intercept", intercept}}}};
    throw ConfigError("unknown phi spec '" + name + "' (cos+c | linear)");
}

void print_summary(const json& report) {
    for (const auto& entry : report.at("summary").at("checks")) {
        const bool gated = entry.at("gated").get<bool>();
        const bool pass = entry.at("pass").get<bool>();
        std::ostringstream line;
        line << (gated ? (pass ? "[PASS] " : "[FAIL] ") : "[info] ")
             << entry.at("check").get<std::string>() << '/'
             << entry.at("residual").get<std::string>()
             << " max=" << entry.at("max").get<double>()
             << " mean=" << entry.at("mean").get<double>();
        if (gated) line << " tol=" << entry.at("tolerance").get<double>();
        std::cerr << line.str() << '\n';
    }
    const auto& s = report.at("summary");
    std::cerr << (s.at("pass").get<bool>() ? "RESULT PASS" : "RESULT FAIL") << " ("
              << s.at("points").get<int>() << " points, "
              << s.at("points_failed").get<int>() << " errors)\n";
}

int execute(ScanConfig cfg) {
    ScanOutcome out = run_scan(cfg);
    write_report(out.report, cfg.output);
    print_summary(out.report);
    return out.exit_code;
}

struct CommonOptions {
    std::string metric;
    std::string b_csv;
    double c = 2.0;
    int count = 50;
    std::uint64_t seed = 1;
    int order = 4;
    double y_scale = 1.0;
    std::string output;
    std::string format = "json";

    void add_to(CLI::App* cmd, bool with_metric = true) {
        if (with_metric)
            cmd->add_option("--metric", metric, "metric name (see README catalog)")
                ->required();
        cmd->add_option("--b", b_csv, "Randers drift, comma separated");
        cmd->add_option("--c", c, "parameter c of warped_s3 / cos+c");
        cmd->add_option("--count", count, "number of samples");
        cmd->add_option("--seed", seed, "sampling seed");
        cmd->add_option("--order", order, "jet order");
        cmd->add_option("--y-scale", y_scale, "fiber vector scale");
        cmd->add_option("--output", output, "report path (default: stdout)");
        cmd->add_option("--format", format, "json | csv");
    }

    ScanConfig base_config() const {
        ScanConfig cfg;
        cfg.metric_spec = metric_spec_from_name(metric, parse_doubles(b_csv), c);
        cfg.samples.count = count;
        cfg.samples.seed = seed;
        cfg.samples.y_scale = y_scale;
        cfg.order = order;
        cfg.output.path = output;
        cfg.output.format = format;
        return cfg;
    }
};

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{
        "finsler: pointwise curvature, Einstein-criterion and conformal "
        "verification scans for Finsler metrics"};
    app.require_subcommand(1);

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "run checks from a JSON config");
    std::string config_path, scan_output;
    bool scan_oracle = false;
    scan_cmd->add_option("--config", config_path, "config file (JSON)")->required();
    scan_cmd->add_option("--output", scan_output, "override output path");
    scan_cmd->add_flag("--with-oracle", scan_oracle,
                       "append finite-difference oracle columns");

    // einstein-check
    auto* einstein_cmd =
        app.add_subcommand("einstein-check", "horizontal Einstein criterion scan");
    CommonOptions einstein_opts;
    einstein_opts.add_to(einstein_cmd);
    double einstein_tol = 1e-6, spread_tol = 1e-6;
    einstein_cmd->add_option("--tol", einstein_tol, "Einstein residual tolerance");

    einstein_cmd->add_option("--spread-tol", spread_tol,
                             "scalar-curvature spread tolerance");

    // conformal-check
    auto* conformal_cmd = app.add_subcommand(
        "conformal-check", "criterion-preservation residual for a factor u");
    CommonOptions conformal_opts;
    conformal_opts.count = 20;
    conformal_opts.add_to(conformal_cmd);
    std::string u_spec;
    double ee9_tol = 1e-12;
    conformal_cmd->add_option("--u", u_spec, "factor, e.g. const:1.0")->required();
    conformal_cmd->add_option("--tol", ee9_tol, "residual tolerance");

    // cylinder-check
    auto* cylinder_cmd = app.add_subcommand(
        "cylinder-check", "Hessian identity on ((0,eps) x M2, sqrt(y_t^2 + phi'^2 F2^2))");
    std::string phi_name, m2_name;
    double cyl_c = 2.0, cyl_eps = 0.0, cyl_slope = 1.0, cyl_intercept = 2.0,
           cyl_tol = 1e-6;
    int cyl_samples = 50, cyl_order = 4;
    std::uint64_t cyl_seed = 1;
    std::string cyl_output, cyl_format = "json";
    cylinder_cmd->add_option("--phi", phi_name, "cos+c | linear")->required();
    cylinder_cmd->add_option("--c", cyl_c, "c of cos+c");
    cylinder_cmd->add_option("--slope", cyl_slope, "slope of linear phi");
    cylinder_cmd->add_option("--intercept", cyl_intercept, "intercept of linear phi");

    cylinder_cmd->add_option("--eps", cyl_eps, "cylinder length")->required();
    cylinder_cmd->add_option("--m2", m2_name, "second factor metric")->required();
    cylinder_cmd->add_option("--samples", cyl_samples, "number of samples");
    cylinder_cmd->add_option("--seed", cyl_seed, "sampling seed");
    cylinder_cmd->add_option("--order", cyl_order, "jet order");
    cylinder_cmd->add_option("--tol", cyl_tol, "Hessian residual tolerance");
    cylinder_cmd->add_option("--output", cyl_output, "report path");
    cylinder_cmd->add_option("--format", cyl_format, "json | csv");

    // warped-check
    auto* warped_cmd =
        app.add_subcommand("warped-check", "warped-product structure checks");
    CommonOptions warped_opts;
    warped_opts.add_to(warped_cmd);

    // oracle-diff
    auto* oracle_cmd = app.add_subcommand(
        "oracle-diff", "pipeline vs finite-difference oracle on Riemannian metrics");
    CommonOptions oracle_opts;
    oracle_opts.add_to(oracle_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(scan_cmd)) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("cannot read config '" + config_path + "'");
            json j;
            try {
                j = json::parse(is);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("malformed config JSON: ") + e.what());
            }
            ScanConfig cfg = parse_scan_config(j);
            if (!scan_output.empty()) cfg.output.path = scan_output;
            if (scan_oracle) cfg.with_oracle = true;
            return execute(std::move(cfg));
        }
        if (app.got_subcommand(einstein_cmd)) {
            ScanConfig cfg = einstein_opts.base_config();
            cfg.checks = {"einstein"};
            cfg.tolerances["einstein_residual"] = einstein_tol;
            cfg.tolerances["scal_spread"] = spread_tol;
            return execute(std::move(cfg));
        }
        if (app.got_subcommand(conformal_cmd)) {
            ScanConfig cfg = conformal_opts.base_config();
            cfg.checks = {"conformal"};
            cfg.conformal_u = factor_spec_from_string(u_spec);
            cfg.tolerances["ee9_residual"] = ee9_tol;
            return execute(std::move(cfg));
        }
        if (app.got_subcommand(cylinder_cmd)) {
            ScanConfig cfg;
            cfg.metric_spec = metric_spec_from_name(m2_name, {}, 2.0);
            cfg.checks = {"cylinder"};
            cfg.cylinder_phi =
                curve_spec_from_string(phi_name, cyl_c, cyl_slope, cyl_intercept);
            cfg.cylinder_eps = cyl_eps;
            cfg.samples.count = cyl_samples;
            cfg.samples.seed = cyl_seed;
            cfg.order = cyl_order;
            cfg.tolerances["cylinder_hessian"] = cyl_tol;
            cfg.output.path = cyl_output;
            cfg.output.format = cyl_format;
            return execute(std::move(cfg));
        }
        if (app.got_subcommand(warped_cmd)) {
            ScanConfig cfg = warped_opts.base_config();
            cfg.checks = {"warped"};
            return execute(std::move(cfg));
        }
        if (app.got_subcommand(oracle_cmd)) {
            ScanConfig cfg = oracle_opts.base_config();
            cfg.checks = {"properties"};
            cfg.with_oracle = true;
            return execute(std::move(cfg));
        }
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace finsler
