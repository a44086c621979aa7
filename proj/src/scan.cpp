#include "finsler/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace finsler {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

json params_of(const json& spec) {
    return spec.contains("params") ? spec.at("params") : json::object();
}

const std::set<std::string>& known_checks() {
    static const std::set<std::string> checks = {"properties", "einstein",
                                                 "conformal", "cylinder", "warped"};
    return checks;
}

}  // namespace

std::vector<std::string> known_metric_kinds() {
    return {"euclidean",  "sphere2",   "hyperbolic2",       "s3chart", "randers",
            "warped",     "warped_s3", "warped_hyperbolic", "conformal"};
}

CurveFunction build_curve(const json& spec) {
    require_keys(spec, "curve", {"kind", "params"});
    const std::string kind = spec.value("kind", "");
    const json p = params_of(spec);
    if (kind == "cos_plus_c") {
        require_keys(p, "curve params", {"c"});
        return cosine_plus_constant(p.value("c", 2.0));
    }
    if (kind == "linear") {
        require_keys(p, "curve params", {"slope", "intercept"});
        return linear_curve(p.value("slope", 1.0), p.value("intercept", 2.0));
    }
    throw ConfigError("unknown curve kind '" + kind + "'");
}

ScalarFactor build_factor(const json& spec) {
    require_keys(spec, "factor", {"kind", "params"});
    const std::string kind = spec.value("kind", "");
    const json p = params_of(spec);
    if (kind == "const") {
        require_keys(p, "factor params", {"value"});
        return constant_factor(p.value("value", 0.0));
    }
    if (kind == "linear") {
        require_keys(p, "factor params", {"coeffs"});
        if (!p.contains("coeffs"))
            throw ConfigError("factor 'linear' needs coeffs");
        return linear_factor(p.at("coeffs").get<std::vector<double>>());
    }
    if (kind == "cos_plus_c") {
        require_keys(p, "factor params", {"c"});
        return factor_from_curve(cosine_plus_constant(p.value("c", 2.0)));
    }
    if (kind == "neg_log_cos_plus_c") {
        require_keys(p, "factor params", {"c"});
        return negative_log_factor_from_curve(cosine_plus_constant(p.value("c", 2.0)));
    }
    if (kind == "log_cos_plus_c") {
        require_keys(p, "factor params", {"c"});
        return log_factor_from_curve(cosine_plus_constant(p.value("c", 2.0)));
    }
    throw ConfigError("unknown factor kind '" + kind + "'");
}

namespace {

WarpFunction build_warp(const json& spec) {
    require_keys(spec, "warp", {"kind", "params"});
    const std::string kind = spec.value("kind", "");
    const json p = params_of(spec);
    if (kind == "const") {
        require_keys(p, "warp params", {"value"});
        return constant_warp(p.value("value", 1.0));
    }
    if (kind == "sin_first") {
        require_keys(p, "warp params", {});
        return sine_warp();
    }
    if (kind == "exp_linear") {
        require_keys(p, "warp params", {"coeffs"});
        if (!p.contains("coeffs"))
            throw ConfigError("warp 'exp_linear' needs coeffs");
        return exp_linear_warp(p.at("coeffs").get<std::vector<double>>());
    }
    throw ConfigError("unknown warp kind '" + kind + "'");
}

}  // namespace

MetricBundle build_metric(const json& spec) {
    require_keys(spec, "metric", {"kind", "params"});
    const std::string kind = spec.value("kind", "");
    const json p = params_of(spec);
    MetricBundle b;
    try {
        if (kind == "euclidean") {
            require_keys(p, "metric params", {"dim"});
            b.metric = make_euclidean(p.value("dim", 2));
            b.field = std::make_shared<RiemannianField>(
                euclidean_field(p.value("dim", 2)));
        } else if (kind == "sphere2") {
            require_keys(p, "metric params", {});
            b.field = std::make_shared<RiemannianField>(sphere2_field());
            b.metric = make_riemannian(*b.field);
        } else if (kind == "hyperbolic2") {
            require_keys(p, "metric params", {});
            b.field = std::make_shared<RiemannianField>(hyperbolic2_field());
            b.metric = make_riemannian(*b.field);
        } else if (kind == "s3chart") {
            require_keys(p, "metric params", {});
            b.field = std::make_shared<RiemannianField>(s3_chart_field());
            b.metric = make_riemannian(*b.field);
        } else if (kind == "randers") {
            require_keys(p, "metric params", {"b"});
            if (!p.contains("b")) throw ConfigError("randers needs parameter b");
            b.metric = make_randers(p.at("b").get<std::vector<double>>());
        } else if (kind == "warped") {
            require_keys(p, "metric params", {"first", "second", "warp"});
            MetricBundle first = build_metric(p.at("first"));
            MetricBundle second = build_metric(p.at("second"));
            b.warped = std::make_shared<WarpedProductMetric>(make_warped(
                first.metric, second.metric, build_warp(p.at("warp"))));
            b.metric = b.warped->metric;
        } else if (kind == "warped_s3") {
            require_keys(p, "metric params", {"c"});
            b.sphere_example = std::make_shared<WarpedSphereExample>(
                make_warped_sphere_example(p.value("c", 2.0)));
            b.warped = std::make_shared<WarpedProductMetric>(b.sphere_example->warped);
            b.metric = b.warped->metric;
        } else if (kind == "warped_hyperbolic") {
            require_keys(p, "metric params", {});
            b.warped = std::make_shared<WarpedProductMetric>(
                make_warped_hyperbolic_example());
            b.metric = b.warped->metric;
        } else if (kind == "conformal") {
            require_keys(p, "metric params", {"base", "u"});
            if (!p.contains("base") || !p.contains("u"))
                throw ConfigError("conformal needs base and u");
            MetricBundle base = build_metric(p.at("base"));
            b.conformal = std::make_shared<ConformalPair>(
                make_conformal(base.metric, build_factor(p.at("u"))));
            b.metric = b.conformal->deformed;
        } else {
            throw ConfigError("unknown metric kind '" + kind + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return b;
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> tol = {
        {"homogeneity", 1e-9},
        {"g_scale_invariance", 1e-8},
        {"euler", 1e-8},
        {"f_squared_consistency", 1e-10},
        {"g_inverse", 1e-9},
        {"cartan_symmetry", 1e-9},
        {"cartan_y", 1e-9},
        {"cartan_riemannian", 1e-10},
        {"chern_symmetry", 1e-12},
        {"compatibility", 1e-7},
        {"n_gamma_consistency", 1e-8},
        {"hh_antisymmetry", 1e-14},
        {"efree_trace", 1e-9},
        {"delta_f2", 1e-8},
        {"einstein_residual", 1e-6},
        {"scal_spread", 1e-6},
        {"ee9_residual", 1e-12},
        {"cylinder_hessian", 1e-6},
        {"warped_block", 1e-12},
        {"warped_mixed_gamma", 1e-7},
        {"warped_factor_gamma", 1e-7},
        {"warped_cross_curvature", 1e-8},
        {"warped_factor_curvature", 1e-6},
        {"oracle_gamma", 1e-6},
        {"oracle_riemann", 1e-5},
        {"oracle_ricci", 1e-5},
        {"oracle_scal", 1e-5},
    };
    return tol;
}

json ScanConfig::echo() const {
    json j;
    j["schema"] = kConfigSchemaId;
    j["metric"] = metric_spec;
    json s;
    s["count"] = samples.count;
    s["seed"] = samples.seed;
    s["y_scale"] = samples.y_scale;
    if (samples.domain) {
        json box = json::array();
        for (const auto& [lo, hi] : samples.domain->ranges)
            box.push_back(json::array({lo, hi}));
        s["domain"] = json{{"x_box", box}};
    }
    j["samples"] = s;
    j["order"] = order;
    j["tolerances"] = tolerances;
    j["checks"] = checks;
    if (conformal_u) j["conformal"] = json{{"u", *conformal_u}};
    if (cylinder_phi)
        j["cylinder"] = json{{"phi", *cylinder_phi}, {"eps", cylinder_eps}};
    j["with_oracle"] = with_oracle;
    if (threads) j["threads"] = *threads;
    j["output"] = json{{"format", output.format}, {"path", output.path}};
    return j;
}

ScanConfig parse_scan_config(const json& j) {
    require_keys(j, "config",
                 {"schema", "metric", "samples", "order", "tolerances", "checks",
                  "conformal", "cylinder", "with_oracle", "threads", "output"});
    ScanConfig cfg;
    if (j.contains("schema") && j.at("schema").get<std::string>() != kConfigSchemaId)
        throw ConfigError("unsupported config schema '" +
                          j.at("schema").get<std::string>() + "'");
    if (!j.contains("metric")) throw ConfigError("config: missing 'metric'");
    cfg.metric_spec = j.at("metric");

    if (j.contains("samples")) {
        const json& s = j.at("samples");
        require_keys(s, "samples", {"count", "seed", "y_scale", "domain"});
        cfg.samples.count = s.value("count", cfg.samples.count);
        if (cfg.samples.count < 0) throw ConfigError("samples.count must be >= 0");
        cfg.samples.seed = s.value("seed", cfg.samples.seed);
        cfg.samples.y_scale = s.value("y_scale", cfg.samples.y_scale);
        if (s.contains("domain")) {
            require_keys(s.at("domain"), "samples.domain", {"x_box"});
            BoxDomain box;
            for (const auto& r : s.at("domain").at("x_box")) {
                if (!r.is_array() || r.size() != 2)
                    throw ConfigError("samples.domain.x_box entries must be [lo, hi]");
                box.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
            }
            cfg.samples.domain = std::move(box);
        }
    }

    cfg.order = j.value("order", 4);
    if (cfg.order < 1) throw ConfigError("order must be >= 1");

    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        if (!t.is_object()) throw ConfigError("tolerances must be an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            if (!default_tolerances().count(it.key()))
                throw ConfigError("unknown tolerance name '" + it.key() + "'");
            cfg.tolerances[it.key()] = it.value().get<double>();
        }
    }

    if (j.contains("checks")) {
        cfg.checks = j.at("checks").get<std::vector<std::string>>();
        for (const auto& c : cfg.checks)
            if (!known_checks().count(c))
                throw ConfigError("unknown check '" + c + "'");
    }

    if (j.contains("conformal")) {
        require_keys(j.at("conformal"), "conformal", {"u"});
        if (!j.at("conformal").contains("u"))
            throw ConfigError("conformal: missing 'u'");
        cfg.conformal_u = j.at("conformal").at("u");
    }
    if (j.contains("cylinder")) {
        require_keys(j.at("cylinder"), "cylinder", {"phi", "eps"});
        if (!j.at("cylinder").contains("phi"))
            throw ConfigError("cylinder: missing 'phi'");
        cfg.cylinder_phi = j.at("cylinder").at("phi");
        cfg.cylinder_eps = j.at("cylinder").value("eps", 0.0);
    }

    cfg.with_oracle = j.value("with_oracle", false);
    if (j.contains("threads")) {
        cfg.threads = j.at("threads").get<int>();
        if (*cfg.threads < 1) throw ConfigError("threads must be >= 1");
    }

    if (j.contains("output")) {
        require_keys(j.at("output"), "output", {"format", "path"});
        cfg.output.format = j.at("output").value("format", "json");
        cfg.output.path = j.at("output").value("path", "");
        if (cfg.output.format != "json" && cfg.output.format != "csv")
            throw ConfigError("output.format must be json or csv");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Point evaluation
// ---------------------------------------------------------------------------

namespace {

struct RunContext {
    const ScanConfig* cfg = nullptr;
    MetricBundle bundle;
    const FinslerMetric* target = nullptr;  // scanned metric
    std::set<std::string> checks;
    std::optional<ConformalPair> pair;       // conformal check
    std::optional<ScalarFactor> factor;      // its u
    std::optional<CurveFunction> phi;        // cylinder check
    std::optional<FinslerMetric> cylinder;   // the cylinder metric
    std::optional<ConformalPair> cyl_pair;   // (cylinder, phi * cylinder)
    std::optional<ScalarFactor> phi_factor;

    bool has(const std::string& c) const { return checks.count(c) > 0; }
};

struct PointRecord {
    PointState p;
    std::map<std::string, double> values;
    double F = std::numeric_limits<double>::quiet_NaN();
    double scal = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

void warped_values(const WarpedProductMetric& w, MetricEvaluation& ev,
                   const PointState& p, std::map<std::string, double>& out) {
    const int n = ev.dim();
    const int n1 = w.first.dim;
    const Matrix& g = ev.fundamental();

    double block = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int a = n1; a < n; ++a)
            block = std::max({block, std::abs(g(i, a)), std::abs(g(a, i))});
    out["warped_block"] = block;

    // Gamma^a_{i b} = (d_i f / f) delta^a_b for base index i, fiber a, b
    const JetScalar f =
        w.warp.eval(ev.x_jets().subspan(0, static_cast<std::size_t>(n1)));
    const Tensor3 gamma = ev.chern();
    double mixed = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double dfi = f.derivative(i).value() / f.value();
        for (int a = n1; a < n; ++a)
            for (int bb = n1; bb < n; ++bb) {
                const double expected = (a == bb) ? dfi : 0.0;
                mixed = std::max(mixed, std::abs(gamma(a, i, bb) - expected));
            }
    }
    out["warped_mixed_gamma"] = mixed;

    // lowered curvature with three first-factor slots and a second-factor
    // direction vanishes
    const Tensor4& r = ev.hh_curvature();
    double cross = 0.0;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i)
            for (int k = n1; k < n; ++k)
                for (int l = 0; l < n1; ++l) {
                    double v = 0.0;
                    for (int a = 0; a < n; ++a) v += g(i, a) * r(j, a, k, l);
                    cross = std::max(cross, std::abs(v));
                }
    out["warped_cross_curvature"] = cross;

    // restriction to the first factor reproduces the factor's own pipeline
    PointState p1;
    p1.order = p.order;
    p1.x.assign(p.x.begin(), p.x.begin() + n1);
    p1.y.assign(p.y.begin(), p.y.begin() + n1);
    double y_norm = 0.0;
    for (double c : p1.y) y_norm += c * c;
    if (y_norm < 1e-12) {
        // factor curvature is y-independent for the shipped (Riemannian /
        // flat) first factors, so any valid direction works
        p1.y.assign(static_cast<std::size_t>(n1), 0.0);
        p1.y[0] = 1.0;
    }
    MetricEvaluation ev1(w.first, p1);
    const Tensor3 gamma1 = ev1.chern();
    const Tensor4& r1 = ev1.hh_curvature();
    double dgamma = 0.0, dcurv = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j)
            for (int k = 0; k < n1; ++k)
                dgamma = std::max(dgamma, std::abs(gamma(i, j, k) - gamma1(i, j, k)));
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i)
            for (int k = 0; k < n1; ++k)
                for (int l = 0; l < n1; ++l)
                    dcurv = std::max(dcurv,
                                     std::abs(r(j, i, k, l) - r1(j, i, k, l)));
    out["warped_factor_gamma"] = dgamma;
    out["warped_factor_curvature"] = dcurv;
}

void oracle_values(const RiemannianField& field, MetricEvaluation& ev,
                   const std::vector<double>& x,
                   std::map<std::string, double>& out) {
    const RiemannOracleReport rep = riemann_ricci_fd(field, x);
    const int n = ev.dim();

    const Tensor3 gamma = ev.chern();
    double dgamma = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                dgamma = std::max(dgamma,
                                  std::abs(gamma(i, j, k) - rep.christoffel(i, j, k)));
    out["oracle_gamma"] = dgamma;

    const Tensor4& r = ev.hh_curvature();
    const Matrix& g = ev.fundamental();
    double dr = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double low = 0.0;
                    for (int a = 0; a < n; ++a) low += g(i, a) * r(j, a, k, l);
                    dr = std::max(dr, std::abs(low - rep.riemann_lowered(j, i, k, l)));
                }
    out["oracle_riemann"] = dr;

    const EinsteinResult& e = ev.einstein();
    out["oracle_ricci"] = max_abs(Matrix(e.ricci - rep.ricci));
    out["oracle_scal"] = std::abs(e.scal - rep.scal);
}

PointRecord evaluate_point(const RunContext& ctx, const PointState& p) {
    PointRecord rec;
    rec.p = p;
    try {
        if (ctx.has("properties")) {
            CurvatureReport r = full_report(*ctx.target, p);
            rec.values.insert(r.diagnostics.begin(), r.diagnostics.end());
            rec.F = r.F_value;
            rec.scal = r.scal;
            if (ctx.bundle.field)
                rec.values["cartan_riemannian"] = max_abs(r.cartan);
        }

        MetricEvaluation ev(*ctx.target, p);
        if (!std::isfinite(rec.F)) rec.F = ev.f_value();

        if (ctx.has("einstein")) {
            const EinsteinResult& e = ev.einstein();
            rec.values["einstein_residual"] = e.residual;
            rec.scal = e.scal;
        }

        if (ctx.has("conformal")) {
            const ConformalDiagnostics d = conformal_diagnostics(*ctx.pair, p);
            rec.values["ee9_residual"] = max_abs(d.ee9);
            rec.values["ee9_cartan_term"] = std::abs(d.cartan_term);
            rec.values["eq122b_gap"] = max_abs(d.eq122b);
        }

        if (ctx.has("warped")) warped_values(*ctx.bundle.warped, ev, p, rec.values);

        if (ctx.has("cylinder")) {
            const Matrix h = horizontal_hessian(ev, *ctx.phi_factor);
            const JetScalar uj = ctx.phi_factor->eval(ev.x_jets());
            const double phi_dd = uj.derivative(0).derivative(0).value();
            rec.values["cylinder_hessian"] =
                max_abs(Matrix(h - phi_dd * ev.fundamental()));
            if (ev.dim() >= 3) {
                const double fprop = proportionality_factor(ev, *ctx.phi_factor);
                rec.values["cylinder_form"] =
                    max_abs(Matrix(h - fprop * ev.fundamental()));
            }
            rec.values["deformed_einstein"] = ev.einstein().residual;
            rec.scal = ev.einstein().scal;
            MetricEvaluation base_ev(ctx.cyl_pair->deformed, p);
            rec.values["base_einstein"] = base_ev.einstein().residual;
        }

        if (ctx.cfg->with_oracle)
            oracle_values(*ctx.bundle.field, ev, p.x, rec.values);
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

// residual -> (check it belongs to, gated)
struct SummaryRule {
    std::string check;
    std::string name;
    bool gated = true;
};

std::vector<SummaryRule> summary_rules(const RunContext& ctx) {
    std::vector<SummaryRule> rules;
    if (ctx.has("properties")) {
        for (const char* name :
             {"homogeneity", "g_scale_invariance", "euler", "f_squared_consistency",
              "g_inverse", "cartan_symmetry", "cartan_y", "chern_symmetry",
              "compatibility", "n_gamma_consistency", "hh_antisymmetry",
              "efree_trace", "delta_f2"})
            rules.push_back({"properties", name, true});
        if (ctx.bundle.field)
            rules.push_back({"properties", "cartan_riemannian", true});
        rules.push_back({"properties", "einstein_residual", false});
    }
    if (ctx.has("einstein")) {
        rules.push_back({"einstein", "einstein_residual", true});
        rules.push_back({"einstein", "scal_spread", true});
    }
    if (ctx.has("conformal")) {
        rules.push_back({"conformal", "ee9_residual", true});
        rules.push_back({"conformal", "ee9_cartan_term", false});
        rules.push_back({"conformal", "eq122b_gap", false});
    }
    if (ctx.has("cylinder")) {
        rules.push_back({"cylinder", "cylinder_hessian", true});
        rules.push_back({"cylinder", "cylinder_form", false});
        rules.push_back({"cylinder", "base_einstein", false});
        rules.push_back({"cylinder", "deformed_einstein", false});
    }
    if (ctx.has("warped")) {
        for (const char* name : {"warped_block", "warped_mixed_gamma",
                                 "warped_factor_gamma", "warped_cross_curvature",
                                 "warped_factor_curvature"})
            rules.push_back({"warped", name, true});
    }
    if (ctx.cfg->with_oracle) {
        for (const char* name :
             {"oracle_gamma", "oracle_riemann", "oracle_ricci", "oracle_scal"})
            rules.push_back({"oracle", name, true});
    }
    return rules;
}

double tolerance_for(const ScanConfig& cfg, const std::string& name) {
    if (auto it = cfg.tolerances.find(name); it != cfg.tolerances.end())
        return it->second;
    return default_tolerances().at(name);
}

}  // namespace

ScanOutcome run_scan(const ScanConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    RunContext ctx;
    ctx.cfg = &cfg;
    ctx.bundle = build_metric(cfg.metric_spec);
    ctx.checks.insert(cfg.checks.begin(), cfg.checks.end());
    if (ctx.checks.empty()) throw ConfigError("no checks enabled");
    ctx.target = &ctx.bundle.metric;

    if (ctx.has("cylinder")) {
        if (ctx.checks.size() > 1 || cfg.with_oracle)
            throw ConfigError(
                "the cylinder check cannot be combined with other checks or "
                "oracle columns (the configured metric is the second factor)");
        if (!cfg.cylinder_phi)
            throw ConfigError("cylinder check needs cylinder.phi");
        if (!(cfg.cylinder_eps > 0.0))
            throw ConfigError("cylinder check needs cylinder.eps > 0");
        ctx.phi = build_curve(*cfg.cylinder_phi);
        ctx.cylinder = make_cylinder(ctx.bundle.metric, *ctx.phi, cfg.cylinder_eps);
        ctx.cyl_pair = make_conformal(*ctx.cylinder, log_factor_from_curve(*ctx.phi));
        ctx.phi_factor = factor_from_curve(*ctx.phi);
        ctx.target = &*ctx.cylinder;
    }

    if (ctx.has("conformal")) {
        if (ctx.bundle.conformal) {
            if (cfg.conformal_u)
                throw ConfigError(
                    "metric kind 'conformal' already carries u; drop conformal.u");
            ctx.pair = *ctx.bundle.conformal;
        } else {
            if (!cfg.conformal_u)
                throw ConfigError("conformal check needs conformal.u");
            ctx.pair = make_conformal(ctx.bundle.metric, build_factor(*cfg.conformal_u));
        }
        ctx.factor = ctx.pair->factor;
        if (ctx.pair->base.dim < 3)
            throw ConfigError(
                "conformal check requires dimension >= 3 (the criterion "
                "residual divides by n - 2)");
    }

    if (ctx.has("warped") && !ctx.bundle.warped)
        throw ConfigError("warped check requires a warped metric kind");
    if (cfg.with_oracle && !ctx.bundle.field)
        throw ConfigError(
            "oracle columns require a Riemannian-field metric "
            "(euclidean, sphere2, hyperbolic2 or s3chart)");

    const int needed =
        (ctx.has("properties") || ctx.has("einstein") || ctx.has("conformal") ||
         ctx.has("warped") || ctx.has("cylinder") || cfg.with_oracle)
            ? 4
            : 2;
    if (cfg.order < needed) {
        std::ostringstream os;
        os << "order " << cfg.order << " is too low for the enabled checks (need "
           << needed << ")";
        throw ConfigError(os.str());
    }

    Sampler sampler = ctx.target->sampler;
    if (cfg.samples.domain) {
        if (cfg.samples.domain->ranges.size() !=
            static_cast<std::size_t>(ctx.target->dim))
            throw ConfigError("domain override arity does not match metric dimension");
        sampler.x_box = *cfg.samples.domain;
    }
    sampler.y_scale = cfg.samples.y_scale;

    // Draw sequentially (seed-reproducible), evaluate in parallel.
    SampleRng rng(cfg.samples.seed);
    std::vector<PointState> points;
    int excluded = 0;
    {
        int attempts = 0;
        const int max_attempts = cfg.samples.count * 64 + 64;
        while (static_cast<int>(points.size()) < cfg.samples.count &&
               attempts < max_attempts) {
            ++attempts;
            PointState p = sampler.draw(rng, cfg.order);
            if (ctx.has("cylinder")) {
                const JetScalar t1 = JetScalar::variable(1, 1, 0, p.x[0]);
                if (std::abs(ctx.phi->derivative(t1).value()) < 1e-8) {
                    ++excluded;  // degenerate warping, phi'(t) ~ 0
                    continue;
                }
            }
            points.push_back(std::move(p));
        }
    }

    std::vector<PointRecord> records(points.size());
    {
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const int nthreads = std::clamp<int>(
            cfg.threads.value_or(static_cast<int>(std::min<unsigned>(hw, 8))), 1,
            std::max<int>(1, static_cast<int>(points.size())));
        if (nthreads <= 1 || points.size() < 2) {
            for (std::size_t i = 0; i < points.size(); ++i)
                records[i] = evaluate_point(ctx, points[i]);
        } else {
            std::atomic<std::size_t> next{0};
            auto worker = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= points.size()) return;
                    records[i] = evaluate_point(ctx, points[i]);
                }
            };
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(nthreads));
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
    }

    // Summaries
    json checks_json = json::array();
    bool all_pass = true;
    int failed_points = 0;
    for (const auto& r : records)
        if (!r.error.empty()) ++failed_points;

    for (const SummaryRule& rule : summary_rules(ctx)) {
        double mx = 0.0, sum = 0.0;
        int count = 0;
        if (rule.name == "scal_spread") {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& r : records)
                if (r.error.empty() && std::isfinite(r.scal)) {
                    lo = std::min(lo, r.scal);
                    hi = std::max(hi, r.scal);
                    ++count;
                }
            mx = count > 0 ? hi - lo : 0.0;
            sum = mx * count;
        } else {
            for (const auto& r : records) {
                auto it = r.values.find(rule.name);
                if (it == r.values.end()) continue;
                mx = std::max(mx, it->second);
                sum += it->second;
                ++count;
            }
        }
        json entry;
        entry["check"] = rule.check;
        entry["residual"] = rule.name;
        entry["count"] = count;
        entry["max"] = mx;
        entry["mean"] = count > 0 ? sum / count : 0.0;
        entry["gated"] = rule.gated;
        if (rule.gated) {
            const double tol = tolerance_for(cfg, rule.name);
            const bool pass = count == 0 || mx <= tol;
            entry["tolerance"] = tol;
            entry["pass"] = pass;
            if (!pass) all_pass = false;
        } else {
            entry["tolerance"] = nullptr;
            entry["pass"] = true;
        }
        checks_json.push_back(entry);
    }

    if (ctx.has("einstein")) {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : records)
            if (r.error.empty() && std::isfinite(r.scal)) {
                sum += r.scal;
                ++count;
            }
        json entry;
        entry["check"] = "einstein";
        entry["residual"] = "scal_mean";
        entry["count"] = count;
        entry["max"] = count > 0 ? sum / count : 0.0;
        entry["mean"] = count > 0 ? sum / count : 0.0;
        entry["gated"] = false;
        entry["tolerance"] = nullptr;
        entry["pass"] = true;
        checks_json.push_back(entry);
    }

    if (failed_points > 0) all_pass = false;

    json points_json = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PointRecord& r = records[i];
        json pj;
        pj["index"] = static_cast<int>(i);
        pj["x"] = r.p.x;
        pj["y"] = r.p.y;
        if (std::isfinite(r.F)) pj["F"] = r.F;
        if (std::isfinite(r.scal)) pj["scal"] = r.scal;
        pj["residuals"] = r.values;
        if (!r.error.empty())
            pj["error"] = r.error;
        else
            pj["error"] = nullptr;
        points_json.push_back(pj);
    }

    const auto t1 = std::chrono::steady_clock::now();
    json report;
    report["schema"] = kReportSchemaId;
    report["tool_version"] = kToolVersion;
    report["config"] = cfg.echo();
    report["metric_label"] = ctx.target->label;
    report["points"] = points_json;
    report["summary"] = json{{"pass", all_pass},
                             {"points", static_cast<int>(records.size())},
                             {"points_failed", failed_points},
                             {"excluded", excluded},
                             {"checks", checks_json}};
    report["timing_ms"] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();

    ScanOutcome out;
    out.exit_code = all_pass ? 0 : 1;
    out.report = std::move(report);
    return out;
}

namespace {

std::string resolve_output_path(const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("FINSLER_OUTPUT_DIR"); dir && *dir)
            p = fs::path(dir) / p;
    }
    return p.string();
}

void write_csv(std::ostream& os, const json& report) {
    std::set<std::string> names;
    for (const auto& pt : report.at("points"))
        for (auto it = pt.at("residuals").begin(); it != pt.at("residuals").end(); ++it)
            names.insert(it.key());

    std::size_t nx = 0, ny = 0;
    if (!report.at("points").empty()) {
        nx = report.at("points").front().at("x").size();
        ny = report.at("points").front().at("y").size();
    }
    os << "index";
    for (std::size_t i = 0; i < nx; ++i) os << ",x" << i;
    for (std::size_t i = 0; i < ny; ++i) os << ",y" << i;
    os << ",F,scal";
    for (const auto& n : names) os << ',' << n;
    os << ",error\n";
    for (const auto& pt : report.at("points")) {
        os << pt.at("index").get<int>();
        for (const auto& v : pt.at("x")) os << ',' << v.get<double>();
        for (const auto& v : pt.at("y")) os << ',' << v.get<double>();
        os << ',';
        if (pt.contains("F")) os << pt.at("F").get<double>();
        os << ',';
        if (pt.contains("scal")) os << pt.at("scal").get<double>();
        for (const auto& n : names) {
            os << ',';
            if (pt.at("residuals").contains(n))
                os << pt.at("residuals").at(n).get<double>();
        }
        os << ',';
        if (!pt.at("error").is_null()) {
            std::string e = pt.at("error").get<std::string>();
            std::replace(e.begin(), e.end(), ',', ';');
            os << '"' << e << '"';
        }
        os << '\n';
    }
}

}  // namespace

void write_report(const json& report, const OutputSpec& output) {
    const bool csv = output.format == "csv";
    if (output.path.empty()) {
        if (csv)
            write_csv(std::cout, report);
        else
            std::cout << report.dump(2) << '\n';
        return;
    }
    const std::string path = resolve_output_path(output.path);
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output path '" + path + "'");
    if (csv)
        write_csv(os, report);
    else
        os << report.dump(2) << '\n';
    if (!os.good()) throw ConfigError("failed writing output path '" + path + "'");
}

}  // namespace finsler
