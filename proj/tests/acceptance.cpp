// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Every tolerance is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/core.hpp"
#include "finsler/oracle.hpp"
#include "finsler/scan.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Harness {
    int failures = 0;

    void criterion(int num, const std::string& name, bool pass,
                   const std::string& detail) {
        std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", num,
                    name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }

    template <typename Fn>
    void run(int num, const std::string& name, Fn&& fn) {
        try {
            auto [pass, detail] = fn();
            criterion(num, name, pass, detail);
        } catch (const std::exception& e) {
            criterion(num, name, false, std::string("exception: ") + e.what());
        }
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

std::vector<FinslerMetric> zoo_metrics() {
    return {
        make_euclidean(2),
        make_euclidean(3),
        make_riemannian(sphere2_field()),
        make_riemannian(hyperbolic2_field()),
        make_riemannian(s3_chart_field()),
        make_randers({0.5, 0.0}),
        make_randers({0.4, 0.2, 0.1}),
        make_warped_sphere_example(2.0).warped.metric,
        make_warped_hyperbolic_example().metric,
    };
}

// 1. |F(x,cy) - c F(x,y)|/F <= 1e-9 for c in {0.5, 2, 7} and
//    |g_ij y^i y^j - F^2|/F^2 <= 1e-8, 100 seeded samples per zoo metric
std::pair<bool, std::string> homogeneity_euler() {
    double worst_h = 0.0, worst_e = 0.0;
    for (const FinslerMetric& m : zoo_metrics()) {
        SampleRng rng(101);
        for (int s = 0; s < 100; ++s) {
            const PointState p = m.sampler.draw(rng, 2);
            const double f = m.value(p.x, p.y);
            for (double c : {0.5, 2.0, 7.0}) {
                std::vector<double> cy = p.y;
                for (auto& v : cy) v *= c;
                worst_h = std::max(worst_h,
                                   std::abs(m.value(p.x, cy) - c * f) / f);
            }
            MetricEvaluation ev(m, p);
            const Matrix& g = ev.fundamental();
            double quad = 0.0;
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j)
                    quad += g(i, j) * p.y[static_cast<std::size_t>(i)] *
                            p.y[static_cast<std::size_t>(j)];
            worst_e = std::max(worst_e, std::abs(quad - f * f) / (f * f));
        }
    }
    return {worst_h <= 1e-9 && worst_e <= 1e-8,
            "homogeneity max " + fmt(worst_h) + " <= 1e-9, euler max " +
                fmt(worst_e) + " <= 1e-8"};
}

// 2. Cartan: total symmetry and A_ijk y^k = 0 within 1e-9 on Randers
//    samples; |A|_inf <= 1e-10 on every Riemannian wrapper
std::pair<bool, std::string> cartan_suite() {
    double worst_sym = 0.0, worst_y = 0.0, worst_riem = 0.0;
    for (const FinslerMetric& m : {make_randers({0.5, 0.0}),
                                   make_randers({0.4, 0.2, 0.1})}) {
        SampleRng rng(102);
        for (int s = 0; s < 100; ++s) {
            const PointState p = m.sampler.draw(rng, 3);
            MetricEvaluation ev(m, p);
            const Tensor3 a = ev.cartan();
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j) {
                    double contr = 0.0;
                    for (int k = 0; k < m.dim; ++k) {
                        worst_sym = std::max(
                            worst_sym, std::abs(a(i, j, k) - a(j, i, k)));
                        worst_sym = std::max(
                            worst_sym, std::abs(a(i, j, k) - a(i, k, j)));
                        contr += a(i, j, k) * p.y[static_cast<std::size_t>(k)];
                    }
                    worst_y = std::max(worst_y, std::abs(contr));
                }
        }
    }
    for (const auto& field :
         {euclidean_field(2), sphere2_field(), hyperbolic2_field(), s3_chart_field()}) {
        const FinslerMetric m = make_riemannian(field);
        SampleRng rng(103);
        for (int s = 0; s < 50; ++s) {
            MetricEvaluation ev(m, m.sampler.draw(rng, 3));
            worst_riem = std::max(worst_riem, max_abs(ev.cartan()));
        }
    }
    return {worst_sym <= 1e-9 && worst_y <= 1e-9 && worst_riem <= 1e-10,
            "symmetry " + fmt(worst_sym) + ", y-contraction " + fmt(worst_y) +
                " <= 1e-9; Riemannian |A| " + fmt(worst_riem) + " <= 1e-10"};
}

// 3. Connection: Gamma lower-index symmetry exact; horizontal compatibility
//    <= 1e-7; N - Gamma.y <= 1e-8, 100 samples per metric
std::pair<bool, std::string> connection_suite() {
    double worst_sym = 0.0, worst_compat = 0.0, worst_ng = 0.0;
    for (const FinslerMetric& m : zoo_metrics()) {
        SampleRng rng(104);
        for (int s = 0; s < 100; ++s) {
            const PointState p = m.sampler.draw(rng, 4);
            MetricEvaluation ev(m, p);
            const Tensor3 gamma = ev.chern();
            const Matrix& g = ev.fundamental();
            const Matrix n_conn = ev.nonlinear();
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j) {
                    double c = n_conn(i, j);
                    for (int k = 0; k < m.dim; ++k) {
                        worst_sym = std::max(worst_sym,
                                             std::abs(gamma(i, j, k) - gamma(i, k, j)));
                        c -= gamma(i, j, k) * p.y[static_cast<std::size_t>(k)];
                    }
                    worst_ng = std::max(worst_ng, std::abs(c));
                }
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j)
                    for (int k = 0; k < m.dim; ++k) {
                        double lhs = ev.delta_value(ev.g_jet(i, j), k);
                        for (int mm = 0; mm < m.dim; ++mm)
                            lhs -= g(mm, j) * gamma(mm, i, k) +
                                   g(i, mm) * gamma(mm, j, k);
                        worst_compat = std::max(worst_compat, std::abs(lhs));
                    }
        }
    }
    return {worst_sym == 0.0 && worst_compat <= 1e-7 && worst_ng <= 1e-8,
            "symmetry " + fmt(worst_sym) + " (exact), compatibility " +
                fmt(worst_compat) + " <= 1e-7, N-Gamma.y " + fmt(worst_ng) +
                " <= 1e-8"};
}

// 4. Riemannian oracle equivalence at 50 samples per field:
//    Gamma within 1e-6, lowered R within 1e-5, Ric and Scal within 1e-5
std::pair<bool, std::string> oracle_equivalence() {
    double worst_g = 0.0, worst_r = 0.0, worst_ric = 0.0, worst_scal = 0.0;
    for (const auto& field :
         {euclidean_field(2), sphere2_field(), hyperbolic2_field(), s3_chart_field()}) {
        const FinslerMetric m = make_riemannian(field);
        const int n = field.dim;
        SampleRng rng(105);
        for (int s = 0; s < 50; ++s) {
            const PointState p = m.sampler.draw(rng, 4);
            MetricEvaluation ev(m, p);
            const RiemannOracleReport rep = riemann_ricci_fd(field, p.x);
            const Tensor3 gamma = ev.chern();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        worst_g = std::max(
                            worst_g, std::abs(gamma(i, j, k) - rep.christoffel(i, j, k)));
            const Tensor4& r = ev.hh_curvature();
            const Matrix& g = ev.fundamental();
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            double low = 0.0;
                            for (int a = 0; a < n; ++a)
                                low += g(i, a) * r(j, a, k, l);
                            worst_r = std::max(
                                low - rep.riemann_lowered(j, i, k, l) >= 0
                                    ? low - rep.riemann_lowered(j, i, k, l)
                                    : rep.riemann_lowered(j, i, k, l) - low,
                                worst_r);
                        }
            const EinsteinResult& e = ev.einstein();
            worst_ric = std::max(worst_ric, max_abs(Matrix(e.ricci - rep.ricci)));
            worst_scal = std::max(worst_scal, std::abs(e.scal - rep.scal));
        }
    }
    return {worst_g <= 1e-6 && worst_r <= 1e-5 && worst_ric <= 1e-5 &&
                worst_scal <= 1e-5,
            "Gamma " + fmt(worst_g) + " <= 1e-6, R " + fmt(worst_r) +
                " <= 1e-5, Ric " + fmt(worst_ric) + ", Scal " + fmt(worst_scal) +
                " <= 1e-5"};
}

// 5. Einstein criterion: round S2 has Scal = 2 +- 1e-6 with residual <= 1e-8;
//    the warped S3 has Scal = 6 +- 1e-5 with residual <= 1e-6 at 20 interior
//    samples and Scal constant across samples within 1e-6
std::pair<bool, std::string> einstein_criterion() {
    double worst_s2_scal = 0.0, worst_s2_res = 0.0;
    {
        const FinslerMetric m = make_riemannian(sphere2_field());
        SampleRng rng(106);
        for (int s = 0; s < 50; ++s) {
            MetricEvaluation ev(m, m.sampler.draw(rng, 4));
            const EinsteinResult& e = ev.einstein();
            worst_s2_scal = std::max(worst_s2_scal, std::abs(e.scal - 2.0));
            worst_s2_res = std::max(worst_s2_res, e.residual);
        }
    }
    double worst_s3_scal = 0.0, worst_s3_res = 0.0, spread = 0.0;
    {
        const FinslerMetric m = make_warped_sphere_example(2.0).warped.metric;
        SampleRng rng(107);
        double lo = 1e300, hi = -1e300;
        for (int s = 0; s < 20; ++s) {
            MetricEvaluation ev(m, m.sampler.draw(rng, 4));
            const EinsteinResult& e = ev.einstein();
            worst_s3_scal = std::max(worst_s3_scal, std::abs(e.scal - 6.0));
            worst_s3_res = std::max(worst_s3_res, e.residual);
            lo = std::min(lo, e.scal);
            hi = std::max(hi, e.scal);
        }
        spread = hi - lo;
    }
    return {worst_s2_scal <= 1e-6 && worst_s2_res <= 1e-8 &&
                worst_s3_scal <= 1e-5 && worst_s3_res <= 1e-6 && spread <= 1e-6,
            "S2: |Scal-2| " + fmt(worst_s2_scal) + ", residual " + fmt(worst_s2_res) +
                "; warped S3: |Scal-6| " + fmt(worst_s3_scal) + ", residual " +
                fmt(worst_s3_res) + ", spread " + fmt(spread)};
}

// 6. Warped products: block-diagonal g within 1e-12; mixed connection
//    coefficients (d_t f / f) delta within 1e-7; cross curvature slot zero
//    within 1e-8; first-factor curvature equals the factor's own within 1e-6
std::pair<bool, std::string> warped_suite() {
    double worst_block = 0.0, worst_mixed = 0.0, worst_cross = 0.0,
           worst_factor = 0.0;
    for (const WarpedProductMetric& w :
         {make_warped_sphere_example(2.0).warped, make_warped_hyperbolic_example()}) {
        const int n1 = w.first.dim;
        const int n = w.metric.dim;
        SampleRng rng(108);
        for (int s = 0; s < 50; ++s) {
            const PointState p = w.metric.sampler.draw(rng, 4);
            MetricEvaluation ev(w.metric, p);
            const Matrix& g = ev.fundamental();
            for (int i = 0; i < n1; ++i)
                for (int a = n1; a < n; ++a)
                    worst_block = std::max(
                        {worst_block, std::abs(g(i, a)), std::abs(g(a, i))});

            const Tensor3 gamma = ev.chern();
            const JetScalar f = w.warp.eval(
                ev.x_jets().subspan(0, static_cast<std::size_t>(n1)));
            for (int i = 0; i < n1; ++i) {
                const double expected = f.derivative(i).value() / f.value();
                for (int a = n1; a < n; ++a)
                    for (int bb = n1; bb < n; ++bb)
                        worst_mixed = std::max(
                            worst_mixed,
                            std::abs(gamma(a, i, bb) - (a == bb ? expected : 0.0)));
            }

            const Tensor4& r = ev.hh_curvature();
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n1; ++i)
                    for (int k = n1; k < n; ++k)
                        for (int l = 0; l < n1; ++l) {
                            double low = 0.0;
                            for (int a = 0; a < n; ++a)
                                low += g(i, a) * r(j, a, k, l);
                            worst_cross = std::max(worst_cross, std::abs(low));
                        }

            PointState p1;
            p1.order = p.order;
            p1.x.assign(p.x.begin(), p.x.begin() + n1);
            p1.y.assign(p.y.begin(), p.y.begin() + n1);
            double y_norm = 0.0;
            for (double v : p1.y) y_norm += v * v;
            if (y_norm < 1e-12) {
                p1.y.assign(static_cast<std::size_t>(n1), 0.0);
                p1.y[0] = 1.0;
            }
            MetricEvaluation ev1(w.first, p1);
            const Tensor4& r1 = ev1.hh_curvature();
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n1; ++i)
                    for (int k = 0; k < n1; ++k)
                        for (int l = 0; l < n1; ++l)
                            worst_factor = std::max(
                                worst_factor,
                                std::abs(r(j, i, k, l) - r1(j, i, k, l)));
        }
    }
    return {worst_block <= 1e-12 && worst_mixed <= 1e-7 && worst_cross <= 1e-8 &&
                worst_factor <= 1e-6,
            "block " + fmt(worst_block) + " <= 1e-12, mixed Gamma " +
                fmt(worst_mixed) + " <= 1e-7, cross R " + fmt(worst_cross) +
                " <= 1e-8, factor R " + fmt(worst_factor) + " <= 1e-6"};
}

// 7. Conformal: constant u solves the preservation equation to 1e-12; the
//    cylinder identity grad grad phi = phi'' g holds to 1e-6 for
//    phi = cos t + 2 on (0, pi) x S2 at 50 samples; the Riemannian reduction
//    of the Cartan term is <= 1e-10
std::pair<bool, std::string> conformal_suite() {
    double worst_const = 0.0;
    for (const FinslerMetric& m : {make_euclidean(3), make_randers({0.4, 0.2, 0.1}),
                                   make_warped_sphere_example(2.0).warped.metric}) {
        SampleRng rng(109);
        for (int s = 0; s < 20; ++s) {
            const Matrix res =
                ee9_residual(m, constant_factor(0.7), m.sampler.draw(rng, 4));
            worst_const = std::max(worst_const, max_abs(res));
        }
    }

    const CylinderReport rep = cylinder_check(make_riemannian(sphere2_field()),
                                              cosine_plus_constant(2.0), kPi, 50, 110);
    const double worst_cyl = rep.max_hessian_residual;
    const bool cyl_complete = rep.samples_used == 50;

    double worst_cartan = 0.0;
    {
        const FinslerMetric m = make_riemannian(s3_chart_field());
        const ScalarFactor u = linear_factor({0.3, -0.1, 0.2});
        SampleRng rng(111);
        for (int s = 0; s < 20; ++s) {
            MetricEvaluation ev(m, m.sampler.draw(rng, 4));
            worst_cartan = std::max(worst_cartan, std::abs(ee9_cartan_term(ev, u)));
        }
    }
    return {worst_const <= 1e-12 && worst_cyl <= 1e-6 && cyl_complete &&
                worst_cartan <= 1e-10,
            "const-u residual " + fmt(worst_const) + " <= 1e-12, cylinder " +
                fmt(worst_cyl) + " <= 1e-6, Riemannian Cartan term " +
                fmt(worst_cartan) + " <= 1e-10"};
}

// 8. Determinism and the CLI contract: identical seed gives a byte-identical
//    report modulo timing; exit codes are 0 pass / 1 check failure /
//    2 config error
std::pair<bool, std::string> determinism_cli() {
    namespace fs = std::filesystem;
    bool ok = true;
    std::string detail;

    {
        ScanConfig cfg;
        cfg.metric_spec = json{{"kind", "warped_s3"}, {"params", {{"c", 2.0}}}};
        cfg.samples.count = 8;
        cfg.samples.seed = 7;
        cfg.checks = {"properties", "einstein"};
        cfg.threads = 4;
        json a = run_scan(cfg).report;
        json b = run_scan(cfg).report;
        a.erase("timing_ms");
        b.erase("timing_ms");
        if (a.dump() != b.dump()) {
            ok = false;
            detail += "report not deterministic; ";
        }
    }

    const fs::path dir = fs::temp_directory_path();
    const fs::path good = dir / "finsler_acc_good.json";
    const fs::path fail = dir / "finsler_acc_fail.json";
    const fs::path bad = dir / "finsler_acc_bad.json";
    {
        std::ofstream os(good);
        os << json{{"metric", {{"kind", "euclidean"}, {"params", {{"dim", 2}}}}},
                   {"samples", {{"count", 10}, {"seed", 1}}},
                   {"checks", {"properties"}},
                   {"output", {{"path", (dir / "finsler_acc_good_out.json").string()}}}}
                  .dump();
    }
    {
        std::ofstream os(fail);
        os << json{{"metric", {{"kind", "sphere2"}}},
                   {"samples", {{"count", 3}, {"seed", 1}}},
                   {"checks", {"einstein"}},
                   {"tolerances", {{"einstein_residual", 1e-30}}},
                   {"output", {{"path", (dir / "finsler_acc_fail_out.json").string()}}}}
                  .dump();
    }
    {
        std::ofstream os(bad);
        os << json{{"metric", {{"kind", "randers"}, {"params", {{"b", {1.2, 0.0}}}}}}}
                  .dump();
    }

    auto run_cli3 = [](const fs::path& cfg_path) {
        const std::string s = cfg_path.string();
        const char* argv[] = {"finsler", "scan", "--config", s.c_str()};
        return cli_main(4, argv);
    };
    const int code_good = run_cli3(good);
    const int code_fail = run_cli3(fail);
    const int code_bad = run_cli3(bad);
    if (code_good != 0) {
        ok = false;
        detail += "pass config exited " + std::to_string(code_good) + "; ";
    }
    if (code_fail != 1) {
        ok = false;
        detail += "failing check exited " + std::to_string(code_fail) + "; ";
    }
    if (code_bad != 2) {
        ok = false;
        detail += "invalid config exited " + std::to_string(code_bad) + "; ";
    }
    for (const auto& p : {good, fail, bad, dir / "finsler_acc_good_out.json",
                          dir / "finsler_acc_fail_out.json"})
        fs::remove(p);

    if (detail.empty()) detail = "reports byte-identical modulo timing; exits 0/1/2";
    return {ok, detail};
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    Harness h;
    h.run(1, "homogeneity and Euler identities", homogeneity_euler);
    h.run(2, "Cartan tensor suite", cartan_suite);
    h.run(3, "Chern connection suite", connection_suite);
    h.run(4, "Riemannian oracle equivalence", oracle_equivalence);
    h.run(5, "Einstein criterion on constant-curvature spheres",
          einstein_criterion);
    h.run(6, "warped product suite", warped_suite);
    h.run(7, "conformal factor suite", conformal_suite);
    h.run(8, "determinism and CLI contract", determinism_cli);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance finished in %.1fs: %s\n", secs,
                h.failures == 0 ? "ALL PASS" : "FAILURES PRESENT");
    return h.failures == 0 ? 0 : 1;
}
