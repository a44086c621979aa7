#include <doctest.h>

#include <cmath>
#include <numbers>

#include "finsler/conformal.hpp"
#include "finsler/finite_difference.hpp"
#include "finsler/oracle.hpp"
#include "finsler/zoo.hpp"
#include "test_util.hpp"

using namespace finsler;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("horizontal Hessian: linear factor on flat space vanishes") {
    const FinslerMetric m = make_euclidean(3);
    const Matrix h = horizontal_hessian(m, linear_factor({0.4, -0.2, 1.0}),
                                        {{0.1, 0.2, 0.3}, {1.0, 0.5, -0.5}, 4});
    CHECK(max_abs(h) < 1e-13);
}

TEST_CASE("horizontal Hessian: phi on the cylinder equals phi'' g") {
    const CurveFunction phi = cosine_plus_constant(2.0);
    const FinslerMetric cyl = make_cylinder(make_riemannian(sphere2_field()), phi, kPi);
    const ScalarFactor phi_factor = factor_from_curve(phi);

    SampleRng rng(41);
    for (int s = 0; s < 10; ++s) {
        const PointState p = test::sample_of(cyl, rng);
        MetricEvaluation ev(cyl, p);
        const Matrix h = horizontal_hessian(ev, phi_factor);
        const double phi_dd = -std::cos(p.x[0]);
        CHECK(max_abs(Matrix(h - phi_dd * ev.fundamental())) < 1e-6);
        // torsion-free connection on a fiber-independent function: symmetric
        CHECK(max_abs(Matrix(h - h.transpose())) < 1e-8);
    }

    // independent covariant-Hessian oracle: this cylinder is the round-S3
    // chart diag(1, sin^2 t, sin^2 t sin^2 theta)
    const PointState p = test::sample_of(cyl, rng);
    MetricEvaluation ev(cyl, p);
    const Matrix h = horizontal_hessian(ev, phi_factor);
    const Matrix h_fd = covariant_hessian_fd(
        s3_chart_field(), [](const std::vector<double>& x) {
            return std::cos(x[0]) + 2.0;
        },
        p.x);
    CHECK(max_abs(Matrix(h - h_fd)) < 1e-7);

    // at t = pi/2 the factor has an inflection: Hessian vanishes
    const Matrix h0 = horizontal_hessian(
        cyl, phi_factor, {{kPi / 2, kPi / 3, 1.0}, {0.4, 0.3, 0.8}, 4});
    CHECK(max_abs(h0) < 1e-10);
}

TEST_CASE("gradient and Laplacian") {
    const FinslerMetric m = make_euclidean(3);
    const PointState p{{0.2, -0.1, 0.5}, {0.3, 1.0, -0.4}, 4};
    {
        const GradientReport r = laplacian_and_gradient(m, constant_factor(3.0), p);
        CHECK(max_abs(r.grad_lower) == 0.0);
        CHECK(r.norm_sq == 0.0);
        CHECK(r.laplacian == 0.0);
    }
    {
        const GradientReport r =
            laplacian_and_gradient(m, linear_factor({1.0, 0.0, 0.0}), p);
        CHECK(r.grad_lower(0) == doctest::Approx(1.0));
        CHECK(r.grad_lower(1) == doctest::Approx(0.0));
        CHECK(r.norm_sq == doctest::Approx(1.0));
        CHECK(std::abs(r.laplacian) < 1e-12);
    }
    {
        // cylinder: lap(phi) = tr(phi'' g g^-1) = n phi''
        const CurveFunction phi = cosine_plus_constant(2.0);
        const FinslerMetric cyl =
            make_cylinder(make_riemannian(sphere2_field()), phi, kPi);
        const PointState q{{1.1, 0.8, 2.0}, {0.5, -0.3, 0.7}, 4};
        const GradientReport r =
            laplacian_and_gradient(cyl, factor_from_curve(phi), q);
        CHECK(r.laplacian == doctest::Approx(3.0 * -std::cos(1.1)).epsilon(1e-6));
    }
}

TEST_CASE("B-map: zero for constant factors, fd cross-check on Randers") {
    {
        const FinslerMetric m = make_randers({0.3, 0.2, 0.1});
        const PointState p{{0.1, 0.2, -0.3}, {0.8, -0.4, 0.5}, 4};
        MetricEvaluation ev(m, p);
        CHECK(max_abs(b_map(ev, constant_factor(1.5))) == 0.0);
    }
    {
        const FinslerMetric m = make_randers({0.3, 0.2, 0.1});
        const ScalarFactor u = linear_factor({1.0, 0.0, 0.0});
        const PointState p{{0.1, 0.2, -0.3}, {0.8, -0.4, 0.5}, 4};
        MetricEvaluation ev(m, p);
        const Matrix b = b_map(ev, u);
        const double f_val = ev.f_value();

        const std::vector<double> pt = {p.x[0], p.x[1], p.x[2],
                                        p.y[0], p.y[1], p.y[2]};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                // du has only the r = 0 component
                const int r = 0;
                RealFunction t_ir = [&m, i, r](std::span<const double> q) {
                    PointState pp{{q[0], q[1], q[2]}, {q[3], q[4], q[5]}, 2};
                    MetricEvaluation e(m, pp);
                    return e.f2_jet().value() * e.fundamental_inverse()(i, r) -
                           2.0 * q[static_cast<std::size_t>(3 + i)] *
                               q[static_cast<std::size_t>(3 + r)];
                };
                std::vector<int> idx = {0, 0, 0, 0, 0, 0};
                idx[static_cast<std::size_t>(3 + j)] = 1;
                const double fd = fd_partial(t_ir, pt, MultiIndex(idx));
                CHECK(test::rel_diff(b(i, j), fd / (2.0 * f_val)) < 1e-7);
            }
    }
}

TEST_CASE("inverse-metric fiber derivative matches -g^-1 (dg/dy) g^-1") {
    const FinslerMetric m = make_randers({0.3, 0.2, 0.1});
    const PointState p{{0.1, -0.2, 0.4}, {0.9, -0.3, 0.4}, 4};
    MetricEvaluation ev(m, p);
    const Matrix& ginv = ev.fundamental_inverse();
    for (int q = 0; q < 3; ++q) {
        Matrix dg(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                dg(a, b) = ev.g_jet(a, b).derivative(3 + q).value();
        const Matrix expected = -ginv * dg * ginv;
        for (int i = 0; i < 3; ++i)
            for (int r = 0; r < 3; ++r)
                CHECK(test::rel_diff(ev.g_inv_jet(i, r).derivative(3 + q).value(),
                                     expected(i, r)) < 1e-12);
    }
}

TEST_CASE("preservation residual for u = -log(phi) on the cylinder is reported") {
    const CurveFunction phi = cosine_plus_constant(2.0);
    const FinslerMetric cyl = make_cylinder(make_riemannian(sphere2_field()), phi, kPi);
    const ScalarFactor u = negative_log_factor_from_curve(phi);
    SampleRng rng(49);
    for (int s = 0; s < 5; ++s) {
        const PointState p = test::sample_of(cyl, rng);
        MetricEvaluation ev(cyl, p);
        const Matrix res = ee9_residual(ev, u);
        CHECK(std::isfinite(max_abs(res)));  // reported data, no asserted value
        // the equivalent proportional form in phi itself does hold
        const Matrix h = horizontal_hessian(ev, factor_from_curve(phi));
        const double f = proportionality_factor(ev, factor_from_curve(phi));
        CHECK(max_abs(Matrix(h - f * ev.fundamental())) < 1e-6);
    }
}

TEST_CASE("criterion Cartan term vanishes on Riemannian metrics") {
    SampleRng rng(42);
    const FinslerMetric m = make_riemannian(s3_chart_field());
    const ScalarFactor u = linear_factor({0.3, -0.1, 0.2});
    for (int s = 0; s < 10; ++s) {
        const PointState p = test::sample_of(m, rng);
        MetricEvaluation ev(m, p);
        CHECK(std::abs(ee9_cartan_term(ev, u)) <= 1e-10);
    }
}

TEST_CASE("criterion residual: constant factors solve the equation exactly") {
    SampleRng rng(43);
    for (const FinslerMetric& m : {make_euclidean(3), make_randers({0.4, 0.2, 0.1}),
                                   make_warped_sphere_example(2.0).warped.metric}) {
        for (int s = 0; s < 5; ++s) {
            const PointState p = test::sample_of(m, rng);
            const Matrix res = ee9_residual(m, constant_factor(0.8), p);
            CHECK(max_abs(res) <= 1e-12);
        }
    }
}

TEST_CASE("criterion residual: dimension 2 is rejected, not special-cased") {
    const FinslerMetric m = make_riemannian(sphere2_field());
    CHECK_THROWS_AS(
        ee9_residual(m, constant_factor(1.0), {{kPi / 3, 1.0}, {0.4, 0.8}, 4}),
        std::domain_error);
}

TEST_CASE("criterion residual: Riemannian reduction matches direct evaluation") {
    SampleRng rng(44);
    const FinslerMetric m = make_riemannian(s3_chart_field());
    const ScalarFactor u = linear_factor({0.2, 0.1, -0.3});
    for (int s = 0; s < 5; ++s) {
        const PointState p = test::sample_of(m, rng);
        MetricEvaluation ev(m, p);
        const Matrix res = ee9_residual(ev, u);

        const Matrix h = horizontal_hessian(ev, u);
        const GradientReport gr = laplacian_and_gradient(ev, u);
        const Matrix reduced =
            h - (1.0 / 3.0) * (gr.laplacian - gr.norm_sq) * ev.fundamental() -
            gr.grad_lower * gr.grad_lower.transpose();
        CHECK(max_abs(Matrix(res - reduced)) < 1e-10);
    }
}

TEST_CASE("cylinder proportionality: grad grad phi = f g with the stated f") {
    const CurveFunction phi = cosine_plus_constant(2.0);
    const FinslerMetric cyl = make_cylinder(make_riemannian(sphere2_field()), phi, kPi);
    const ScalarFactor phi_factor = factor_from_curve(phi);
    SampleRng rng(45);
    for (int s = 0; s < 10; ++s) {
        const PointState p = test::sample_of(cyl, rng);
        MetricEvaluation ev(cyl, p);
        const Matrix h = horizontal_hessian(ev, phi_factor);
        const double f = proportionality_factor(ev, phi_factor);
        CHECK(max_abs(Matrix(h - f * ev.fundamental())) < 1e-6);
    }
}

TEST_CASE("trace-free transform gap: trivial factor gives zero") {
    const ConformalPair pair =
        make_conformal(make_riemannian(s3_chart_field()), constant_factor(0.0));
    SampleRng rng(46);
    for (int s = 0; s < 5; ++s) {
        const PointState p = test::sample_of(pair.base, rng);
        CHECK(max_abs(eq122b_gap(pair, p)) < 1e-10);
    }
}

TEST_CASE("trace-free transform gap: homothety reported, not asserted") {
    const ConformalPair pair =
        make_conformal(make_riemannian(s3_chart_field()), constant_factor(0.5));
    SampleRng rng(47);
    const PointState p = test::sample_of(pair.base, rng);
    const Matrix gap = eq122b_gap(pair, p);
    CHECK(std::isfinite(max_abs(gap)));  // diagnostic only
}

TEST_CASE("trace-free transform gap: Riemannian base, side-by-side with oracle") {
    const FinslerMetric base = make_euclidean(3);
    const ScalarFactor u = linear_factor({0.1, 0.0, 0.0});
    const ConformalPair pair = make_conformal(base, u);
    SampleRng rng(48);
    const PointState p = test::sample_of(base, rng);

    // the deformed metric is Riemannian; its trace-free Ricci must agree
    // with the classical one computed by the oracle on e^{2u} delta
    MetricEvaluation def_ev(pair.deformed, p);
    const RiemannOracleReport rep =
        riemann_ricci_fd(conformal_field(euclidean_field(3), u), p.x);
    const Matrix e_oracle =
        rep.ricci - (rep.scal / 3.0) * conformal_field(euclidean_field(3), u)
                                           .g_plain(p.x);
    CHECK(max_abs(Matrix(def_ev.einstein().efree - e_oracle)) < 1e-5);

    // the gap itself is reported data
    const Matrix gap = eq122b_gap(pair, p);
    CHECK(std::isfinite(max_abs(gap)));

    // and is fiber independent for a Riemannian base
    Matrix first;
    for (int k = 0; k < 10; ++k) {
        PointState q = p;
        q.y = SampleRng(100 + static_cast<std::uint64_t>(k)).unit_vector(3);
        const Matrix g = eq122b_gap(pair, q);
        if (k == 0)
            first = g;
        else
            CHECK(max_abs(Matrix(g - first)) < 1e-6);
    }
}

TEST_CASE("conformal diagnostics aggregate matches the individual operations") {
    const FinslerMetric base = make_randers({0.3, 0.2, 0.1});
    const ScalarFactor u = linear_factor({0.2, -0.1, 0.4});
    const ConformalPair pair = make_conformal(base, u);
    const PointState p{{0.1, -0.2, 0.3}, {0.7, 0.4, -0.5}, 4};

    const ConformalDiagnostics d = conformal_diagnostics(pair, p);
    MetricEvaluation ev(base, p);
    CHECK(max_abs(Matrix(d.hess_u - horizontal_hessian(ev, u))) == 0.0);
    CHECK(max_abs(Matrix(d.bmap - b_map(ev, u))) == 0.0);
    CHECK(max_abs(Matrix(d.ee9 - ee9_residual(ev, u))) == 0.0);
    CHECK(d.cartan_term == ee9_cartan_term(ev, u));
    const GradientReport gr = laplacian_and_gradient(ev, u);
    CHECK(d.grad_norm_sq == gr.norm_sq);
    CHECK(d.laplacian_h == gr.laplacian);
    CHECK(max_abs(Matrix(d.eq122b - eq122b_gap(pair, p))) == 0.0);
}

TEST_CASE("cylinder identity is direction-independent at a fixed base point") {
    const CurveFunction phi = cosine_plus_constant(2.0);
    const FinslerMetric cyl = make_cylinder(make_riemannian(sphere2_field()), phi, kPi);
    const ScalarFactor phi_factor = factor_from_curve(phi);
    const std::vector<double> x = {1.3, 0.9, 2.5};
    Matrix first;
    for (int k = 0; k < 10; ++k) {
        PointState p{x, SampleRng(60 + static_cast<std::uint64_t>(k)).unit_vector(3), 4};
        MetricEvaluation ev(cyl, p);
        const Matrix h = horizontal_hessian(ev, phi_factor);
        if (k == 0)
            first = h;
        else
            CHECK(max_abs(Matrix(h - first)) < 1e-6);
    }
}

TEST_CASE("cylinder check: sphere factor, flat factor, empty scan") {
    {
        const CylinderReport rep = cylinder_check(
            make_riemannian(sphere2_field()), cosine_plus_constant(2.0), kPi, 50, 7);
        CHECK(rep.samples_used == 50);
        CHECK(rep.max_hessian_residual <= 1e-6);
        CHECK(rep.max_form_residual <= 1e-6);
        CHECK(rep.max_deformed_einstein <= 1e-6);  // the cylinder is round S^3
    }
    {
        // linear phi: phi'' = 0 and the product is flat
        const CylinderReport rep = cylinder_check(
            make_euclidean(2), linear_curve(1.0, 2.0), 1.0, 20, 7);
        CHECK(rep.samples_used == 20);
        CHECK(rep.max_hessian_residual <= 1e-8);
    }
    {
        const CylinderReport rep = cylinder_check(
            make_riemannian(sphere2_field()), cosine_plus_constant(2.0), kPi, 0, 7);
        CHECK(rep.samples_used == 0);
        CHECK(rep.samples_requested == 0);
    }
}
