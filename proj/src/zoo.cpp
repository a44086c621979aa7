#include "finsler/zoo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace finsler {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleMargin = 0.2;  // keep samples away from chart poles

BoxDomain unit_box(int n, double lo = -1.0, double hi = 1.0) {
    BoxDomain b;
    b.ranges.assign(static_cast<std::size_t>(n), {lo, hi});
    return b;
}

}  // namespace

RiemannianField euclidean_field(int n) {
    RiemannianField f;
    f.dim = n;
    f.label = "euclidean" + std::to_string(n);
    f.chart = unit_box(n);
    f.g_jet = [n](std::span<const JetScalar> x) {
        std::vector<JetScalar> g;
        g.reserve(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                g.push_back(constant_like(x[0], i == j ? 1.0 : 0.0));
        return g;
    };
    f.g_plain = [n](const std::vector<double>&) {
        return Matrix(Matrix::Identity(n, n));
    };
    return f;
}

RiemannianField sphere2_field() {
    RiemannianField f;
    f.dim = 2;
    f.label = "sphere2";
    f.chart.ranges = {{kPoleMargin, kPi - kPoleMargin}, {0.0, 2.0 * kPi}};
    f.g_jet = [](std::span<const JetScalar> x) {
        const JetScalar s = sin(x[0]);
        const JetScalar zero = constant_like(x[0], 0.0);
        return std::vector<JetScalar>{constant_like(x[0], 1.0), zero, zero, s * s};
    };
    f.g_plain = [](const std::vector<double>& x) {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = 1.0;
        g(1, 1) = std::sin(x[0]) * std::sin(x[0]);
        return g;
    };
    return f;
}

RiemannianField hyperbolic2_field() {
    RiemannianField f;
    f.dim = 2;
    f.label = "hyperbolic2";
    f.chart.ranges = {{-1.0, 1.0}, {0.5, 2.0}};
    f.g_jet = [](std::span<const JetScalar> x) {
        const JetScalar w = constant_like(x[1], 1.0) / (x[1] * x[1]);
        const JetScalar zero = constant_like(x[1], 0.0);
        return std::vector<JetScalar>{w, zero, zero, w};
    };
    f.g_plain = [](const std::vector<double>& x) {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = g(1, 1) = 1.0 / (x[1] * x[1]);
        return g;
    };
    return f;
}

RiemannianField s3_chart_field() {
    RiemannianField f;
    f.dim = 3;
    f.label = "s3chart";
    f.chart.ranges = {{kPoleMargin, kPi - kPoleMargin},
                      {kPoleMargin, kPi - kPoleMargin},
                      {0.0, 2.0 * kPi}};
    f.g_jet = [](std::span<const JetScalar> x) {
        const JetScalar st = sin(x[0]);
        const JetScalar sth = sin(x[1]);
        const JetScalar zero = constant_like(x[0], 0.0);
        std::vector<JetScalar> g(9, zero);
        g[0] = constant_like(x[0], 1.0);
        g[4] = st * st;
        g[8] = st * st * sth * sth;
        return g;
    };
    f.g_plain = [](const std::vector<double>& x) {
        Matrix g = Matrix::Zero(3, 3);
        const double st = std::sin(x[0]);
        const double sth = std::sin(x[1]);
        g(0, 0) = 1.0;
        g(1, 1) = st * st;
        g(2, 2) = st * st * sth * sth;
        return g;
    };
    return f;
}

FinslerMetric make_euclidean(int n) {
    if (n < 1) throw std::invalid_argument("make_euclidean: dimension must be >= 1");
    FinslerMetric m;
    m.dim = n;
    m.label = "euclidean" + std::to_string(n);
    m.sampler.x_box = unit_box(n);
    m.evaluate_squared = [](std::span<const JetScalar>, std::span<const JetScalar> y) {
        JetScalar q = y[0] * y[0];
        for (std::size_t i = 1; i < y.size(); ++i) q += y[i] * y[i];
        return q;
    };
    complete_metric(m);
    return m;
}

FinslerMetric make_riemannian(const RiemannianField& field) {
    FinslerMetric m;
    m.dim = field.dim;
    m.label = field.label;
    m.sampler.x_box = field.chart;
    auto g_jet = field.g_jet;
    const int n = field.dim;
    // F^2 = g_ij(x) y^i y^j
    m.evaluate_squared = [g_jet, n](std::span<const JetScalar> x,
                                    std::span<const JetScalar> y) {
        const std::vector<JetScalar> g = g_jet(x);
        JetScalar q = constant_like(y[0], 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                q += g[static_cast<std::size_t>(i) * n + j] * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
        return q;
    };
    complete_metric(m);
    return m;
}

FinslerMetric make_randers(std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    if (n < 1) throw std::invalid_argument("make_randers: b must be nonempty");
    double norm_sq = 0.0;
    for (double c : b) norm_sq += c * c;
    if (!(norm_sq < 1.0)) {
        std::ostringstream os;
        os << "Randers requires |b| < 1 (got |b| = " << std::sqrt(norm_sq) << ")";
        throw std::invalid_argument(os.str());
    }
    FinslerMetric m;
    m.dim = n;
    m.label = "randers" + std::to_string(n);
    m.sampler.x_box = unit_box(n);
    m.evaluate = [b](std::span<const JetScalar>, std::span<const JetScalar> y) {
        JetScalar q = y[0] * y[0];
        for (std::size_t i = 1; i < y.size(); ++i) q += y[i] * y[i];
        JetScalar f = sqrt(q);
        for (std::size_t i = 0; i < y.size(); ++i) f += y[i] * b[i];
        return f;
    };
    complete_metric(m);
    return m;
}

WarpFunction constant_warp(double value) {
    WarpFunction w;
    w.label = "const(" + std::to_string(value) + ")";
    w.eval = [value](std::span<const JetScalar> x) {
        return constant_like(x[0], value);
    };
    w.plain = [value](const std::vector<double>&) { return value; };
    return w;
}

WarpFunction sine_warp() {
    WarpFunction w;
    w.label = "sin(t)";
    w.eval = [](std::span<const JetScalar> x) { return sin(x[0]); };
    w.plain = [](const std::vector<double>& x) { return std::sin(x[0]); };
    return w;
}

WarpFunction exp_linear_warp(std::vector<double> coeffs) {
    WarpFunction w;
    w.label = "exp(linear)";
    w.eval = [coeffs](std::span<const JetScalar> x) {
        JetScalar acc = constant_like(x[0], 0.0);
        for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i)
            acc += x[i] * coeffs[i];
        return exp(acc);
    };
    w.plain = [coeffs](const std::vector<double>& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i)
            acc += coeffs[i] * x[i];
        return std::exp(acc);
    };
    return w;
}

WarpedProductMetric make_warped(FinslerMetric first, FinslerMetric second,
                                WarpFunction warp) {
    const int n1 = first.dim;
    const int n2 = second.dim;
    WarpedProductMetric w;
    w.metric.dim = n1 + n2;
    w.metric.label = first.label + " x_{" + warp.label + "} " + second.label;
    w.metric.sampler.x_box.ranges = first.sampler.x_box.ranges;
    w.metric.sampler.x_box.ranges.insert(w.metric.sampler.x_box.ranges.end(),
                                         second.sampler.x_box.ranges.begin(),
                                         second.sampler.x_box.ranges.end());

    auto f1 = first.evaluate_squared;
    auto f2 = second.evaluate_squared;
    auto fw = warp.eval;
    w.metric.evaluate_squared = [f1, f2, fw, n1](std::span<const JetScalar> x,
                                                 std::span<const JetScalar> y) {
        const auto xn1 = static_cast<std::size_t>(n1);
        const JetScalar warp_val = fw(x.subspan(0, xn1));
        if (!(warp_val.value() > 0.0))
            throw std::domain_error("warped product: warp function not positive");
        return f1(x.subspan(0, xn1), y.subspan(0, xn1)) +
               warp_val * warp_val * f2(x.subspan(xn1), y.subspan(xn1));
    };
    complete_metric(w.metric);

    // fail fast on a sign-flipped warp before any scan touches the metric
    SampleRng rng(2);
    for (int k = 0; k < 16; ++k) {
        const PointState p = w.metric.sampler.draw(rng, 1);
        std::vector<double> x1(p.x.begin(), p.x.begin() + n1);
        if (!(warp.plain(x1) > 0.0)) {
            std::ostringstream os;
            os << "warp function " << warp.label << " is not positive at a sample";
            throw std::invalid_argument(os.str());
        }
    }

    w.first = std::move(first);
    w.second = std::move(second);
    w.warp = std::move(warp);
    return w;
}

ConformalPair make_conformal(FinslerMetric base, ScalarFactor u) {
    ConformalPair pair;
    pair.deformed.dim = base.dim;
    pair.deformed.label = "e^{" + u.label + "} " + base.label;
    pair.deformed.sampler = base.sampler;
    auto f = base.evaluate;
    auto f2 = base.evaluate_squared;
    auto ue = u.eval;
    pair.deformed.evaluate = [f, ue](std::span<const JetScalar> x,
                                     std::span<const JetScalar> y) {
        return exp(ue(x)) * f(x, y);
    };
    pair.deformed.evaluate_squared = [f2, ue](std::span<const JetScalar> x,
                                              std::span<const JetScalar> y) {
        return exp(ue(x) * 2.0) * f2(x, y);
    };
    pair.base = std::move(base);
    pair.factor = std::move(u);
    return pair;
}

WarpedSphereExample make_warped_sphere_example(double c) {
    if (!(c > 1.0))
        throw std::invalid_argument("warped sphere example requires c > 1");
    FinslerMetric interval = make_euclidean(1);
    interval.label = "interval(0,pi)";
    interval.sampler.x_box.ranges = {{kPoleMargin, kPi - kPoleMargin}};

    WarpedSphereExample ex;
    ex.c = c;
    ex.phi = cosine_plus_constant(c);
    // |phi'| = sin t warps the product; only f^2 enters the metric, and
    // f = sin t matches g = dt^2 + sin^2 t (dz1^2 + dz2^2).
    ex.warped = make_warped(std::move(interval),
                            make_riemannian(sphere2_field()), sine_warp());
    ex.warped.metric.label = "warped_s3(c=" + std::to_string(c) + ")";
    return ex;
}

WarpedProductMetric make_warped_hyperbolic_example() {
    auto w = make_warped(make_riemannian(hyperbolic2_field()), make_euclidean(1),
                         exp_linear_warp({0.3}));
    w.metric.label = "warped_hyperbolic";
    return w;
}

}  // namespace finsler
