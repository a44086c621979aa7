#include "finsler/metric.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace finsler {

double SampleRng::uniform01() {
    // 53 uniform bits; stdlib distributions are avoided so that a seed is
    // reproducible across standard library implementations.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double SampleRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double SampleRng::normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> SampleRng::unit_vector(int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (;;) {
        double norm_sq = 0.0;
        for (auto& c : v) {
            c = normal();
            norm_sq += c * c;
        }
        if (norm_sq > 1e-24) {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& c : v) c *= inv;
            return v;
        }
    }
}

PointState Sampler::draw(SampleRng& rng, int order) const {
    PointState p;
    p.order = order;
    p.x.reserve(x_box.ranges.size());
    for (const auto& [lo, hi] : x_box.ranges) p.x.push_back(rng.uniform(lo, hi));
    p.y = rng.unit_vector(static_cast<int>(x_box.ranges.size()));
    for (auto& c : p.y) c *= y_scale;
    return p;
}

double FinslerMetric::value(const std::vector<double>& x,
                            const std::vector<double>& y) const {
    const auto jets = seed_variables(x, y, 1);
    const std::span<const JetScalar> all(jets);
    return evaluate(all.subspan(0, static_cast<std::size_t>(dim)),
                    all.subspan(static_cast<std::size_t>(dim)))
        .value();
}

void complete_metric(FinslerMetric& m) {
    if (!m.evaluate && !m.evaluate_squared)
        throw std::invalid_argument("metric has no evaluation callback");
    if (!m.evaluate_squared) {
        auto f = m.evaluate;
        m.evaluate_squared = [f](std::span<const JetScalar> x,
                                 std::span<const JetScalar> y) {
            const JetScalar v = f(x, y);
            return v * v;
        };
    }
    if (!m.evaluate) {
        auto f2 = m.evaluate_squared;
        m.evaluate = [f2](std::span<const JetScalar> x,
                          std::span<const JetScalar> y) {
            return sqrt(f2(x, y));
        };
    }
}

ScalarFactor constant_factor(double value) {
    ScalarFactor u;
    u.label = "const(" + std::to_string(value) + ")";
    u.eval = [value](std::span<const JetScalar> x) {
        return constant_like(x[0], value);
    };
    u.plain = [value](const std::vector<double>&) { return value; };
    return u;
}

ScalarFactor linear_factor(std::vector<double> coeffs) {
    ScalarFactor u;
    u.label = "linear";
    u.eval = [coeffs](std::span<const JetScalar> x) {
        JetScalar acc = constant_like(x[0], 0.0);
        for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i)
            acc += x[i] * coeffs[i];
        return acc;
    };
    u.plain = [coeffs](const std::vector<double>& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i)
            acc += coeffs[i] * x[i];
        return acc;
    };
    return u;
}

ScalarFactor factor_from_curve(CurveFunction f, int coordinate) {
    ScalarFactor u;
    u.label = f.label;
    auto value = f.value;
    u.eval = [value, coordinate](std::span<const JetScalar> x) {
        return value(x[static_cast<std::size_t>(coordinate)]);
    };
    auto plain = f.plain;
    u.plain = [plain, coordinate](const std::vector<double>& x) {
        return plain(x[static_cast<std::size_t>(coordinate)]);
    };
    return u;
}

namespace {

ScalarFactor signed_log_factor(CurveFunction f, int coordinate, double sign) {
    ScalarFactor u;
    u.label = (sign < 0 ? "-log(" : "log(") + f.label + ")";
    auto value = f.value;
    u.eval = [value, coordinate, sign](std::span<const JetScalar> x) {
        return log(value(x[static_cast<std::size_t>(coordinate)])) * sign;
    };
    auto plain = f.plain;
    u.plain = [plain, coordinate, sign](const std::vector<double>& x) {
        return sign * std::log(plain(x[static_cast<std::size_t>(coordinate)]));
    };
    return u;
}

}  // namespace

ScalarFactor log_factor_from_curve(CurveFunction f, int coordinate) {
    return signed_log_factor(std::move(f), coordinate, 1.0);
}

ScalarFactor negative_log_factor_from_curve(CurveFunction f, int coordinate) {
    return signed_log_factor(std::move(f), coordinate, -1.0);
}

CurveFunction cosine_plus_constant(double c) {
    CurveFunction f;
    f.label = "cos+" + std::to_string(c);
    f.value = [c](const JetScalar& t) { return cos(t) + c; };
    f.derivative = [](const JetScalar& t) { return -sin(t); };
    f.plain = [c](double t) { return std::cos(t) + c; };
    return f;
}

CurveFunction linear_curve(double slope, double intercept) {
    CurveFunction f;
    f.label = "linear";
    f.value = [slope, intercept](const JetScalar& t) {
        return t * slope + intercept;
    };
    f.derivative = [slope](const JetScalar& t) {
        return constant_like(t, slope);
    };
    f.plain = [slope, intercept](double t) { return slope * t + intercept; };
    return f;
}

}  // namespace finsler
