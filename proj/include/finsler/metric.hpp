#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// Axis-aligned chart box for base coordinates.
struct BoxDomain {
    std::vector<std::pair<double, double>> ranges;
};

/// Deterministic sampling source. Draws are derived from raw mt19937_64
/// output only, so a seed fully determines every sample on any platform.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : gen_(seed) {}

    double uniform01();
    double uniform(double lo, double hi);
    double normal();  // Box-Muller
    std::vector<double> unit_vector(int dim);

private:
    std::mt19937_64 gen_;
};

/// A point of the slit tangent bundle plus the jet order used to expand
/// there. y must be nonzero.
struct PointState {
    std::vector<double> x;
    std::vector<double> y;
    int order = 4;
};

/// Sampling plan of a metric: x uniform in the chart box, y drawn on the
/// unit sphere and then scaled.
struct Sampler {
    BoxDomain x_box;
    double y_scale = 1.0;

    PointState draw(SampleRng& rng, int order = 4) const;
};

/// Jet-valued evaluation callback. The spans hold base and fiber coordinate
/// jets of a shared ambient signature; evaluators must build every constant
/// from their inputs (constant_like) so they compose inside product metrics.
using MetricFn =
    std::function<JetScalar(std::span<const JetScalar>, std::span<const JetScalar>)>;

/// A Finsler metric: positively 1-homogeneous in y, smooth on the slit
/// bundle, with positive definite fundamental tensor (checked numerically by
/// the curvature pipeline). `evaluate` yields F; `evaluate_squared` yields
/// F^2 and is supplied separately by constructors whose F^2 is smooth on
/// fiber subspaces where F itself has a square-root kink (products of
/// quadratic factors, for example).
struct FinslerMetric {
    int dim = 0;
    std::string label;
    MetricFn evaluate;
    MetricFn evaluate_squared;
    Sampler sampler;

    /// Plain F(x, y) through a minimal jet evaluation.
    double value(const std::vector<double>& x, const std::vector<double>& y) const;
};

/// Fills whichever of evaluate / evaluate_squared is missing from the other.
void complete_metric(FinslerMetric& m);

/// Smooth scalar function on the base manifold (constant in y), jet-evaluable
/// through the metric's base-coordinate jets. `plain` is a jet-free
/// evaluation used by finite-difference cross-checks.
struct ScalarFactor {
    std::function<JetScalar(std::span<const JetScalar>)> eval;
    std::function<double(const std::vector<double>&)> plain;
    std::string label;
};

/// Smooth scalar function of one variable with its derivative supplied in
/// closed form, so warped constructions stay independent of slot layout.
struct CurveFunction {
    std::function<JetScalar(const JetScalar&)> value;
    std::function<JetScalar(const JetScalar&)> derivative;
    std::function<double(double)> plain;
    std::string label;
};

ScalarFactor constant_factor(double value);
ScalarFactor linear_factor(std::vector<double> coeffs);  // u = sum a_i x^i
ScalarFactor factor_from_curve(CurveFunction f, int coordinate = 0);
ScalarFactor log_factor_from_curve(CurveFunction f, int coordinate = 0);
ScalarFactor negative_log_factor_from_curve(CurveFunction f, int coordinate = 0);

CurveFunction cosine_plus_constant(double c);          // t -> cos t + c
CurveFunction linear_curve(double slope, double intercept);

}  // namespace finsler
