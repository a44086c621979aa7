#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finsler/core.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// A Riemannian metric as a field of symmetric positive definite matrices
/// over a chart. `g_jet` returns the row-major entries evaluated over base
/// coordinate jets (for wrapping into a Finsler metric); `g_plain` is the
/// jet-free evaluation consumed by the finite-difference oracle.
struct RiemannianField {
    int dim = 0;
    std::string label;
    std::function<std::vector<JetScalar>(std::span<const JetScalar>)> g_jet;
    std::function<Matrix(const std::vector<double>&)> g_plain;
    BoxDomain chart;
};

RiemannianField euclidean_field(int n);
RiemannianField sphere2_field();      // d(theta)^2 + sin^2(theta) d(phi)^2
RiemannianField hyperbolic2_field();  // upper half-plane, g = dx^2+dy^2 / y^2
RiemannianField s3_chart_field();     // diag(1, sin^2 t, sin^2 t sin^2 theta)

FinslerMetric make_euclidean(int n);
FinslerMetric make_riemannian(const RiemannianField& field);
/// Flat-based Randers metric F = |y| + b.y; requires |b| < 1 so the
/// fundamental tensor stays positive definite.
FinslerMetric make_randers(std::vector<double> b);

/// Warping function on the first factor of a product.
struct WarpFunction {
    std::function<JetScalar(std::span<const JetScalar>)> eval;
    std::function<double(const std::vector<double>&)> plain;
    std::string label;
};

WarpFunction constant_warp(double value);
WarpFunction sine_warp();                              // f = sin(x^0)
WarpFunction exp_linear_warp(std::vector<double> coeffs);  // f = exp(sum a_i x^i)

/// Warped product F^2 = F1^2(x1, y1) + f^2(x1) F2^2(x2, y2). The fundamental
/// tensor is block diagonal in the factor split; f must be positive on the
/// sampled domain (probed at construction, checked again per evaluation).
struct WarpedProductMetric {
    FinslerMetric first;
    FinslerMetric second;
    WarpFunction warp;
    FinslerMetric metric;
};

WarpedProductMetric make_warped(FinslerMetric first, FinslerMetric second,
                                WarpFunction warp);

/// Conformal deformation e^u F of a base metric, with u a function of the
/// base point only. The deformed metric evaluates as exp(u(x)) * F(x, y)
/// exactly at the jet level.
struct ConformalPair {
    FinslerMetric base;
    ScalarFactor factor;
    FinslerMetric deformed;
};

ConformalPair make_conformal(FinslerMetric base, ScalarFactor u);

/// The warped 3-sphere example: (0, pi) x_{sin t} S^2 together with the test
/// function phi(t) = cos t + c, c > 1. The warped metric is a chart of the
/// round unit S^3 (Scal = 6, Einstein residual ~ 0).
struct WarpedSphereExample {
    WarpedProductMetric warped;
    CurveFunction phi;
    double c = 0.0;
};

WarpedSphereExample make_warped_sphere_example(double c);

/// Warped example with a two-dimensional curved first factor, so curvature
/// restriction to the first factor is a nontrivial check:
/// hyperbolic2 x_{exp(0.3 x^0)} euclidean(1).
WarpedProductMetric make_warped_hyperbolic_example();

}  // namespace finsler
