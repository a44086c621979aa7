#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/core.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

/// Horizontal gradient data of a scalar factor at one point.
struct GradientReport {
    Vector grad_lower;   // du_i
    Vector grad_upper;   // g^{ij} du_j
    double norm_sq = 0;  // g^{ij} du_i du_j
    double laplacian = 0;  // g^{ij} H_ij, analyst's sign
};

/// Second covariant derivative of a base-manifold function:
/// H_ij = d_i d_j u - Gamma^k_ji d_k u. Since u is fiber independent the
/// horizontal derivative reduces to the plain x-derivative; the connection
/// still makes H direction dependent for non-Riemannian metrics.
Matrix horizontal_hessian(MetricEvaluation& ev, const ScalarFactor& u);
Matrix horizontal_hessian(const FinslerMetric& m, const ScalarFactor& u,
                          const PointState& p);

GradientReport laplacian_and_gradient(MetricEvaluation& ev, const ScalarFactor& u);
GradientReport laplacian_and_gradient(const FinslerMetric& m,
                                      const ScalarFactor& u, const PointState& p);

/// B^i_j = (1/2F) (d_r u) d(F^2 g^{ir} - 2 y^i y^r)/dy^j.
Matrix b_map(MetricEvaluation& ev, const ScalarFactor& u);
Matrix b_map(const FinslerMetric& m, const ScalarFactor& u, const PointState& p);

/// The Cartan contraction entering the preservation criterion:
/// (n-1)/(2n(n-2)F) (d_r u)(grad^q u) d(F^2 g^{rs} - 2 y^r y^s)/dy^q g^{kl} A_skl.
/// Identically zero on Riemannian metrics.
double ee9_cartan_term(MetricEvaluation& ev, const ScalarFactor& u);

/// Pointwise residual of the criterion-preservation equation
///   H_ij = (1/n)(lap - |grad|^2) g_ij + du_i du_j + cartan_term * g_ij.
/// Requires dimension >= 3 (the equation divides by n - 2).
Matrix ee9_residual(MetricEvaluation& ev, const ScalarFactor& u);
Matrix ee9_residual(const FinslerMetric& m, const ScalarFactor& u,
                    const PointState& p);

/// Proportionality factor f of the cylinder identity grad grad phi = f g:
/// f = (1/n) [ lap(phi) - (n-1)/(2(n-2)F) (d_r phi)(grad^q phi)
///             d(F^2 g^{rs} - 2 y^r y^s)/dy^q g^{kl} A_skl ].
double proportionality_factor(MetricEvaluation& ev, const ScalarFactor& phi);

/// Gap between the deformed trace-free Ricci and its predicted conformal
/// transform:
///   gap = E~ - [ E - (n-2)(H_u - du du) - ((n-2)/n)(lap + |grad|^2) g ].
/// Reported as data only; no value is asserted for general metrics.
Matrix eq122b_gap(const ConformalPair& pair, const PointState& p);

/// Everything the conformal calculus produces at one point, in one record.
struct ConformalDiagnostics {
    Matrix hess_u;
    Vector grad_u;            // du_i
    double grad_norm_sq = 0;  // g^{ij} du_i du_j
    double laplacian_h = 0;
    Matrix bmap;
    double cartan_term = 0;
    Matrix ee9;               // preservation-equation residual
    Matrix eq122b;            // transform gap; empty without a deformed pair
};

ConformalDiagnostics conformal_diagnostics(MetricEvaluation& ev,
                                           const ScalarFactor& u);
ConformalDiagnostics conformal_diagnostics(const ConformalPair& pair,
                                           const PointState& p);

/// Cylinder metric ((0, eps) x M2, sqrt(y_t^2 + phi'(t)^2 F2^2)). Unlike a
/// warped product, phi' may be negative; only its square enters.
FinslerMetric make_cylinder(const FinslerMetric& second, const CurveFunction& phi,
                            double eps);

struct CylinderReport {
    int samples_requested = 0;
    int samples_used = 0;
    int excluded = 0;  // draws discarded because phi'(t) ~ 0 degenerates g
    double max_hessian_residual = 0.0;   // |grad grad phi - phi'' g|
    double mean_hessian_residual = 0.0;
    double max_form_residual = 0.0;      // |grad grad phi - f g|, dim >= 3 only
    double max_base_einstein = 0.0;      // phi * cylinder metric
    double max_deformed_einstein = 0.0;  // the cylinder metric itself
    std::vector<std::string> warnings;
};

/// Builds the cylinder over `second`, evaluates the Hessian identity
/// grad grad phi = phi'' g at sampled points, and reports the Einstein
/// residuals of the conformally related pair (phi * cylinder, cylinder).
CylinderReport cylinder_check(const FinslerMetric& second, const CurveFunction& phi,
                              double eps, int samples, std::uint64_t seed = 1,
                              int order = 4);

}  // namespace finsler
