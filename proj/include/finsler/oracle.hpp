#pragma once

#include <functional>
#include <vector>

#include "finsler/tensor.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

/// Ground truth for the Riemannian reduction of the pipeline, computed by
/// central finite differences on the plain metric field. Deliberately shares
/// nothing with the jet algebra, so agreement with the pipeline is evidence
/// rather than tautology.
struct RiemannOracleReport {
    Tensor3 christoffel;     // Gamma^i_jk
    Tensor4 riemann_upper;   // R_j^i_kl, layout (j, i, k, l)
    Tensor4 riemann_lowered; // g_ia R_j^a_kl
    Matrix ricci;
    double scal = 0.0;
};

/// Levi-Civita connection Gamma^i_jk = 1/2 g^il (d_k g_jl + d_j g_lk - d_l g_jk)
/// with Richardson-extrapolated central differences of the metric field.
/// Expected truncation ~1e-8 at the default step, dominating rounding for the
/// shipped fields.
Tensor3 levi_civita_fd(const RiemannianField& field, const std::vector<double>& x,
                       double step = 1e-4);

/// Classical curvature from differenced Christoffel symbols. `outer_step`
/// is the step used to differentiate the (already finite-differenced)
/// connection coefficients.
RiemannOracleReport riemann_ricci_fd(const RiemannianField& field,
                                     const std::vector<double>& x,
                                     double step = 1e-4, double outer_step = 1e-3);

/// Covariant Hessian of a plain scalar function u at x.
Matrix covariant_hessian_fd(const RiemannianField& field,
                            const std::function<double(const std::vector<double>&)>& u,
                            const std::vector<double>& x, double step = 1e-4);

/// Max violation of the first Bianchi identity (cyclic sum over the three
/// non-metric slots); an internal consistency measure of the oracle itself.
double bianchi_residual(const RiemannOracleReport& report);

/// The conformally deformed field e^{2u} g, for side-by-side classical
/// comparisons against the pipeline's deformed metrics.
RiemannianField conformal_field(const RiemannianField& base, const ScalarFactor& u);

}  // namespace finsler
