#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// Horizontal Ricci trace, scalar curvature and the trace-free part used by
/// the pointwise Einstein criterion.
struct EinsteinResult {
    Matrix ricci;
    double scal = 0.0;
    Matrix efree;
    double residual = 0.0;  // max|efree| / max(1, max|ricci|)
};

/// Every derived tensor at one point of the slit bundle, plus named residual
/// diagnostics (see full_report).
struct CurvatureReport {
    double F_value = 0.0;
    Matrix g;
    Matrix g_inv;
    Tensor3 cartan;       // A_ijk
    Vector spray;         // G^i
    Matrix nonlinear;     // N^i_j
    Tensor3 chern;        // Gamma^i_jk, (i; j, k)
    Tensor4 hh_curvature; // R_j^i_kl stored as (j, i, k, l)
    Matrix ricci;
    double scal = 0.0;
    Matrix efree;
    double einstein_residual = 0.0;
    std::map<std::string, double> diagnostics;
};

/// The curvature pipeline at a single point. One jet evaluation of F^2 at
/// the requested order feeds every stage: the fundamental tensor consumes
/// two fiber derivatives, the connection a third, the hh-curvature a fourth,
/// with each derived object kept as a jet of the remaining order so later
/// stages can differentiate it exactly.
///
/// Stages are computed lazily and cached; getters are therefore non-const.
/// Instances are not internally synchronized -- use one per thread. The
/// metric itself must be reentrant (pure given (x, y)), which every zoo
/// constructor guarantees.
class MetricEvaluation {
public:
    MetricEvaluation(const FinslerMetric& metric, const PointState& p);

    int dim() const { return n_; }
    int order() const { return point_.order; }
    const PointState& point() const { return point_; }
    const FinslerMetric& metric() const { return *metric_; }

    std::span<const JetScalar> x_jets() const;
    std::span<const JetScalar> y_jets() const;
    const JetScalar& f_jet() const { return f_; }
    const JetScalar& f2_jet() const { return f2_; }
    double f_value() const { return f_.value(); }

    // fundamental tensor g_ij = 1/2 d^2F^2/dy^i dy^j and its inverse,
    // as jets (order-2 lower) and as values
    const JetScalar& g_jet(int i, int j);
    const JetScalar& g_inv_jet(int i, int j);
    const Matrix& fundamental();
    const Matrix& fundamental_inverse();

    // Cartan tensor A_ijk = (F/2) dg_ij/dy^k
    Tensor3 cartan();

    // geodesic spray G^i and nonlinear connection N^i_j = dG^i/dy^j
    const JetScalar& spray_jet(int i);
    const JetScalar& nonlinear_jet(int i, int j);
    Vector spray();
    Matrix nonlinear();

    // Chern connection coefficients
    const JetScalar& chern_jet(int i, int j, int k);
    Tensor3 chern();

    // hh-curvature, horizontal Ricci / scalar / trace-free part
    const Tensor4& hh_curvature();
    const EinsteinResult& einstein();

    /// delta target / delta x^i = d/dx^i - N^j_i d/dy^j, value at the point.
    double delta_value(const JetScalar& target, int i);
    /// Jet form, truncated to what the available N jets support.
    JetScalar delta_jet(const JetScalar& target, int i);

private:
    void require_order(int min_order, const char* stage) const;
    void ensure_g();
    void ensure_spray();
    void ensure_chern();
    void ensure_hh();
    void ensure_einstein();
    std::size_t at2(int i, int j) const {
        return static_cast<std::size_t>(i) * n_ + j;
    }
    std::size_t at3(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }

    const FinslerMetric* metric_;
    PointState point_;
    int n_ = 0;
    std::vector<JetScalar> vars_;
    JetScalar f_;
    JetScalar f2_;
    std::optional<std::vector<JetScalar>> g_jets_;
    std::optional<std::vector<JetScalar>> g_inv_jets_;
    std::optional<Matrix> g_mat_;
    std::optional<Matrix> g_inv_mat_;
    std::optional<std::vector<JetScalar>> spray_jets_;
    std::optional<std::vector<JetScalar>> nonlinear_jets_;
    std::optional<std::vector<JetScalar>> chern_jets_;
    std::optional<Tensor4> hh_;
    std::optional<EinsteinResult> einstein_;
};

// One-shot forms of the pipeline stages.
std::pair<Matrix, Matrix> fundamental_tensor(const FinslerMetric& m,
                                             const PointState& p);
Tensor3 cartan_tensor(const FinslerMetric& m, const PointState& p);
std::pair<Vector, Matrix> spray_and_nonlinear_connection(const FinslerMetric& m,
                                                         const PointState& p);
double delta_derivative(const FinslerMetric& m, const PointState& p,
                        const MetricFn& target, int i);
Tensor3 chern_coefficients(const FinslerMetric& m, const PointState& p);
Tensor4 hh_curvature(const FinslerMetric& m, const PointState& p);
EinsteinResult ricci_scalar_einstein(const FinslerMetric& m, const PointState& p);

/// Runs the whole pipeline once and populates the diagnostics map:
/// homogeneity and Euler residuals, inverse and compatibility residuals,
/// N-Gamma consistency, Cartan symmetry and y-contraction, hh antisymmetry,
/// trace of the trace-free part, and horizontal constancy of F^2.
CurvatureReport full_report(const FinslerMetric& m, const PointState& p);

}  // namespace finsler
