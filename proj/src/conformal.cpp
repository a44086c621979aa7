#include "finsler/conformal.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace finsler {

namespace {

struct FactorData {
    Vector grad;      // d_i u
    Matrix hess2;     // d_i d_j u (plain second partials)
};

FactorData evaluate_factor(MetricEvaluation& ev, const ScalarFactor& u) {
    const int n = ev.dim();
    const JetScalar uj = u.eval(ev.x_jets());
    if (uj.order() < 2)
        throw std::invalid_argument("scalar factor needs jet order >= 2");
    FactorData d;
    d.grad = Vector::Zero(n);
    d.hess2 = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const JetScalar di = uj.derivative(i);
        d.grad(i) = di.value();
        for (int j = 0; j < n; ++j) d.hess2(i, j) = di.derivative(j).value();
    }
    return d;
}

// d(F^2 g^{rs} - 2 y^r y^s)/dy^q at the point, from the inverse-metric jets
double fiber_derivative_term(MetricEvaluation& ev, int r, int s, int q) {
    const int n = ev.dim();
    const double f2 = ev.f2_jet().value();
    const double df2 = ev.f2_jet().derivative(n + q).value();
    const double ginv_rs = ev.fundamental_inverse()(r, s);
    const double dginv = ev.g_inv_jet(r, s).derivative(n + q).value();
    double v = df2 * ginv_rs + f2 * dginv;
    const auto& y = ev.point().y;
    if (r == q) v -= 2.0 * y[static_cast<std::size_t>(s)];
    if (s == q) v -= 2.0 * y[static_cast<std::size_t>(r)];
    return v;
}

}  // namespace

Matrix horizontal_hessian(MetricEvaluation& ev, const ScalarFactor& u) {
    const int n = ev.dim();
    const FactorData d = evaluate_factor(ev, u);
    const Tensor3 gamma = ev.chern();
    Matrix h = d.hess2;
    // H_ij = d_i d_j u - Gamma^k_ji d_k u
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) h(i, j) -= gamma(k, j, i) * d.grad(k);
    return h;
}

Matrix horizontal_hessian(const FinslerMetric& m, const ScalarFactor& u,
                          const PointState& p) {
    MetricEvaluation ev(m, p);
    return horizontal_hessian(ev, u);
}

GradientReport laplacian_and_gradient(MetricEvaluation& ev, const ScalarFactor& u) {
    const FactorData d = evaluate_factor(ev, u);
    const Matrix& ginv = ev.fundamental_inverse();
    GradientReport r;
    r.grad_lower = d.grad;
    r.grad_upper = ginv * d.grad;
    r.norm_sq = d.grad.dot(r.grad_upper);
    const Matrix h = horizontal_hessian(ev, u);
    r.laplacian = (ginv.transpose().cwiseProduct(h)).sum();
    return r;
}

GradientReport laplacian_and_gradient(const FinslerMetric& m,
                                      const ScalarFactor& u, const PointState& p) {
    MetricEvaluation ev(m, p);
    return laplacian_and_gradient(ev, u);
}

Matrix b_map(MetricEvaluation& ev, const ScalarFactor& u) {
    const int n = ev.dim();
    const FactorData d = evaluate_factor(ev, u);
    const double inv_2f = 0.5 / ev.f_value();
    Matrix b = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int r = 0; r < n; ++r)
                acc += d.grad(r) * fiber_derivative_term(ev, i, r, j);
            b(i, j) = inv_2f * acc;
        }
    return b;
}

Matrix b_map(const FinslerMetric& m, const ScalarFactor& u, const PointState& p) {
    MetricEvaluation ev(m, p);
    return b_map(ev, u);
}

namespace {

// (d_r u)(grad^q u) d(F^2 g^{rs} - 2 y^r y^s)/dy^q g^{kl} A_skl
double cartan_contraction(MetricEvaluation& ev, const FactorData& d) {
    const int n = ev.dim();
    const Matrix& ginv = ev.fundamental_inverse();
    const Tensor3 a = ev.cartan();
    const Vector grad_up = ginv * d.grad;

    Vector mean_cartan = Vector::Zero(n);  // I_s = g^{kl} A_skl
    for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) acc += ginv(k, l) * a(s, k, l);
        mean_cartan(s) = acc;
    }

    double total = 0.0;
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q) {
            const double w = d.grad(r) * grad_up(q);
            if (w == 0.0) continue;
            for (int s = 0; s < n; ++s)
                total += w * fiber_derivative_term(ev, r, s, q) * mean_cartan(s);
        }
    return total;
}

}  // namespace

double ee9_cartan_term(MetricEvaluation& ev, const ScalarFactor& u) {
    const int n = ev.dim();
    if (n < 3)
        throw std::domain_error(
            "criterion-preservation terms require dimension >= 3 (n - 2 divisor)");
    const FactorData d = evaluate_factor(ev, u);
    return (n - 1.0) / (2.0 * n * (n - 2.0) * ev.f_value()) *
           cartan_contraction(ev, d);
}

Matrix ee9_residual(MetricEvaluation& ev, const ScalarFactor& u) {
    const int n = ev.dim();
    if (n < 3)
        throw std::domain_error(
            "criterion-preservation residual requires dimension >= 3 "
            "(the equation divides by n - 2)");
    const FactorData d = evaluate_factor(ev, u);
    const Matrix h = horizontal_hessian(ev, u);
    const Matrix& g = ev.fundamental();
    const Matrix& ginv = ev.fundamental_inverse();
    const Vector grad_up = ginv * d.grad;
    const double norm_sq = d.grad.dot(grad_up);
    const double lap = (ginv.transpose().cwiseProduct(h)).sum();
    const double cartan_term = (n - 1.0) / (2.0 * n * (n - 2.0) * ev.f_value()) *
                               cartan_contraction(ev, d);

    Matrix res = h;
    res -= (1.0 / n) * (lap - norm_sq) * g;
    res -= d.grad * d.grad.transpose();
    res -= cartan_term * g;
    return res;
}

Matrix ee9_residual(const FinslerMetric& m, const ScalarFactor& u,
                    const PointState& p) {
    MetricEvaluation ev(m, p);
    return ee9_residual(ev, u);
}

double proportionality_factor(MetricEvaluation& ev, const ScalarFactor& phi) {
    const int n = ev.dim();
    if (n < 3)
        throw std::domain_error(
            "proportionality factor requires dimension >= 3 (n - 2 divisor)");
    const FactorData d = evaluate_factor(ev, phi);
    const Matrix h = horizontal_hessian(ev, phi);
    const Matrix& ginv = ev.fundamental_inverse();
    const double lap = (ginv.transpose().cwiseProduct(h)).sum();
    return (lap - (n - 1.0) / (2.0 * (n - 2.0) * ev.f_value()) *
                      cartan_contraction(ev, d)) /
           n;
}

Matrix eq122b_gap(const ConformalPair& pair, const PointState& p) {
    const int n = pair.base.dim;
    MetricEvaluation base_ev(pair.base, p);
    MetricEvaluation def_ev(pair.deformed, p);
    const Matrix e_base = base_ev.einstein().efree;
    const Matrix e_def = def_ev.einstein().efree;

    const FactorData d = evaluate_factor(base_ev, pair.factor);
    const Matrix h = horizontal_hessian(base_ev, pair.factor);
    const GradientReport gr = laplacian_and_gradient(base_ev, pair.factor);

    Matrix gap = e_def - e_base;
    gap += (n - 2.0) * (h - d.grad * d.grad.transpose());
    gap += ((n - 2.0) / n) * (gr.laplacian + gr.norm_sq) * base_ev.fundamental();
    return gap;
}

ConformalDiagnostics conformal_diagnostics(MetricEvaluation& ev,
                                           const ScalarFactor& u) {
    ConformalDiagnostics d;
    d.hess_u = horizontal_hessian(ev, u);
    const GradientReport gr = laplacian_and_gradient(ev, u);
    d.grad_u = gr.grad_lower;
    d.grad_norm_sq = gr.norm_sq;
    d.laplacian_h = gr.laplacian;
    d.bmap = b_map(ev, u);
    d.cartan_term = ee9_cartan_term(ev, u);
    d.ee9 = ee9_residual(ev, u);
    return d;
}

ConformalDiagnostics conformal_diagnostics(const ConformalPair& pair,
                                           const PointState& p) {
    MetricEvaluation base_ev(pair.base, p);
    ConformalDiagnostics d = conformal_diagnostics(base_ev, pair.factor);
    d.eq122b = eq122b_gap(pair, p);
    return d;
}

FinslerMetric make_cylinder(const FinslerMetric& second, const CurveFunction& phi,
                            double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("cylinder needs eps > 0");
    const int n2 = second.dim;
    FinslerMetric m;
    m.dim = 1 + n2;
    m.label = "cylinder(" + phi.label + ") x " + second.label;
    m.sampler.x_box.ranges = {{0.05 * eps, 0.95 * eps}};
    m.sampler.x_box.ranges.insert(m.sampler.x_box.ranges.end(),
                                  second.sampler.x_box.ranges.begin(),
                                  second.sampler.x_box.ranges.end());
    auto f2 = second.evaluate_squared;
    auto dphi = phi.derivative;
    m.evaluate_squared = [f2, dphi](std::span<const JetScalar> x,
                                    std::span<const JetScalar> y) {
        const JetScalar w = dphi(x[0]);
        return y[0] * y[0] + w * w * f2(x.subspan(1), y.subspan(1));
    };
    complete_metric(m);
    return m;
}

CylinderReport cylinder_check(const FinslerMetric& second, const CurveFunction& phi,
                              double eps, int samples, std::uint64_t seed,
                              int order) {
    CylinderReport rep;
    rep.samples_requested = samples;
    if (samples <= 0) return rep;

    const FinslerMetric cyl = make_cylinder(second, phi, eps);
    // base = phi * cylinder: the conformally related metric with e^u = phi
    const ConformalPair pair =
        make_conformal(cyl, log_factor_from_curve(phi, 0));
    const ScalarFactor phi_factor = factor_from_curve(phi, 0);

    SampleRng rng(seed);
    double sum_res = 0.0;
    bool warned = false;
    int attempts = 0;
    const int max_attempts = samples * 64;
    while (rep.samples_used < samples && attempts < max_attempts) {
        ++attempts;
        const PointState p = cyl.sampler.draw(rng, order);
        JetScalar t1 = JetScalar::variable(1, 1, 0, p.x[0]);
        if (std::abs(phi.derivative(t1).value()) < 1e-8) {
            ++rep.excluded;
            if (!warned) {
                std::ostringstream os;
                os << "phi'(t) ~ 0 near t = " << p.x[0]
                   << "; point excluded (degenerate warping)";
                rep.warnings.push_back(os.str());
                warned = true;
            }
            continue;
        }

        MetricEvaluation ev(cyl, p);
        const Matrix h = horizontal_hessian(ev, phi_factor);
        const JetScalar uj = phi_factor.eval(ev.x_jets());
        const double phi_dd = uj.derivative(0).derivative(0).value();
        const double res = max_abs(Matrix(h - phi_dd * ev.fundamental()));
        rep.max_hessian_residual = std::max(rep.max_hessian_residual, res);
        sum_res += res;

        if (cyl.dim >= 3) {
            const double f = proportionality_factor(ev, phi_factor);
            rep.max_form_residual = std::max(
                rep.max_form_residual, max_abs(Matrix(h - f * ev.fundamental())));
        }

        rep.max_deformed_einstein =
            std::max(rep.max_deformed_einstein, ev.einstein().residual);
        MetricEvaluation base_ev(pair.deformed, p);
        rep.max_base_einstein =
            std::max(rep.max_base_einstein, base_ev.einstein().residual);

        ++rep.samples_used;
    }
    if (rep.samples_used > 0) rep.mean_hessian_residual = sum_res / rep.samples_used;
    return rep;
}

}  // namespace finsler
