#include "finsler/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "finsler/finite_difference.hpp"

namespace finsler {

namespace {

// Richardson-extrapolated central difference of a matrix-valued function
// along coordinate k.
Matrix diff_matrix(const std::function<Matrix(const std::vector<double>&)>& f,
                   std::vector<double> x, int k, double h) {
    auto central = [&](double hh) {
        x[static_cast<std::size_t>(k)] += hh;
        Matrix fp = f(x);
        x[static_cast<std::size_t>(k)] -= 2.0 * hh;
        Matrix fm = f(x);
        x[static_cast<std::size_t>(k)] += hh;
        return Matrix(((fp - fm) / (2.0 * hh)));
    };
    const Matrix coarse = central(h);
    const Matrix fine = central(h / 2.0);
    return (4.0 * fine - coarse) / 3.0;
}

Tensor3 diff_tensor3(const std::function<Tensor3(const std::vector<double>&)>& f,
                     std::vector<double> x, int k, double h) {
    auto central = [&](double hh) {
        x[static_cast<std::size_t>(k)] += hh;
        Tensor3 fp = f(x);
        x[static_cast<std::size_t>(k)] -= 2.0 * hh;
        Tensor3 fm = f(x);
        x[static_cast<std::size_t>(k)] += hh;
        const int n = fp.dim();
        Tensor3 d(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    d(i, j, l) = (fp(i, j, l) - fm(i, j, l)) / (2.0 * hh);
        return d;
    };
    const Tensor3 coarse = central(h);
    const Tensor3 fine = central(h / 2.0);
    const int n = coarse.dim();
    Tensor3 d(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                d(i, j, l) = (4.0 * fine(i, j, l) - coarse(i, j, l)) / 3.0;
    return d;
}

}  // namespace

Tensor3 levi_civita_fd(const RiemannianField& field, const std::vector<double>& x,
                       double step) {
    const int n = field.dim;
    const Matrix g = field.g_plain(x);
    const Matrix ginv = g.inverse();

    std::vector<Matrix> dg;
    dg.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) dg.push_back(diff_matrix(field.g_plain, x, k, step));

    // Gamma^i_jk = 1/2 g^il (d_k g_jl + d_j g_lk - d_l g_jk)
    Tensor3 gamma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int l = 0; l < n; ++l)
                    acc += ginv(i, l) *
                           (dg[static_cast<std::size_t>(k)](j, l) +
                            dg[static_cast<std::size_t>(j)](l, k) -
                            dg[static_cast<std::size_t>(l)](j, k));
                gamma(i, j, k) = 0.5 * acc;
            }
    return gamma;
}

RiemannOracleReport riemann_ricci_fd(const RiemannianField& field,
                                     const std::vector<double>& x, double step,
                                     double outer_step) {
    const int n = field.dim;
    RiemannOracleReport rep;
    rep.christoffel = levi_civita_fd(field, x, step);

    auto gamma_at = [&field, step](const std::vector<double>& p) {
        return levi_civita_fd(field, p, step);
    };
    std::vector<Tensor3> dgamma;
    dgamma.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        dgamma.push_back(diff_tensor3(gamma_at, x, k, outer_step));

    // R_j^i_kl = d_k Gamma^i_jl - d_l Gamma^i_jk
    //          + Gamma^i_km Gamma^m_jl - Gamma^i_lm Gamma^m_jk
    const Tensor3& ga = rep.christoffel;
    rep.riemann_upper = Tensor4(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = dgamma[static_cast<std::size_t>(k)](i, j, l) -
                               dgamma[static_cast<std::size_t>(l)](i, j, k);
                    for (int m = 0; m < n; ++m)
                        v += ga(i, k, m) * ga(m, j, l) - ga(i, l, m) * ga(m, j, k);
                    rep.riemann_upper(j, i, k, l) = v;
                }

    const Matrix g = field.g_plain(x);
    const Matrix ginv = g.inverse();
    rep.riemann_lowered = Tensor4(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = 0.0;
                    for (int a = 0; a < n; ++a)
                        v += g(i, a) * rep.riemann_upper(j, a, k, l);
                    rep.riemann_lowered(j, i, k, l) = v;
                }

    rep.ricci = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) v += rep.riemann_upper(j, k, k, l);
            rep.ricci(j, l) = v;
        }
    rep.scal = (ginv.transpose().cwiseProduct(rep.ricci)).sum();
    return rep;
}

Matrix covariant_hessian_fd(const RiemannianField& field,
                            const std::function<double(const std::vector<double>&)>& u,
                            const std::vector<double>& x, double step) {
    const int n = field.dim;
    const Tensor3 gamma = levi_civita_fd(field, x, step);

    RealFunction u_span = [&u](std::span<const double> p) {
        return u(std::vector<double>(p.begin(), p.end()));
    };
    Vector grad(n);
    for (int i = 0; i < n; ++i)
        grad(i) = fd_partial(u_span, x, MultiIndex::unit(n, i));

    Matrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            MultiIndex idx = MultiIndex::unit(n, i).plus(j);
            double v = fd_partial(u_span, x, idx);
            for (int k = 0; k < n; ++k) v -= gamma(k, i, j) * grad(k);
            h(i, j) = v;
        }
    return h;
}

double bianchi_residual(const RiemannOracleReport& report) {
    const int n = report.riemann_upper.dim();
    double res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    res = std::max(res, std::abs(report.riemann_upper(j, i, k, l) +
                                                 report.riemann_upper(k, i, l, j) +
                                                 report.riemann_upper(l, i, j, k)));
    return res;
}

RiemannianField conformal_field(const RiemannianField& base, const ScalarFactor& u) {
    RiemannianField f = base;
    f.label = "e^{2" + u.label + "} " + base.label;
    auto base_jet = base.g_jet;
    auto ue = u.eval;
    f.g_jet = [base_jet, ue](std::span<const JetScalar> x) {
        std::vector<JetScalar> g = base_jet(x);
        const JetScalar scale = exp(ue(x) * 2.0);
        for (auto& e : g) e = e * scale;
        return g;
    };
    auto base_plain = base.g_plain;
    auto up = u.plain;
    f.g_plain = [base_plain, up](const std::vector<double>& x) {
        return Matrix(std::exp(2.0 * up(x)) * base_plain(x));
    };
    return f;
}

}  // namespace finsler
