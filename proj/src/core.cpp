#include "finsler/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace finsler {

namespace {

// Gaussian elimination with value-magnitude pivoting over the truncated
// Taylor ring. Jets form a commutative ring in which an element is a unit
// iff its value part is nonzero, so the usual [A | I] sweep applies.
std::vector<JetScalar> invert_jet_matrix(const std::vector<JetScalar>& a, int n) {
    std::vector<JetScalar> work = a;
    std::vector<JetScalar> inv;
    inv.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv.push_back(constant_like(a[0], i == j ? 1.0 : 0.0));

    auto at = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };

    double scale = 0.0;
    for (const auto& e : work) scale = std::max(scale, std::abs(e.value()));

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(work[at(r, col)].value()) >
                std::abs(work[at(pivot, col)].value()))
                pivot = r;
        if (std::abs(work[at(pivot, col)].value()) <= 1e-14 * scale)
            throw std::domain_error("singular fundamental tensor");
        if (pivot != col)
            for (int k = 0; k < n; ++k) {
                std::swap(work[at(pivot, k)], work[at(col, k)]);
                std::swap(inv[at(pivot, k)], inv[at(col, k)]);
            }
        const JetScalar piv_inv = constant_like(work[at(col, col)], 1.0) /
                                  work[at(col, col)];
        for (int k = 0; k < n; ++k) {
            work[at(col, k)] = work[at(col, k)] * piv_inv;
            inv[at(col, k)] = inv[at(col, k)] * piv_inv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const JetScalar factor = work[at(r, col)];
            for (int k = 0; k < n; ++k) {
                work[at(r, k)] -= factor * work[at(col, k)];
                inv[at(r, k)] -= factor * inv[at(col, k)];
            }
        }
    }
    return inv;
}

}  // namespace

MetricEvaluation::MetricEvaluation(const FinslerMetric& metric,
                                   const PointState& p)
    : metric_(&metric), point_(p), n_(metric.dim) {
    if (n_ < 1) throw std::invalid_argument("metric dimension must be >= 1");
    if (static_cast<int>(p.x.size()) != n_ || static_cast<int>(p.y.size()) != n_)
        throw std::invalid_argument("point arity does not match metric dimension");
    double y_norm_sq = 0.0;
    for (double c : p.y) {
        if (!std::isfinite(c))
            throw std::invalid_argument("non-finite fiber coordinate");
        y_norm_sq += c * c;
    }
    for (double c : p.x)
        if (!std::isfinite(c))
            throw std::invalid_argument("non-finite base coordinate");
    if (y_norm_sq == 0.0)
        throw std::invalid_argument("y = 0 is outside the slit tangent bundle");
    if (p.order < 1) throw std::invalid_argument("jet order must be >= 1");

    vars_ = seed_variables(p.x, p.y, p.order);
    f2_ = metric.evaluate_squared(x_jets(), y_jets());
    f_ = metric.evaluate(x_jets(), y_jets());
    if (!(f2_.value() > 0.0) || !std::isfinite(f2_.value()))
        throw std::domain_error("F^2 is not positive at the sample point");
}

std::span<const JetScalar> MetricEvaluation::x_jets() const {
    return std::span<const JetScalar>(vars_).subspan(0, static_cast<std::size_t>(n_));
}

std::span<const JetScalar> MetricEvaluation::y_jets() const {
    return std::span<const JetScalar>(vars_).subspan(static_cast<std::size_t>(n_));
}

void MetricEvaluation::require_order(int min_order, const char* stage) const {
    if (point_.order < min_order) {
        std::ostringstream os;
        os << stage << " needs jet order >= " << min_order << ", point has "
           << point_.order;
        throw std::invalid_argument(os.str());
    }
}

void MetricEvaluation::ensure_g() {
    if (g_jets_) return;
    require_order(2, "fundamental tensor");

    // g_ij = 1/2 d^2 F^2 / dy^i dy^j, kept as jets two orders down
    std::vector<JetScalar> g(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
        const JetScalar di = f2_.derivative(n_ + i);
        for (int j = i; j < n_; ++j) {
            JetScalar gij = di.derivative(n_ + j) * 0.5;
            if (j != i) g[at2(j, i)] = gij;
            g[at2(i, j)] = std::move(gij);
        }
    }

    Matrix gm(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) gm(i, j) = g[at2(i, j)].value();

    Eigen::SelfAdjointEigenSolver<Matrix> es(gm);
    const double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) {
        std::ostringstream os;
        os << "fundamental tensor not positive definite (min eigenvalue "
           << min_eig << ")";
        throw std::domain_error(os.str());
    }

    g_inv_jets_ = invert_jet_matrix(g, n_);
    g_jets_ = std::move(g);
    g_mat_ = std::move(gm);
    Matrix ginv(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) ginv(i, j) = (*g_inv_jets_)[at2(i, j)].value();
    g_inv_mat_ = std::move(ginv);
}

const JetScalar& MetricEvaluation::g_jet(int i, int j) {
    ensure_g();
    return (*g_jets_)[at2(i, j)];
}

const JetScalar& MetricEvaluation::g_inv_jet(int i, int j) {
    ensure_g();
    return (*g_inv_jets_)[at2(i, j)];
}

const Matrix& MetricEvaluation::fundamental() {
    ensure_g();
    return *g_mat_;
}

const Matrix& MetricEvaluation::fundamental_inverse() {
    ensure_g();
    return *g_inv_mat_;
}

Tensor3 MetricEvaluation::cartan() {
    require_order(3, "Cartan tensor");
    ensure_g();
    // A_ijk = (F/2) dg_ij/dy^k
    Tensor3 a(n_);
    const double half_f = 0.5 * f_.value();
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                a(i, j, k) = half_f * (*g_jets_)[at2(i, j)].derivative(n_ + k).value();
    return a;
}

void MetricEvaluation::ensure_spray() {
    if (spray_jets_) return;
    require_order(3, "geodesic spray");
    ensure_g();
    const int q2 = point_.order - 2;

    // G^i = 1/4 g^{il} ( y^k d^2F^2/dy^l dx^k - dF^2/dx^l )
    std::vector<JetScalar> rhs;
    rhs.reserve(static_cast<std::size_t>(n_));
    for (int l = 0; l < n_; ++l) {
        const JetScalar dfl = f2_.derivative(n_ + l);
        JetScalar acc = -f2_.derivative(l).truncated(q2);
        for (int k = 0; k < n_; ++k)
            acc += vars_[static_cast<std::size_t>(n_ + k)].truncated(q2) *
                   dfl.derivative(k);
        rhs.push_back(std::move(acc));
    }

    std::vector<JetScalar> g_vec(static_cast<std::size_t>(n_));
    std::vector<JetScalar> n_vec;
    n_vec.reserve(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
        JetScalar gi = (*g_inv_jets_)[at2(i, 0)] * rhs[0];
        for (int l = 1; l < n_; ++l) gi += (*g_inv_jets_)[at2(i, l)] * rhs[static_cast<std::size_t>(l)];
        gi *= 0.25;
        g_vec[static_cast<std::size_t>(i)] = std::move(gi);
    }
    // N^i_j = dG^i/dy^j
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            n_vec.push_back(g_vec[static_cast<std::size_t>(i)].derivative(n_ + j));

    spray_jets_ = std::move(g_vec);
    nonlinear_jets_ = std::move(n_vec);
}

const JetScalar& MetricEvaluation::spray_jet(int i) {
    ensure_spray();
    return (*spray_jets_)[static_cast<std::size_t>(i)];
}

const JetScalar& MetricEvaluation::nonlinear_jet(int i, int j) {
    ensure_spray();
    return (*nonlinear_jets_)[at2(i, j)];
}

Vector MetricEvaluation::spray() {
    ensure_spray();
    Vector g(n_);
    for (int i = 0; i < n_; ++i) g(i) = (*spray_jets_)[static_cast<std::size_t>(i)].value();
    return g;
}

Matrix MetricEvaluation::nonlinear() {
    ensure_spray();
    Matrix nm(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) nm(i, j) = (*nonlinear_jets_)[at2(i, j)].value();
    return nm;
}

void MetricEvaluation::ensure_chern() {
    if (chern_jets_) return;
    require_order(3, "Chern connection");
    ensure_spray();
    const int q3 = point_.order - 3;

    // delta g_ij / delta x^k = dg_ij/dx^k - N^m_k dg_ij/dy^m
    std::vector<JetScalar> dg(static_cast<std::size_t>(n_) * n_ * n_);
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j) {
            const JetScalar& gij = (*g_jets_)[at2(i, j)];
            for (int k = 0; k < n_; ++k) {
                JetScalar d = gij.derivative(k);
                for (int m = 0; m < n_; ++m)
                    d -= (*nonlinear_jets_)[at2(m, k)] * gij.derivative(n_ + m);
                if (j != i) dg[at3(k, j, i)] = d;
                dg[at3(k, i, j)] = std::move(d);
            }
        }

    // Gamma^i_jk = 1/2 g^{il} ( dg_jl/dx^k + dg_lk/dx^j - dg_jk/dx^l ),
    // computed for j <= k and mirrored so the lower-index symmetry is exact.
    std::vector<JetScalar> gamma(static_cast<std::size_t>(n_) * n_ * n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = j; k < n_; ++k) {
                JetScalar acc = constant_like(dg[0], 0.0);
                for (int l = 0; l < n_; ++l) {
                    JetScalar sum = dg[at3(k, j, l)];
                    sum += dg[at3(j, l, k)];
                    sum -= dg[at3(l, j, k)];
                    acc += (*g_inv_jets_)[at2(i, l)].truncated(q3) * sum;
                }
                acc *= 0.5;
                if (k != j) gamma[at3(i, k, j)] = acc;
                gamma[at3(i, j, k)] = std::move(acc);
            }

    chern_jets_ = std::move(gamma);
}

const JetScalar& MetricEvaluation::chern_jet(int i, int j, int k) {
    ensure_chern();
    return (*chern_jets_)[at3(i, j, k)];
}

Tensor3 MetricEvaluation::chern() {
    ensure_chern();
    Tensor3 c(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k) c(i, j, k) = (*chern_jets_)[at3(i, j, k)].value();
    return c;
}

void MetricEvaluation::ensure_hh() {
    if (hh_) return;
    require_order(4, "hh-curvature");
    ensure_chern();

    // delta Gamma^i_jl / delta x^k at the point
    std::vector<double> n_val(static_cast<std::size_t>(n_) * n_);
    for (int m = 0; m < n_; ++m)
        for (int k = 0; k < n_; ++k) n_val[at2(m, k)] = (*nonlinear_jets_)[at2(m, k)].value();

    std::vector<double> dgamma(static_cast<std::size_t>(n_) * n_ * n_ * n_);
    auto at4 = [this](int k, int i, int j, int l) {
        return ((static_cast<std::size_t>(k) * n_ + i) * n_ + j) * n_ + l;
    };
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int l = 0; l < n_; ++l) {
                const JetScalar& gam = (*chern_jets_)[at3(i, j, l)];
                std::vector<double> dy(static_cast<std::size_t>(n_));
                for (int m = 0; m < n_; ++m) dy[static_cast<std::size_t>(m)] = gam.derivative(n_ + m).value();
                for (int k = 0; k < n_; ++k) {
                    double d = gam.derivative(k).value();
                    for (int m = 0; m < n_; ++m) d -= n_val[at2(m, k)] * dy[static_cast<std::size_t>(m)];
                    dgamma[at4(k, i, j, l)] = d;
                }
            }

    // R_j^i_kl = dGamma^i_jl/dx^k - dGamma^i_jk/dx^l
    //          + Gamma^i_km Gamma^m_jl - Gamma^i_lm Gamma^m_jk
    // The vertical bracket term drops: the Chern connection forms carry no
    // vertical component, so nabla_[delta_k, delta_l] contributes nothing.
    Tensor3 gv = chern();
    Tensor4 r(n_);
    for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l) {
                    double v = dgamma[at4(k, i, j, l)] - dgamma[at4(l, i, j, k)];
                    for (int m = 0; m < n_; ++m)
                        v += gv(i, k, m) * gv(m, j, l) - gv(i, l, m) * gv(m, j, k);
                    r(j, i, k, l) = v;
                }
    hh_ = std::move(r);
}

const Tensor4& MetricEvaluation::hh_curvature() {
    ensure_hh();
    return *hh_;
}

void MetricEvaluation::ensure_einstein() {
    if (einstein_) return;
    ensure_hh();

    // Ric_jl = R_j^k_kl: the mixed trace of the hh-curvature, with the index
    // placement fixed so constant-curvature spheres come out positive.
    EinsteinResult e;
    e.ricci = Matrix::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l) {
            double v = 0.0;
            for (int k = 0; k < n_; ++k) v += (*hh_)(j, k, k, l);
            e.ricci(j, l) = v;
        }
    const Matrix& ginv = fundamental_inverse();
    e.scal = (ginv.transpose().cwiseProduct(e.ricci)).sum();
    e.efree = e.ricci - (e.scal / n_) * fundamental();
    e.residual = max_abs(e.efree) / residual_scale(max_abs(e.ricci));
    einstein_ = std::move(e);
}

const EinsteinResult& MetricEvaluation::einstein() {
    ensure_einstein();
    return *einstein_;
}

double MetricEvaluation::delta_value(const JetScalar& target, int i) {
    if (i < 0 || i >= n_) throw std::invalid_argument("delta: index out of range");
    ensure_spray();
    double v = target.derivative(i).value();
    for (int m = 0; m < n_; ++m)
        v -= (*nonlinear_jets_)[at2(m, i)].value() *
             target.derivative(n_ + m).value();
    return v;
}

JetScalar MetricEvaluation::delta_jet(const JetScalar& target, int i) {
    if (i < 0 || i >= n_) throw std::invalid_argument("delta: index out of range");
    ensure_spray();
    const int cap = point_.order - 3;
    const int out = std::min(target.order() - 1, cap);
    if (out < 0)
        throw std::invalid_argument("delta_jet: not enough jet order for N");
    JetScalar d = target.derivative(i).truncated(out);
    for (int m = 0; m < n_; ++m)
        d -= (*nonlinear_jets_)[at2(m, i)].truncated(out) *
             target.derivative(n_ + m).truncated(out);
    return d;
}

// ---------------------------------------------------------------------------
// One-shot wrappers
// ---------------------------------------------------------------------------

std::pair<Matrix, Matrix> fundamental_tensor(const FinslerMetric& m,
                                             const PointState& p) {
    MetricEvaluation ev(m, p);
    return {ev.fundamental(), ev.fundamental_inverse()};
}

Tensor3 cartan_tensor(const FinslerMetric& m, const PointState& p) {
    MetricEvaluation ev(m, p);
    return ev.cartan();
}

std::pair<Vector, Matrix> spray_and_nonlinear_connection(const FinslerMetric& m,
                                                         const PointState& p) {
    MetricEvaluation ev(m, p);
    return {ev.spray(), ev.nonlinear()};
}

double delta_derivative(const FinslerMetric& m, const PointState& p,
                        const MetricFn& target, int i) {
    MetricEvaluation ev(m, p);
    const JetScalar t = target(ev.x_jets(), ev.y_jets());
    return ev.delta_value(t, i);
}

Tensor3 chern_coefficients(const FinslerMetric& m, const PointState& p) {
    MetricEvaluation ev(m, p);
    return ev.chern();
}

Tensor4 hh_curvature(const FinslerMetric& m, const PointState& p) {
    MetricEvaluation ev(m, p);
    return ev.hh_curvature();
}

EinsteinResult ricci_scalar_einstein(const FinslerMetric& m, const PointState& p) {
    MetricEvaluation ev(m, p);
    return ev.einstein();
}

CurvatureReport full_report(const FinslerMetric& m, const PointState& p) {
    MetricEvaluation ev(m, p);
    const int n = ev.dim();
    CurvatureReport r;
    r.F_value = ev.f_value();
    r.g = ev.fundamental();
    r.g_inv = ev.fundamental_inverse();
    r.cartan = ev.cartan();
    r.spray = ev.spray();
    r.nonlinear = ev.nonlinear();
    r.chern = ev.chern();
    r.hh_curvature = ev.hh_curvature();
    const EinsteinResult& e = ev.einstein();
    r.ricci = e.ricci;
    r.scal = e.scal;
    r.efree = e.efree;
    r.einstein_residual = e.residual;

    auto& d = r.diagnostics;

    // F(x, cy) = c F(x, y)
    double homog = 0.0;
    for (double c : {0.5, 2.0, 7.0}) {
        std::vector<double> cy = p.y;
        for (auto& v : cy) v *= c;
        homog = std::max(homog,
                         std::abs(m.value(p.x, cy) - c * r.F_value) / r.F_value);
    }
    d["homogeneity"] = homog;

    // g(x, 2y) = g(x, y): degree-0 homogeneity of the fundamental tensor
    {
        PointState scaled = p;
        scaled.order = 2;
        for (auto& v : scaled.y) v *= 2.0;
        MetricEvaluation ev2(m, scaled);
        d["g_scale_invariance"] =
            max_abs(Matrix(ev2.fundamental() - r.g)) / residual_scale(max_abs(r.g));
    }

    // Euler: g_ij y^i y^j = F^2
    {
        double quad = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) quad += r.g(i, j) * p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(j)];
        const double f2 = ev.f2_jet().value();
        d["euler"] = std::abs(quad - f2) / f2;
    }

    d["f_squared_consistency"] =
        std::abs(ev.f_jet().value() * ev.f_jet().value() - ev.f2_jet().value()) /
        residual_scale(ev.f2_jet().value());

    d["g_inverse"] = max_abs(Matrix(r.g * r.g_inv - Matrix::Identity(n, n)));

    // Cartan total symmetry (two transpositions generate S3) and A_ijk y^k
    {
        double sym = 0.0, ycontr = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) {
                    sym = std::max(sym, std::abs(r.cartan(i, j, k) - r.cartan(j, i, k)));
                    sym = std::max(sym, std::abs(r.cartan(i, j, k) - r.cartan(i, k, j)));
                    s += r.cartan(i, j, k) * p.y[static_cast<std::size_t>(k)];
                }
                ycontr = std::max(ycontr, std::abs(s));
            }
        d["cartan_symmetry"] = sym;
        d["cartan_y"] = ycontr;
    }

    // Chern lower-index symmetry (mirrored at construction, reported anyway)
    {
        double sym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    sym = std::max(sym, std::abs(r.chern(i, j, k) - r.chern(i, k, j)));
        d["chern_symmetry"] = sym;
    }

    // Horizontal almost-g-compatibility:
    // delta g_ij / delta x^k = g_mj Gamma^m_ik + g_im Gamma^m_jk
    {
        double compat = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double lhs = ev.delta_value(ev.g_jet(i, j), k);
                    for (int mm = 0; mm < n; ++mm)
                        lhs -= r.g(mm, j) * r.chern(mm, i, k) +
                               r.g(i, mm) * r.chern(mm, j, k);
                    compat = std::max(compat, std::abs(lhs));
                }
        d["compatibility"] = compat;
    }

    // N^i_j = Gamma^i_jk y^k
    {
        double res = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double c = r.nonlinear(i, j);
                for (int k = 0; k < n; ++k) c -= r.chern(i, j, k) * p.y[static_cast<std::size_t>(k)];
                res = std::max(res, std::abs(c));
            }
        d["n_gamma_consistency"] = res;
    }

    {
        double anti = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        anti = std::max(anti, std::abs(r.hh_curvature(j, i, k, l) +
                                                       r.hh_curvature(j, i, l, k)));
        d["hh_antisymmetry"] = anti;
    }

    d["efree_trace"] =
        std::abs((r.g_inv.transpose().cwiseProduct(r.efree)).sum()) /
        residual_scale(std::abs(r.scal));

    // delta F^2 / delta x^i = 0: F is horizontally constant for the
    // canonical connection
    {
        double hf = 0.0;
        for (int i = 0; i < n; ++i)
            hf = std::max(hf, std::abs(ev.delta_value(ev.f2_jet(), i)));
        d["delta_f2"] = hf / residual_scale(ev.f2_jet().value());
    }

    d["einstein_residual"] = r.einstein_residual;
    return r;
}

}  // namespace finsler
