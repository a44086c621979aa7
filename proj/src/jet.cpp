#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace finsler {

// ---------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
    for (int e : e_)
        if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
}

MultiIndex MultiIndex::zero(int num_vars) {
    return MultiIndex(std::vector<int>(static_cast<std::size_t>(num_vars), 0));
}

MultiIndex MultiIndex::unit(int num_vars, int slot) {
    if (slot < 0 || slot >= num_vars)
        throw std::invalid_argument("MultiIndex::unit: slot out of range");
    std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
    e[static_cast<std::size_t>(slot)] = 1;
    return MultiIndex(std::move(e));
}

int MultiIndex::degree() const {
    int d = 0;
    for (int e : e_) d += e;
    return d;
}

MultiIndex MultiIndex::plus(int slot) const {
    std::vector<int> e = e_;
    e.at(static_cast<std::size_t>(slot)) += 1;
    return MultiIndex(std::move(e));
}

bool MultiIndex::operator<(const MultiIndex& rhs) const {
    const int da = degree();
    const int db = rhs.degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(e_.begin(), e_.end(), rhs.e_.begin(),
                                        rhs.e_.end());
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < e_.size(); ++k) {
        if (k) os << ',';
        os << e_[k];
    }
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------------------
// JetShape: interned layout tables per (num_vars, order)
// ---------------------------------------------------------------------------

namespace detail {

struct JetShape {
    int num_vars = 0;
    int order = 0;
    std::vector<MultiIndex> indices;          // graded-lex enumeration
    std::map<std::vector<int>, int> rank;     // exponents -> position
    struct Triple {
        std::int32_t a, b, out;
    };
    std::vector<Triple> products;             // truncated Cauchy product
    // deriv[slot][dst_rank] = (src_rank, exponent+1)
    std::vector<std::vector<std::pair<std::int32_t, double>>> deriv;
    std::vector<double> partial_scale;        // prod of exponent factorials
    std::vector<std::size_t> count_up_to;     // #indices of degree <= d

    std::size_t count() const { return indices.size(); }
};

namespace {

void append_exact_degree(int vars_left, int deg, std::vector<int>& prefix,
                         std::vector<MultiIndex>& out) {
    if (vars_left == 1) {
        prefix.push_back(deg);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int e = 0; e <= deg; ++e) {
        prefix.push_back(e);
        append_exact_degree(vars_left - 1, deg - e, prefix, out);
        prefix.pop_back();
    }
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

JetShapePtr jet_shape(int num_vars, int order) {
    if (num_vars < 1) throw std::invalid_argument("jet: num_vars must be >= 1");
    if (order < 0) throw std::invalid_argument("jet: order must be >= 0");

    static std::mutex mu;
    static std::map<std::pair<int, int>, JetShapePtr> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(num_vars, order);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    auto s = std::make_shared<JetShape>();
    s->num_vars = num_vars;
    s->order = order;

    std::vector<int> prefix;
    s->count_up_to.assign(static_cast<std::size_t>(order) + 1, 0);
    for (int d = 0; d <= order; ++d) {
        append_exact_degree(num_vars, d, prefix, s->indices);
        s->count_up_to[static_cast<std::size_t>(d)] = s->indices.size();
    }
    for (std::size_t r = 0; r < s->indices.size(); ++r)
        s->rank.emplace(s->indices[r].exponents(), static_cast<int>(r));

    const auto n = static_cast<std::int32_t>(s->indices.size());
    for (std::int32_t a = 0; a < n; ++a) {
        const int da = s->indices[static_cast<std::size_t>(a)].degree();
        for (std::int32_t b = 0; b < n; ++b) {
            const auto& ib = s->indices[static_cast<std::size_t>(b)];
            if (da + ib.degree() > order) continue;
            std::vector<int> sum = s->indices[static_cast<std::size_t>(a)].exponents();
            for (int k = 0; k < num_vars; ++k) sum[static_cast<std::size_t>(k)] += ib[k];
            s->products.push_back({a, b, static_cast<std::int32_t>(s->rank.at(sum))});
        }
    }

    const std::size_t smaller =
        order >= 1 ? s->count_up_to[static_cast<std::size_t>(order) - 1] : 0;
    s->deriv.assign(static_cast<std::size_t>(num_vars), {});
    for (int slot = 0; slot < num_vars; ++slot) {
        auto& tab = s->deriv[static_cast<std::size_t>(slot)];
        tab.reserve(smaller);
        for (std::size_t dst = 0; dst < smaller; ++dst) {
            const MultiIndex src = s->indices[dst].plus(slot);
            tab.emplace_back(s->rank.at(src.exponents()),
                             static_cast<double>(s->indices[dst][slot] + 1));
        }
    }

    s->partial_scale.reserve(s->indices.size());
    for (const auto& idx : s->indices) {
        double scale = 1.0;
        for (int k = 0; k < num_vars; ++k) scale *= factorial(idx[k]);
        s->partial_scale.push_back(scale);
    }

    cache.emplace(key, s);
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JetScalar
// ---------------------------------------------------------------------------

namespace {

void require_same_shape(const JetScalar& a, const JetScalar& b) {
    if (!a.valid() || !b.valid())
        throw std::invalid_argument("jet arithmetic on an uninitialized jet");
    if (a.num_vars() != b.num_vars() || a.order() != b.order()) {
        std::ostringstream os;
        os << "jet shape mismatch: (" << a.num_vars() << ", order " << a.order()
           << ") vs (" << b.num_vars() << ", order " << b.order() << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

JetScalar::JetScalar(detail::JetShapePtr shape)
    : shape_(std::move(shape)), c_(shape_->count(), 0.0) {}

JetScalar::JetScalar(int num_vars, int order)
    : JetScalar(detail::jet_shape(num_vars, order)) {}

JetScalar JetScalar::constant(int num_vars, int order, double value) {
    JetScalar j(num_vars, order);
    j.c_[0] = value;
    return j;
}

JetScalar JetScalar::variable(int num_vars, int order, int slot, double value) {
    if (order < 1)
        throw std::invalid_argument("jet variable needs order >= 1");
    JetScalar j(num_vars, order);
    j.c_[0] = value;
    j.c_[static_cast<std::size_t>(
        j.rank_of(MultiIndex::unit(num_vars, slot)))] = 1.0;
    return j;
}

void JetScalar::require_valid() const {
    if (!shape_) throw std::invalid_argument("use of an uninitialized jet");
}

int JetScalar::num_vars() const {
    require_valid();
    return shape_->num_vars;
}

int JetScalar::order() const {
    require_valid();
    return shape_->order;
}

double JetScalar::value() const {
    require_valid();
    return c_[0];
}

int JetScalar::rank_of(const MultiIndex& idx) const {
    require_valid();
    if (idx.size() != shape_->num_vars)
        throw std::invalid_argument("multi-index arity does not match jet");
    if (idx.degree() > shape_->order)
        throw std::invalid_argument("multi-index degree exceeds jet order");
    return shape_->rank.at(idx.exponents());
}

double JetScalar::coeff(const MultiIndex& idx) const {
    return c_[static_cast<std::size_t>(rank_of(idx))];
}

void JetScalar::set_coeff(const MultiIndex& idx, double v) {
    c_[static_cast<std::size_t>(rank_of(idx))] = v;
}

double JetScalar::partial(const MultiIndex& idx) const {
    const auto r = static_cast<std::size_t>(rank_of(idx));
    return c_[r] * shape_->partial_scale[r];
}

JetScalar JetScalar::derivative(int slot) const {
    require_valid();
    if (slot < 0 || slot >= shape_->num_vars)
        throw std::invalid_argument("derivative: slot out of range");
    if (shape_->order < 1)
        throw std::invalid_argument("derivative: jet order is already 0");
    JetScalar r(detail::jet_shape(shape_->num_vars, shape_->order - 1));
    const auto& tab = shape_->deriv[static_cast<std::size_t>(slot)];
    for (std::size_t dst = 0; dst < tab.size(); ++dst)
        r.c_[dst] = c_[static_cast<std::size_t>(tab[dst].first)] * tab[dst].second;
    return r;
}

JetScalar JetScalar::truncated(int new_order) const {
    require_valid();
    if (new_order == shape_->order) return *this;
    if (new_order < 0 || new_order > shape_->order)
        throw std::invalid_argument("truncated: order out of range");
    JetScalar r(detail::jet_shape(shape_->num_vars, new_order));
    std::copy_n(c_.begin(), r.c_.size(), r.c_.begin());
    return r;
}

JetScalar JetScalar::operator-() const {
    require_valid();
    JetScalar r = *this;
    for (double& v : r.c_) v = -v;
    return r;
}

JetScalar& JetScalar::operator+=(const JetScalar& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += rhs.c_[k];
    return *this;
}

JetScalar& JetScalar::operator-=(const JetScalar& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= rhs.c_[k];
    return *this;
}

JetScalar& JetScalar::operator*=(const JetScalar& rhs) {
    *this = *this * rhs;
    return *this;
}

JetScalar& JetScalar::operator/=(const JetScalar& rhs) {
    *this = *this / rhs;
    return *this;
}

JetScalar& JetScalar::operator+=(double s) {
    require_valid();
    c_[0] += s;
    return *this;
}

JetScalar& JetScalar::operator-=(double s) {
    require_valid();
    c_[0] -= s;
    return *this;
}

JetScalar& JetScalar::operator*=(double s) {
    require_valid();
    for (double& v : c_) v *= s;
    return *this;
}

JetScalar& JetScalar::operator/=(double s) {
    require_valid();
    for (double& v : c_) v /= s;
    return *this;
}

JetScalar operator+(const JetScalar& a, const JetScalar& b) {
    JetScalar r = a;
    r += b;
    return r;
}

JetScalar operator-(const JetScalar& a, const JetScalar& b) {
    JetScalar r = a;
    r -= b;
    return r;
}

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
    require_same_shape(a, b);
    JetScalar r(a.shape_);
    for (const auto& t : a.shape_->products)
        r.c_[static_cast<std::size_t>(t.out)] +=
            a.c_[static_cast<std::size_t>(t.a)] * b.c_[static_cast<std::size_t>(t.b)];
    return r;
}

JetScalar JetScalar::reciprocal(const JetScalar& b) {
    b.require_valid();
    const double b0 = b.c_[0];
    if (b0 == 0.0)
        throw std::domain_error("jet division: divisor has zero value");
    // 1/b = (1/b0) sum_k (-(b/b0 - 1))^k over the nilpotent part
    JetScalar neg_e = b * (-1.0 / b0);
    neg_e.c_[0] += 1.0;
    JetScalar acc = constant_like(b, 1.0);
    JetScalar term = acc;
    for (int k = 1; k <= b.order(); ++k) {
        term = term * neg_e;
        acc += term;
    }
    acc *= 1.0 / b0;
    return acc;
}

JetScalar operator/(const JetScalar& a, const JetScalar& b) {
    require_same_shape(a, b);
    return a * JetScalar::reciprocal(b);
}

JetScalar operator+(const JetScalar& a, double s) {
    JetScalar r = a;
    r += s;
    return r;
}

JetScalar operator+(double s, const JetScalar& a) { return a + s; }

JetScalar operator-(const JetScalar& a, double s) {
    JetScalar r = a;
    r -= s;
    return r;
}

JetScalar operator-(double s, const JetScalar& a) {
    JetScalar r = -a;
    r += s;
    return r;
}

JetScalar operator*(const JetScalar& a, double s) {
    JetScalar r = a;
    r *= s;
    return r;
}

JetScalar operator*(double s, const JetScalar& a) { return a * s; }

JetScalar operator/(const JetScalar& a, double s) {
    JetScalar r = a;
    r /= s;
    return r;
}

JetScalar operator/(double s, const JetScalar& a) {
    return JetScalar::reciprocal(a) * s;
}

// Composes the univariate Taylor series (coefficients f^(k)(a0)/k!) with the
// nilpotent part of `a` by Horner evaluation over the jet ring.
JetScalar JetScalar::compose(const JetScalar& a, std::span<const double> series) {
    a.require_valid();
    JetScalar nil = a;
    nil.c_[0] = 0.0;
    JetScalar res = constant_like(a, series[static_cast<std::size_t>(a.order())]);
    for (int k = a.order() - 1; k >= 0; --k) {
        res = res * nil;
        res.c_[0] += series[static_cast<std::size_t>(k)];
    }
    return res;
}

JetScalar sqrt(const JetScalar& a) {
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw std::domain_error("jet sqrt: value must be positive");
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    c[0] = std::sqrt(a0);
    for (int k = 1; k <= a.order(); ++k)
        c[static_cast<std::size_t>(k)] =
            c[static_cast<std::size_t>(k - 1)] * (0.5 - (k - 1)) / (k * a0);
    return JetScalar::compose(a, c);
}

JetScalar exp(const JetScalar& a) {
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    c[0] = std::exp(a.value());
    for (int k = 1; k <= a.order(); ++k)
        c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] / k;
    return JetScalar::compose(a, c);
}

JetScalar log(const JetScalar& a) {
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw std::domain_error("jet log: value must be positive");
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    c[0] = std::log(a0);
    if (a.order() >= 1) c[1] = 1.0 / a0;
    for (int k = 2; k <= a.order(); ++k)
        c[static_cast<std::size_t>(k)] =
            -c[static_cast<std::size_t>(k - 1)] * (k - 1) / (k * a0);
    return JetScalar::compose(a, c);
}

JetScalar sin(const JetScalar& a) {
    const double s = std::sin(a.value());
    const double co = std::cos(a.value());
    const double cycle[4] = {s, co, -s, -co};
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    double kfact = 1.0;
    for (int k = 0; k <= a.order(); ++k) {
        if (k > 0) kfact *= k;
        c[static_cast<std::size_t>(k)] = cycle[k % 4] / kfact;
    }
    return JetScalar::compose(a, c);
}

JetScalar cos(const JetScalar& a) {
    const double s = std::sin(a.value());
    const double co = std::cos(a.value());
    const double cycle[4] = {co, -s, -co, s};
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    double kfact = 1.0;
    for (int k = 0; k <= a.order(); ++k) {
        if (k > 0) kfact *= k;
        c[static_cast<std::size_t>(k)] = cycle[k % 4] / kfact;
    }
    return JetScalar::compose(a, c);
}

JetScalar pow(const JetScalar& a, double r) {
    const double a0 = a.value();
    if (!(a0 > 0.0))
        throw std::domain_error("jet pow: value must be positive");
    std::vector<double> c(static_cast<std::size_t>(a.order()) + 1);
    c[0] = std::pow(a0, r);
    for (int k = 1; k <= a.order(); ++k)
        c[static_cast<std::size_t>(k)] =
            c[static_cast<std::size_t>(k - 1)] * (r - (k - 1)) / (k * a0);
    return JetScalar::compose(a, c);
}

JetScalar constant_like(const JetScalar& proto, double value) {
    return JetScalar::constant(proto.num_vars(), proto.order(), value);
}

std::vector<JetScalar> seed_variables(std::span<const double> x,
                                      std::span<const double> y, int order) {
    if (x.empty() || x.size() != y.size())
        throw std::invalid_argument(
            "seed_variables: x and y must have equal nonzero length");
    if (order < 1) throw std::invalid_argument("seed_variables: order must be >= 1");
    const int n = static_cast<int>(x.size());
    std::vector<JetScalar> jets;
    jets.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        jets.push_back(JetScalar::variable(2 * n, order, i, x[static_cast<std::size_t>(i)]));
    for (int i = 0; i < n; ++i)
        jets.push_back(
            JetScalar::variable(2 * n, order, n + i, y[static_cast<std::size_t>(i)]));
    return jets;
}

double extract_partial(const JetScalar& a, const MultiIndex& idx) {
    return a.partial(idx);
}

}  // namespace finsler
