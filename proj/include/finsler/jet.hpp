#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace finsler {

/// Exponent tuple of a mixed partial derivative, e.g. (2,0,1) for
/// d^3 / dz0^2 dz2. Ordering is graded lexicographic (total degree first,
/// then lexicographic on the exponents), so coefficient storage is canonical
/// and truncating to a lower degree is a prefix operation.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);

    static MultiIndex zero(int num_vars);
    static MultiIndex unit(int num_vars, int slot);

    int size() const { return static_cast<int>(e_.size()); }
    int degree() const;
    int operator[](int slot) const { return e_[static_cast<std::size_t>(slot)]; }
    const std::vector<int>& exponents() const { return e_; }

    /// Copy with the exponent in `slot` incremented by one.
    MultiIndex plus(int slot) const;

    bool operator==(const MultiIndex&) const = default;
    bool operator<(const MultiIndex& rhs) const;

    std::string to_string() const;

private:
    std::vector<int> e_;
};

namespace detail {
struct JetShape;
using JetShapePtr = std::shared_ptr<const JetShape>;
/// Interned coefficient layout (index enumeration, product and derivative
/// tables) for a given (num_vars, order). Built once, shared, immutable.
JetShapePtr jet_shape(int num_vars, int order);
}  // namespace detail

/// Truncated multivariate Taylor expansion of a smooth function at a point:
/// the value plus every mixed partial derivative up to a fixed total order.
/// Stored coefficients are Taylor coefficients, i.e. the partial derivative
/// divided by the multi-index factorial.
///
/// Arithmetic (+, -, *, /) and the elementary functions (sqrt, exp, log,
/// sin, cos, pow) are exact on the truncation, so extracted partials carry
/// rounding error only. Values are immutable apart from set_coeff; all
/// operations are pure, which makes concurrent evaluation at many points
/// safe with no shared mutable state.
class JetScalar {
public:
    JetScalar() = default;  // invalid placeholder; any use throws
    JetScalar(int num_vars, int order);

    static JetScalar constant(int num_vars, int order, double value);
    static JetScalar variable(int num_vars, int order, int slot, double value);

    bool valid() const { return shape_ != nullptr; }
    int num_vars() const;
    int order() const;
    std::size_t coefficient_count() const { return c_.size(); }

    double value() const;
    double coeff(const MultiIndex& idx) const;
    void set_coeff(const MultiIndex& idx, double v);

    /// True mixed partial derivative: coefficient times the multi-index
    /// factorial.
    double partial(const MultiIndex& idx) const;

    /// d/dz_slot as a jet one order lower.
    JetScalar derivative(int slot) const;

    /// Same function truncated to a lower order (prefix of the coefficients).
    JetScalar truncated(int new_order) const;

    JetScalar operator-() const;
    JetScalar& operator+=(const JetScalar& rhs);
    JetScalar& operator-=(const JetScalar& rhs);
    JetScalar& operator*=(const JetScalar& rhs);
    JetScalar& operator/=(const JetScalar& rhs);
    JetScalar& operator+=(double s);
    JetScalar& operator-=(double s);
    JetScalar& operator*=(double s);
    JetScalar& operator/=(double s);

    friend JetScalar operator+(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator-(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator*(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator/(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator+(const JetScalar& a, double s);
    friend JetScalar operator+(double s, const JetScalar& a);
    friend JetScalar operator-(const JetScalar& a, double s);
    friend JetScalar operator-(double s, const JetScalar& a);
    friend JetScalar operator*(const JetScalar& a, double s);
    friend JetScalar operator*(double s, const JetScalar& a);
    friend JetScalar operator/(const JetScalar& a, double s);
    friend JetScalar operator/(double s, const JetScalar& a);

    friend JetScalar sqrt(const JetScalar& a);
    friend JetScalar exp(const JetScalar& a);
    friend JetScalar log(const JetScalar& a);
    friend JetScalar sin(const JetScalar& a);
    friend JetScalar cos(const JetScalar& a);
    friend JetScalar pow(const JetScalar& a, double r);

private:
    explicit JetScalar(detail::JetShapePtr shape);
    void require_valid() const;
    int rank_of(const MultiIndex& idx) const;
    static JetScalar compose(const JetScalar& a, std::span<const double> series);
    static JetScalar reciprocal(const JetScalar& b);

    detail::JetShapePtr shape_;
    std::vector<double> c_;
};

/// Constant jet with the same (num_vars, order) as `proto`.
JetScalar constant_like(const JetScalar& proto, double value);

/// Seeds the 2n coordinate jets for a point (x, y) of a slit tangent bundle:
/// jet k carries value x_k (k < n) or y_{k-n} (k >= n) and a unit first-order
/// coefficient in its own slot. Slots 0..n-1 are base coordinates, n..2n-1
/// fiber coordinates.
std::vector<JetScalar> seed_variables(std::span<const double> x,
                                      std::span<const double> y, int order);

/// Free-function form of JetScalar::partial.
double extract_partial(const JetScalar& a, const MultiIndex& idx);

}  // namespace finsler
