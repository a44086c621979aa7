#include "finsler/finite_difference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace finsler {

namespace {

double central_difference(const RealFunction& f, std::vector<double>& p,
                          std::vector<int>& idx, double h) {
    int slot = -1;
    for (std::size_t k = 0; k < idx.size(); ++k)
        if (idx[k] > 0) {
            slot = static_cast<int>(k);
            break;
        }
    if (slot < 0) {
        const double v = f(p);
        if (!std::isfinite(v))
            throw std::domain_error("fd_partial: non-finite evaluation of f");
        return v;
    }
    auto s = static_cast<std::size_t>(slot);
    idx[s] -= 1;
    p[s] += h;
    const double fp = central_difference(f, p, idx, h);
    p[s] -= 2.0 * h;
    const double fm = central_difference(f, p, idx, h);
    p[s] += h;
    idx[s] += 1;
    return (fp - fm) / (2.0 * h);
}

}  // namespace

double fd_partial(const RealFunction& f, std::span<const double> point,
                  const MultiIndex& idx, double step) {
    if (idx.size() != static_cast<int>(point.size()))
        throw std::invalid_argument("fd_partial: index arity does not match point");
    const int deg = idx.degree();
    if (deg > 4)
        throw std::invalid_argument("fd_partial: supported up to total degree 4");
    double h = step;
    if (!(h > 0.0))
        h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (4.0 + deg));

    std::vector<double> p(point.begin(), point.end());
    std::vector<int> e = idx.exponents();
    const double coarse = central_difference(f, p, e, h);
    const double fine = central_difference(f, p, e, h / 2.0);
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace finsler
