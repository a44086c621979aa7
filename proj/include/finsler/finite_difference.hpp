#pragma once

#include <functional>
#include <span>

#include "finsler/jet.hpp"

namespace finsler {

using RealFunction = std::function<double(std::span<const double>)>;

/// Central finite-difference estimate of a mixed partial derivative, with
/// one level of Richardson extrapolation. The composite central-difference
/// operator has an even error expansion, so extrapolating from steps h and
/// h/2 leaves a truncation error of O(h^4); rounding grows like eps / h^deg.
/// A step of 0 picks h = eps^(1/(4+deg)), which balances the two.
///
/// This is the independent oracle for every jet-computed derivative: it only
/// ever calls `f` at shifted points and shares nothing with the jet algebra.
/// Supported up to total degree 4. Non-finite evaluations of `f` throw
/// std::domain_error.
double fd_partial(const RealFunction& f, std::span<const double> point,
                  const MultiIndex& idx, double step = 0.0);

}  // namespace finsler
