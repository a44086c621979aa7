#include "finsler/tensor.hpp"

#include <cmath>

namespace finsler {

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double max_abs(const Tensor3& t) {
    double m = 0.0;
    for (double v : t.flat()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const Tensor4& t) {
    double m = 0.0;
    for (double v : t.flat()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace finsler
