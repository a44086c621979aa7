#pragma once

#include <Eigen/Dense>
#include <vector>

namespace finsler {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense rank-3 array of doubles, all extents equal.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n)
        : n_(n), v_(static_cast<std::size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k) { return v_[pos(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v_[pos(i, j, k)]; }
    const std::vector<double>& flat() const { return v_; }

private:
    std::size_t pos(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }
    int n_ = 0;
    std::vector<double> v_;
};

/// Dense rank-4 array of doubles, all extents equal.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int n)
        : n_(n), v_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k, int l) { return v_[pos(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const {
        return v_[pos(i, j, k, l)];
    }
    const std::vector<double>& flat() const { return v_; }

private:
    std::size_t pos(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }
    int n_ = 0;
    std::vector<double> v_;
};

double max_abs(const Matrix& m);
double max_abs(const Vector& v);
double max_abs(const Tensor3& t);
double max_abs(const Tensor4& t);

/// Scale used for relative residuals: max(1, |magnitude|), so thresholds stay
/// dimension independent and are not inflated near zero.
inline double residual_scale(double magnitude) {
    const double m = magnitude < 0 ? -magnitude : magnitude;
    return m > 1.0 ? m : 1.0;
}

}  // namespace finsler
