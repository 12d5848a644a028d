#pragma once

#include "sentinel/types.hpp"

#include <cmath>

namespace sentinel {

struct OcsvmParams {
    Scalar nu = 0.5;
    Scalar gamma = -1.0;  // <= 0 means "auto": 1 / D
    Scalar tol = 1e-3;    // KKT residual tolerance for the dual
    long max_iter = 1000000;
};

struct ConvergenceError : std::runtime_error {
    Scalar residual;
    ConvergenceError(const std::string& what, Scalar r)
        : std::runtime_error(what), residual(r) {}
};

/// One-class SVM with RBF kernel, fit by pairwise coordinate (SMO-style)
/// updates on the dual: minimize 1/2 a'Ka subject to 0 <= a_i <= 1/(nu n),
/// sum a_i = 1. Training vectors are retained for kernel evaluation.
class OcsvmModel {
public:
    static OcsvmModel fit(const Matrix& data, const OcsvmParams& params);

    /// sum_i a_i K(x_i, row) - rho.
    Scalar decision(const Vector& row) const;

    /// +1 inside the learned region, -1 outside; zero decision counts as +1.
    int predict(const Vector& row) const;

    const Vector& alpha() const { return alpha_; }
    Scalar rho() const { return rho_; }
    Scalar gamma() const { return gamma_; }
    Scalar upper_bound() const { return upper_bound_; }
    const Matrix& support_data() const { return data_; }
    Scalar kkt_residual() const { return kkt_residual_; }

    OcsvmModel(Matrix data, Vector alpha, Scalar rho, Scalar gamma, Scalar upper_bound,
               Scalar kkt_residual)
        : data_(std::move(data)), alpha_(std::move(alpha)), rho_(rho), gamma_(gamma),
          upper_bound_(upper_bound), kkt_residual_(kkt_residual) {}

private:
    Matrix data_;
    Vector alpha_;
    Scalar rho_ = 0.0;
    Scalar gamma_ = 1.0;
    Scalar upper_bound_ = 1.0;
    Scalar kkt_residual_ = 0.0;
};

template <typename A, typename B>
Scalar rbf_kernel(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, Scalar gamma) {
    return std::exp(-gamma * (a.reshaped() - b.reshaped()).squaredNorm());
}

}  // namespace sentinel
