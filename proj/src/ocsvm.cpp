#include "sentinel/ocsvm.hpp"

#include <cmath>
#include <limits>

namespace sentinel {

OcsvmModel OcsvmModel::fit(const Matrix& data, const OcsvmParams& params) {
    const Index n = data.rows();
    if (n < 2) throw ValidationError("ocsvm requires at least 2 rows");
    if (params.nu <= 0.0 || params.nu > 1.0) throw ValidationError("nu must be in (0, 1]");

    const Scalar gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<Scalar>(data.cols());
    const Scalar C = 1.0 / (params.nu * static_cast<Scalar>(n));

    // Full kernel matrix; training sets here are desk-scale.
    Matrix K(n, n);
    for (Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Index j = i + 1; j < n; ++j) {
            K(i, j) = K(j, i) = rbf_kernel(data.row(i), data.row(j), gamma);
        }
    }

    // libsvm-style feasible start: the first floor(nu n) points at the box
    // bound, the remainder fraction on the next one.
    Vector alpha = Vector::Zero(n);
    Scalar budget = 1.0;
    for (Index i = 0; i < n && budget > 0; ++i) {
        alpha(i) = std::min(C, budget);
        budget -= alpha(i);
    }

    Vector grad = K * alpha;  // gradient of 1/2 a'Ka

    Scalar residual = std::numeric_limits<Scalar>::infinity();
    long it = 0;
    for (; it < params.max_iter; ++it) {
        // Most-violating pair: mass can move from j (a_j > 0) to i (a_i < C)
        // whenever grad(i) < grad(j).
        Index best_i = -1, best_j = -1;
        Scalar min_up = std::numeric_limits<Scalar>::infinity();
        Scalar max_down = -std::numeric_limits<Scalar>::infinity();
        for (Index k = 0; k < n; ++k) {
            if (alpha(k) < C && grad(k) < min_up) {
                min_up = grad(k);
                best_i = k;
            }
            if (alpha(k) > 0 && grad(k) > max_down) {
                max_down = grad(k);
                best_j = k;
            }
        }
        residual = max_down - min_up;
        if (best_i < 0 || best_j < 0 || residual <= params.tol) break;

        const Scalar eta = K(best_i, best_i) + K(best_j, best_j) - 2.0 * K(best_i, best_j);
        Scalar delta = eta > 1e-12 ? residual / eta : std::numeric_limits<Scalar>::infinity();
        delta = std::min({delta, C - alpha(best_i), alpha(best_j)});
        alpha(best_i) += delta;
        alpha(best_j) -= delta;
        grad += delta * (K.col(best_i) - K.col(best_j));
    }
    if (residual > params.tol) {
        throw ConvergenceError("ocsvm did not converge within iteration budget; residual=" +
                                   std::to_string(residual),
                               residual);
    }

    // rho from margin support vectors, falling back to the bound midpoint.
    Scalar rho_sum = 0.0;
    Index rho_count = 0;
    for (Index k = 0; k < n; ++k) {
        if (alpha(k) > 1e-12 && alpha(k) < C - 1e-12) {
            rho_sum += grad(k);
            ++rho_count;
        }
    }
    Scalar rho;
    if (rho_count > 0) {
        rho = rho_sum / static_cast<Scalar>(rho_count);
    } else {
        Scalar ub = std::numeric_limits<Scalar>::infinity();
        Scalar lb = -std::numeric_limits<Scalar>::infinity();
        for (Index k = 0; k < n; ++k) {
            if (alpha(k) < C) ub = std::min(ub, grad(k));
            if (alpha(k) > 0) lb = std::max(lb, grad(k));
        }
        rho = (ub + lb) / 2.0;
    }

    return OcsvmModel(data, std::move(alpha), rho, gamma, C, residual);
}

Scalar OcsvmModel::decision(const Vector& row) const {
    if (row.size() != data_.cols()) throw ValidationError("row width does not match training width");
    Scalar sum = 0.0;
    for (Index i = 0; i < data_.rows(); ++i) {
        if (alpha_(i) > 0) sum += alpha_(i) * rbf_kernel(data_.row(i), row, gamma_);
    }
    return sum - rho_;
}

int OcsvmModel::predict(const Vector& row) const {
    return decision(row) >= 0.0 ? +1 : -1;
}

}  // namespace sentinel
