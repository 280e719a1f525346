#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

#include "aatr/dataset.hpp"
#include "aatr/grid.hpp"

namespace aatr {

// Fitted linear functional model: y_hat = beta0 + dt * x_std . beta.
// Carries the standardization record so raw inputs can be predicted.
struct RidgeFit {
    double beta0 = 0.0;
    Vector beta;        // p
    double lambda = 0.0;
    Vector gamma;       // p, shrinkage target (zeros for baselines)
    Grid grid;
    Vector col_means;   // p
    Vector col_scales;  // p

    explicit RidgeFit(const Grid& g) : grid(g) {}
};

// Precomputed normal-equation pieces for one standardized training set,
// shared across lambda values. z = dt * x.
struct RidgeWorkspace {
    Matrix ztz;       // p x p
    Vector zty;       // p, z^T (y - ybar)
    double y_mean;
    double dt;

    explicit RidgeWorkspace(const FunctionalDataset& ds) {
        if (!ds.standardized)
            throw std::invalid_argument("RidgeWorkspace: dataset must be standardized");
        const double d = ds.grid.dt();
        Matrix z = d * ds.x;
        ztz = z.transpose() * z;
        y_mean = ds.y.mean();
        zty = z.transpose() * (ds.y.array() - y_mean).matrix();
        dt = d;
    }
};

// Nonzero-centered ridge: minimizes
//   sum_i (y_i - b0 - dt * x_i . beta)^2 + lambda * dt * ||beta - gamma||^2
// via (Z^T Z + lambda dt I) beta = Z^T (y - ybar) + lambda dt gamma.
inline RidgeFit solve_centered_ridge(const FunctionalDataset& ds, const Vector& gamma,
                                     double lambda, const RidgeWorkspace& ws) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("solve_centered_ridge: need lambda > 0");
    if (gamma.size() != ds.p())
        throw std::invalid_argument("solve_centered_ridge: gamma length mismatch");
    if (!gamma.allFinite())
        throw std::invalid_argument("solve_centered_ridge: non-finite gamma");

    const double ld = lambda * ws.dt;
    Matrix lhs = ws.ztz;
    lhs.diagonal().array() += ld;
    Vector rhs = ws.zty + ld * gamma;

    RidgeFit fit(ds.grid);
    fit.beta = lhs.ldlt().solve(rhs);
    fit.beta0 = ws.y_mean;
    fit.lambda = lambda;
    fit.gamma = gamma;
    fit.col_means = ds.col_means;
    fit.col_scales = ds.col_scales;
    return fit;
}

inline RidgeFit solve_centered_ridge(const FunctionalDataset& ds, const Vector& gamma,
                                     double lambda) {
    if (!ds.standardized)
        throw std::invalid_argument("solve_centered_ridge: dataset must be standardized");
    return solve_centered_ridge(ds, gamma, lambda, RidgeWorkspace(ds));
}

// Minimum-norm least squares via rank-truncated SVD of Z.
inline RidgeFit solve_min_norm_ls(const FunctionalDataset& ds) {
    if (!ds.standardized)
        throw std::invalid_argument("solve_min_norm_ls: dataset must be standardized");
    Matrix z = ds.grid.dt() * ds.x;
    const double ybar = ds.y.mean();
    Vector yc = ds.y.array() - ybar;

    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = std::max(ds.n(), Eigen::Index(ds.p())) *
                          std::numeric_limits<double>::epsilon() *
                          (sv.size() > 0 ? sv[0] : 0.0);
    Vector inv = Vector::Zero(sv.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv[k] > cutoff) inv[k] = 1.0 / sv[k];

    RidgeFit fit(ds.grid);
    fit.beta = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * yc);
    fit.beta0 = ybar;
    fit.lambda = 0.0;
    fit.gamma = Vector::Zero(ds.p());
    fit.col_means = ds.col_means;
    fit.col_scales = ds.col_scales;
    return fit;
}

// (p-2) x p second-difference operator.
inline Matrix second_difference_operator(int p) {
    if (p < 3) throw std::invalid_argument("second_difference_operator: need p >= 3");
    Matrix d2 = Matrix::Zero(p - 2, p);
    for (int r = 0; r < p - 2; ++r) {
        d2(r, r) = 1.0;
        d2(r, r + 1) = -2.0;
        d2(r, r + 2) = 1.0;
    }
    return d2;
}

// Roughness baseline: RSS + lambda * dt^-3 * ||D2 beta||^2, which
// approximates lambda * int (beta'')^2.
inline RidgeFit solve_roughness_ridge(const FunctionalDataset& ds, double lambda) {
    if (!ds.standardized)
        throw std::invalid_argument("solve_roughness_ridge: dataset must be standardized");
    if (!(lambda > 0.0))
        throw std::invalid_argument("solve_roughness_ridge: need lambda > 0");
    const int p = ds.p();
    if (p < 3) throw std::invalid_argument("solve_roughness_ridge: need p >= 3");

    const double dt = ds.grid.dt();
    Matrix z = dt * ds.x;
    const double ybar = ds.y.mean();
    Matrix d2 = second_difference_operator(p);
    Matrix lhs = z.transpose() * z + (lambda / (dt * dt * dt)) * (d2.transpose() * d2);
    lhs.diagonal().array() += 1e-10;  // jitter: D2 has an affine null space
    Vector rhs = z.transpose() * (ds.y.array() - ybar).matrix();

    RidgeFit fit(ds.grid);
    fit.beta = lhs.ldlt().solve(rhs);
    fit.beta0 = ybar;
    fit.lambda = lambda;
    fit.gamma = Vector::Zero(p);
    fit.col_means = ds.col_means;
    fit.col_scales = ds.col_scales;
    return fit;
}

// Predict on raw (unstandardized) rows.
inline Vector predict(const RidgeFit& fit, const Matrix& x_new) {
    if (x_new.cols() != fit.grid.size())
        throw std::invalid_argument("predict: column count mismatch");
    Matrix xs = apply_standardization(x_new, fit.col_means, fit.col_scales);
    return (fit.beta0 + (fit.grid.dt() * (xs * fit.beta)).array()).matrix();
}

// Predict on rows already standardized with the fit's record.
inline Vector predict_standardized(const RidgeFit& fit, const Matrix& x_std) {
    if (x_std.cols() != fit.grid.size())
        throw std::invalid_argument("predict_standardized: column count mismatch");
    return (fit.beta0 + (fit.grid.dt() * (x_std * fit.beta)).array()).matrix();
}

inline double mse(const Vector& y_hat, const Vector& y) {
    if (y_hat.size() != y.size()) throw std::invalid_argument("mse: length mismatch");
    if (y.size() == 0) throw std::invalid_argument("mse: empty vectors");
    return (y_hat - y).squaredNorm() / double(y.size());
}

}  // namespace aatr
