#pragma once

#include <stdexcept>
#include <utility>

#include "aatr/grid.hpp"

namespace aatr {

// N sampled functions on a shared grid plus N scalar responses.
// Standardization (per grid point, N-1 denominator) is recorded so that
// prediction-time inputs can be transformed the same way.
struct FunctionalDataset {
    Grid grid;
    Matrix x;  // N x p
    Vector y;  // N
    bool standardized = false;
    Vector col_means;   // p, valid iff standardized
    Vector col_scales;  // p, valid iff standardized

    FunctionalDataset(Grid g, Matrix x_in, Vector y_in)
        : grid(std::move(g)), x(std::move(x_in)), y(std::move(y_in)) {
        if (x.cols() != grid.size())
            throw std::invalid_argument("FunctionalDataset: x has wrong column count");
        if (x.rows() != y.size())
            throw std::invalid_argument("FunctionalDataset: x rows and y length differ");
        if (!x.allFinite() || !y.allFinite())
            throw std::invalid_argument("FunctionalDataset: non-finite data");
    }

    Eigen::Index n() const { return x.rows(); }
    int p() const { return grid.size(); }
    double y_mean() const { return y.mean(); }
};

inline FunctionalDataset standardize(const FunctionalDataset& ds) {
    if (ds.standardized)
        throw std::invalid_argument("standardize: dataset already standardized");
    const auto n = ds.n();
    if (n < 2) throw std::invalid_argument("standardize: need N >= 2");

    FunctionalDataset out = ds;
    out.col_means = ds.x.colwise().mean();
    out.col_scales.resize(ds.p());
    for (int j = 0; j < ds.p(); ++j) {
        Vector c = ds.x.col(j).array() - out.col_means[j];
        double sd = std::sqrt(c.squaredNorm() / double(n - 1));
        // Constant columns become all-zero with unit recorded scale.
        out.col_scales[j] = (sd > 0.0) ? sd : 1.0;
        out.x.col(j) = c / out.col_scales[j];
    }
    out.standardized = true;
    return out;
}

// Apply a dataset's stored standardization to new raw rows.
inline Matrix apply_standardization(const Matrix& x_raw, const Vector& col_means,
                                    const Vector& col_scales) {
    if (x_raw.cols() != col_means.size())
        throw std::invalid_argument("apply_standardization: column count mismatch");
    return (x_raw.rowwise() - col_means.transpose()).array().rowwise() /
           col_scales.transpose().array();
}

}  // namespace aatr
