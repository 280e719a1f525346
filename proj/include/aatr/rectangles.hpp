#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aatr/dataset.hpp"
#include "aatr/grid.hpp"

namespace aatr {

// Rectangular pulse: 1 on [t0 - T/2, t0 + T/2] (boundary inclusive), 0 outside.
inline double rect_eval(double t, double t0, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("rect_eval: need T > 0");
    return std::abs((t - t0) / T) <= 0.5 ? 1.0 : 0.0;
}

struct Rectangle {
    double A;   // height
    double t0;  // center
    double T;   // width
};

// Sum of q rectangles; the shrinkage target evaluated on the grid.
struct Template {
    std::vector<Rectangle> rects;

    int q() const { return int(rects.size()); }

    void validate(const Grid& grid) const {
        if (rects.empty()) throw std::invalid_argument("Template: need q >= 1");
        for (const auto& r : rects) {
            if (!(r.T > 0.0) || r.T > grid.length() + 1e-12)
                throw std::invalid_argument("Template: width out of (0, b-a]");
            if (r.t0 < grid.a() - 1e-12 || r.t0 > grid.b() + 1e-12)
                throw std::invalid_argument("Template: center outside [a, b]");
        }
    }
};

inline Vector template_eval(const Template& tpl, const Grid& grid) {
    tpl.validate(grid);
    Vector out = Vector::Zero(grid.size());
    for (const auto& r : tpl.rects)
        for (int j = 0; j < grid.size(); ++j)
            out[j] += r.A * rect_eval(grid.point(j), r.t0, r.T);
    return out;
}

namespace detail {

// Index range [lo, hi) of grid midpoints inside the rectangle support,
// consistent with rect_eval's inclusive boundaries.
inline std::pair<int, int> support_cells(double t0, double T, const Grid& grid) {
    const double l = t0 - 0.5 * T;
    const double r = t0 + 0.5 * T;
    const double dt = grid.dt();
    int lo = std::max(0, int(std::ceil((l - grid.a()) / dt - 0.5 - 1e-9)));
    int hi = std::min(grid.size(), int(std::floor((r - grid.a()) / dt - 0.5 + 1e-9)) + 1);
    auto in = [&](int j) { return rect_eval(grid.point(j), t0, T) > 0.5; };
    while (lo > 0 && in(lo - 1)) --lo;
    while (lo < hi && !in(lo)) ++lo;
    while (hi < grid.size() && in(hi)) ++hi;
    while (hi > lo && !in(hi - 1)) --hi;
    return {lo, hi};
}

// Clipped support length within [a, b], closed form.
inline double clipped_length(double t0, double T, double a, double b) {
    double l = std::max(t0 - 0.5 * T, a);
    double r = std::min(t0 + 0.5 * T, b);
    return std::max(0.0, r - l);
}

}  // namespace detail

// Row-wise prefix sums of x, so that quadrature of x_i over a cell index
// range reduces to one subtraction. Column k holds sum of columns [0, k).
inline Matrix row_prefix_sums(const Matrix& x) {
    Matrix cum(x.rows(), x.cols() + 1);
    cum.col(0).setZero();
    for (Eigen::Index k = 0; k < x.cols(); ++k)
        cum.col(k + 1) = cum.col(k) + x.col(k);
    return cum;
}

// S(i, j) = inner product of curve i with the indicator of rectangle j.
// Heights are not involved. `cum` must come from row_prefix_sums(ds.x).
inline Matrix s_vectors_from_prefix(const Matrix& cum, const Grid& grid,
                                    const Vector& t0, const Vector& T) {
    if (t0.size() != T.size())
        throw std::invalid_argument("s_vectors: t0/T length mismatch");
    const int q = int(t0.size());
    Matrix S(cum.rows(), q);
    for (int j = 0; j < q; ++j) {
        auto [lo, hi] = detail::support_cells(t0[j], T[j], grid);
        S.col(j) = grid.dt() * (cum.col(hi) - cum.col(lo));
    }
    return S;
}

inline Matrix s_vectors(const FunctionalDataset& ds, const Vector& t0, const Vector& T) {
    return s_vectors_from_prefix(row_prefix_sums(ds.x), ds.grid, t0, T);
}

// Sigma_GG: pairwise overlap lengths of the clipped supports, exact.
inline Matrix overlap_gram(const Vector& t0, const Vector& T, const Grid& grid) {
    if (t0.size() != T.size())
        throw std::invalid_argument("overlap_gram: t0/T length mismatch");
    const int q = int(t0.size());
    Matrix G(q, q);
    for (int j = 0; j < q; ++j) {
        double lj = std::max(t0[j] - 0.5 * T[j], grid.a());
        double rj = std::min(t0[j] + 0.5 * T[j], grid.b());
        for (int k = j; k < q; ++k) {
            double lk = std::max(t0[k] - 0.5 * T[k], grid.a());
            double rk = std::min(t0[k] + 0.5 * T[k], grid.b());
            double ov = std::max(0.0, std::min(rj, rk) - std::max(lj, lk));
            G(j, k) = ov;
            G(k, j) = ov;
        }
    }
    return G;
}

// Sigma_betaG: grid quadrature of beta against each rectangle indicator.
inline Vector beta_gram(const Vector& beta, const Vector& t0, const Vector& T,
                        const Grid& grid) {
    if (beta.size() != grid.size())
        throw std::invalid_argument("beta_gram: beta length mismatch");
    if (t0.size() != T.size())
        throw std::invalid_argument("beta_gram: t0/T length mismatch");
    const int q = int(t0.size());
    Vector out(q);
    for (int j = 0; j < q; ++j) {
        auto [lo, hi] = detail::support_cells(t0[j], T[j], grid);
        out[j] = grid.dt() * beta.segment(lo, hi - lo).sum();
    }
    return out;
}

}  // namespace aatr
