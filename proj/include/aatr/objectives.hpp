#pragma once

#include <Eigen/SVD>
#include <limits>
#include <stdexcept>
#include <utility>

#include "aatr/de.hpp"
#include "aatr/dataset.hpp"
#include "aatr/rectangles.hpp"

namespace aatr {

// Pseudoinverse solve for the small q x q height systems. Coincident
// rectangles make the matrix exactly singular, hence the truncated SVD.
inline Vector pinv_solve(const Matrix& m, const Vector& rhs) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = double(m.rows()) * std::numeric_limits<double>::epsilon() *
                          (sv.size() > 0 ? sv[0] : 0.0);
    Vector inv = Vector::Zero(sv.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv[k] > cutoff) inv[k] = 1.0 / sv[k];
    return svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * rhs);
}

// Marginally optimal heights for the initialization problem:
// A = pinv(sum_i S_i S_i^T) * sum_i (y_i - ybar) S_i.
inline Vector closed_form_A_init(const Matrix& S, const Vector& y_centered) {
    if (S.rows() != y_centered.size())
        throw std::invalid_argument("closed_form_A_init: dimension mismatch");
    return pinv_solve(S.transpose() * S, S.transpose() * y_centered);
}

// Marginally optimal heights for the reshape problem:
// A = pinv(Sigma_SS + lambda Sigma_GG) * (Sigma_yS + lambda Sigma_betaG).
inline Vector closed_form_A_reshape(const Matrix& S, const Vector& y_centered,
                                    const Matrix& Sgg, const Vector& Sbg,
                                    double lambda) {
    if (S.rows() != y_centered.size() || S.cols() != Sgg.rows() ||
        Sgg.rows() != Sgg.cols() || Sbg.size() != Sgg.rows())
        throw std::invalid_argument("closed_form_A_reshape: dimension mismatch");
    if (!Sgg.isApprox(Sgg.transpose(), 1e-12))
        throw std::invalid_argument("closed_form_A_reshape: asymmetric Sigma_GG");
    if (!(lambda > 0.0))
        throw std::invalid_argument("closed_form_A_reshape: need lambda > 0");
    return pinv_solve(S.transpose() * S + lambda * Sgg,
                      S.transpose() * y_centered + lambda * Sbg);
}

// Shared per-dataset state for template objective evaluations. The prefix
// sums turn each S build into O(N q) work.
class TemplateObjective {
public:
    explicit TemplateObjective(const FunctionalDataset& ds)
        : grid_(ds.grid), cum_(row_prefix_sums(ds.x)),
          y_centered_((ds.y.array() - ds.y.mean()).matrix()) {}

    const Grid& grid() const { return grid_; }

    Matrix s_matrix(const Vector& t0, const Vector& T) const {
        return s_vectors_from_prefix(cum_, grid_, t0, T);
    }

    // Initialization objective at fixed knots, heights in closed form.
    std::pair<double, Vector> eval_init(const Vector& t0, const Vector& T) const {
        Matrix S = s_matrix(t0, T);
        Vector A = closed_form_A_init(S, y_centered_);
        double obj = (y_centered_ - S * A).squaredNorm();
        return {obj, A};
    }

    // Reshape objective: residual SS plus lambda * int (beta_tilde - gamma)^2,
    // with the gamma-gamma block exact and the beta_tilde terms by quadrature.
    std::pair<double, Vector> eval_reshape(const Vector& t0, const Vector& T,
                                           const Vector& beta_tilde,
                                           double lambda) const {
        Matrix S = s_matrix(t0, T);
        Matrix Sgg = overlap_gram(t0, T, grid_);
        Vector Sbg = beta_gram(beta_tilde, t0, T, grid_);
        Vector A = closed_form_A_reshape(S, y_centered_, Sgg, Sbg, lambda);
        const double beta_sq = grid_.dt() * beta_tilde.squaredNorm();
        double obj = (y_centered_ - S * A).squaredNorm() +
                     lambda * (beta_sq + A.dot(Sgg * A) - 2.0 * A.dot(Sbg));
        return {obj, A};
    }

private:
    Grid grid_;
    Matrix cum_;
    Vector y_centered_;
};

struct TemplateSolution {
    Vector t0;
    Vector T;
    Vector A;
    double objective = 0.0;

    Template to_template() const {
        Template tpl;
        for (Eigen::Index j = 0; j < t0.size(); ++j)
            tpl.rects.push_back({A[j], t0[j], T[j]});
        return tpl;
    }
};

namespace detail {

// DE search space for q rectangles: (t0_1..t0_q, T_1..T_q).
inline std::vector<std::pair<double, double>> knot_bounds(const Grid& grid, int q) {
    std::vector<std::pair<double, double>> bounds;
    for (int j = 0; j < q; ++j) bounds.emplace_back(grid.a(), grid.b());
    // Width floor 2*dt: sub-cell rectangles are invisible to the quadrature.
    for (int j = 0; j < q; ++j) bounds.emplace_back(2.0 * grid.dt(), grid.length());
    return bounds;
}

inline std::pair<Vector, Vector> split_knots(const Vector& v) {
    const int q = int(v.size()) / 2;
    return {v.head(q), v.tail(q)};
}

}  // namespace detail

inline DeConfig make_de_config(const Grid& grid, int q, int eval_budget,
                               std::uint64_t seed) {
    DeConfig cfg;
    cfg.population_size = std::max(20, 10 * 2 * q);
    cfg.eval_budget = std::max(eval_budget, cfg.population_size);
    cfg.seed = seed;
    cfg.bounds = detail::knot_bounds(grid, q);
    return cfg;
}

// Solve the initialization problem for q rectangles with DE over the knots.
inline TemplateSolution optimize_template_init(const TemplateObjective& obj, int q,
                                               int eval_budget, std::uint64_t seed) {
    DeConfig cfg = make_de_config(obj.grid(), q, eval_budget, seed);
    auto f = [&](const Vector& v) {
        auto [t0, T] = detail::split_knots(v);
        return obj.eval_init(t0, T).first;
    };
    DeResult de = de_minimize(f, cfg);
    TemplateSolution sol;
    std::tie(sol.t0, sol.T) = detail::split_knots(de.best);
    std::tie(sol.objective, sol.A) = obj.eval_init(sol.t0, sol.T);
    return sol;
}

// Solve the reshape problem, warm-started at the previous knots.
inline TemplateSolution optimize_template_reshape(const TemplateObjective& obj,
                                                  const Vector& warm_t0,
                                                  const Vector& warm_T,
                                                  const Vector& beta_tilde,
                                                  double lambda, int eval_budget,
                                                  std::uint64_t seed) {
    const int q = int(warm_t0.size());
    DeConfig cfg = make_de_config(obj.grid(), q, eval_budget, seed);
    auto f = [&](const Vector& v) {
        auto [t0, T] = detail::split_knots(v);
        return obj.eval_reshape(t0, T, beta_tilde, lambda).first;
    };
    Vector warm(2 * q);
    warm << warm_t0, warm_T;
    DeResult de = de_minimize(f, cfg, {warm});
    TemplateSolution sol;
    std::tie(sol.t0, sol.T) = detail::split_knots(de.best);
    std::tie(sol.objective, sol.A) =
        obj.eval_reshape(sol.t0, sol.T, beta_tilde, lambda);
    return sol;
}

}  // namespace aatr
