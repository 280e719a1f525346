#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "aatr/dataset.hpp"
#include "aatr/objectives.hpp"
#include "aatr/ridge.hpp"

namespace aatr {

struct FitConfig {
    int Q = 3;
    std::vector<double> lambda_grid;  // defaults to 20 log-spaced in [1e-4, 1e4]
    int folds = 3;
    int de_init_budget = 5000;
    int de_reshape_budget = 1000;
    int max_alt_iters = 10;
    double rel_improve_tol = 1e-3;
    std::uint64_t master_seed = 0;
    int jobs = 1;

    void validate(Eigen::Index n) const {
        if (Q < 1) throw std::invalid_argument("FitConfig: Q must be >= 1");
        if (folds < 2 || folds > n)
            throw std::invalid_argument("FitConfig: need 2 <= K <= N");
        if (lambda_grid.empty())
            throw std::invalid_argument("FitConfig: empty lambda grid");
        for (size_t m = 0; m < lambda_grid.size(); ++m) {
            if (!(lambda_grid[m] > 0.0))
                throw std::invalid_argument("FitConfig: lambdas must be positive");
            if (m > 0 && !(lambda_grid[m] > lambda_grid[m - 1]))
                throw std::invalid_argument("FitConfig: lambda grid must be ascending");
        }
        if (max_alt_iters < 1 || !(rel_improve_tol > 0.0))
            throw std::invalid_argument("FitConfig: bad refinement settings");
    }
};

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(count);
    if (count == 1) { out[0] = lo; return out; }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(llo + (lhi - llo) * i / double(count - 1));
    return out;
}

inline FitConfig default_fit_config(std::uint64_t seed = 0) {
    FitConfig cfg;
    cfg.lambda_grid = log_spaced(1e-4, 1e4, 20);
    cfg.master_seed = seed;
    return cfg;
}

// Shuffled partition into K folds with sizes differing by at most 1.
inline std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw std::invalid_argument("kfold_split: need 2 <= K <= N");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<int>> folds(k);
    for (int i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
    return folds;
}

inline FunctionalDataset subset(const FunctionalDataset& ds, const std::vector<int>& rows) {
    Matrix x(rows.size(), ds.p());
    Vector y(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        x.row(i) = ds.x.row(rows[i]);
        y[i] = ds.y[rows[i]];
    }
    return FunctionalDataset(ds.grid, std::move(x), std::move(y));
}

inline std::vector<int> complement(const std::vector<std::vector<int>>& folds, int k) {
    std::vector<int> rows;
    for (size_t f = 0; f < folds.size(); ++f)
        if (int(f) != k) rows.insert(rows.end(), folds[f].begin(), folds[f].end());
    std::sort(rows.begin(), rows.end());
    return rows;
}

// One per-q template initialization of the given standardized data set.
inline std::vector<TemplateSolution> init_templates(const FunctionalDataset& ds_std,
                                                    const FitConfig& cfg) {
    if (!ds_std.standardized)
        throw std::invalid_argument("init_templates: dataset must be standardized");
    TemplateObjective obj(ds_std);
    std::vector<TemplateSolution> out;
    for (int q = 1; q <= cfg.Q; ++q)
        out.push_back(optimize_template_init(
            obj, q, cfg.de_init_budget, mix_seed(cfg.master_seed, 0x1417, q)));
    return out;
}

struct RefineResult {
    RidgeFit fit;
    TemplateSolution gamma;
    std::vector<double> train_losses;  // accepted iterations only
    int reshape_attempts = 0;
};

// Alternate between the ridge solve and the reshape problem; keep a new
// (gamma, beta) pair only while the training MSE drops by more than
// rel_improve_tol relative.
inline RefineResult alternate_refine(const FunctionalDataset& ds_std,
                                     const RidgeWorkspace& ws,
                                     const TemplateObjective& obj,
                                     const TemplateSolution& gamma_init,
                                     double lambda, const FitConfig& cfg,
                                     std::uint64_t seed) {
    Vector gamma_vec = template_eval(gamma_init.to_template(), ds_std.grid);
    RefineResult res{solve_centered_ridge(ds_std, gamma_vec, lambda, ws), gamma_init, {}, 0};
    double loss = mse(predict_standardized(res.fit, ds_std.x), ds_std.y);
    res.train_losses.push_back(loss);

    for (int it = 0; it < cfg.max_alt_iters; ++it) {
        ++res.reshape_attempts;
        TemplateSolution cand = optimize_template_reshape(
            obj, res.gamma.t0, res.gamma.T, res.fit.beta, lambda,
            cfg.de_reshape_budget, mix_seed(seed, 0x4e57, it));
        Vector cand_vec = template_eval(cand.to_template(), ds_std.grid);
        RidgeFit cand_fit = solve_centered_ridge(ds_std, cand_vec, lambda, ws);
        double cand_loss = mse(predict_standardized(cand_fit, ds_std.x), ds_std.y);
        if ((loss - cand_loss) / loss > cfg.rel_improve_tol) {
            res.fit = std::move(cand_fit);
            res.gamma = std::move(cand);
            loss = cand_loss;
            res.train_losses.push_back(loss);
        } else {
            break;
        }
    }
    return res;
}

struct FitResult {
    RidgeFit fit;
    Template gamma_star;
    int q_star = 1;
    double lambda_star = 0.0;
    Matrix cv_table;                   // Q x M mean validation MSE
    std::vector<double> trace;         // accepted train losses of the final refit
    std::vector<std::vector<double>> cv_traces;  // accepted train losses per CV cell
};

namespace detail {

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < std::min(jobs, count); ++w)
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : workers) t.join();
}

}  // namespace detail

// Full fitting pipeline: per-q template initialization, K-fold selection of
// (q, lambda), then refit on everything.  Templates used inside the CV cells
// are initialized on each fold's training rows only, so the validation rows
// never influence the candidate templates they are scoring; the final refit
// starts from templates initialized on the full data set.
inline FitResult fit_aatr(const FunctionalDataset& ds_raw, const FitConfig& cfg) {
    cfg.validate(ds_raw.n());
    const int n = int(ds_raw.n());
    const int M = int(cfg.lambda_grid.size());

    FunctionalDataset full_std = standardize(ds_raw);
    std::vector<TemplateSolution> inits = init_templates(full_std, cfg);

    auto folds = kfold_split(n, cfg.folds, mix_seed(cfg.master_seed, 0xf01d));

    // Per-fold shared state: standardized training data, its caches, and the
    // fold-local template initializations.  Built serially so the result does
    // not depend on cfg.jobs.
    struct FoldCtx {
        FunctionalDataset train_std;
        RidgeWorkspace ws;
        TemplateObjective obj;
        Matrix val_x;  // raw
        Vector val_y;
        std::vector<TemplateSolution> inits;
    };
    std::vector<FoldCtx> ctx;
    ctx.reserve(cfg.folds);
    for (int k = 0; k < cfg.folds; ++k) {
        FunctionalDataset train_std = standardize(subset(ds_raw, complement(folds, k)));
        FunctionalDataset val = subset(ds_raw, folds[k]);
        RidgeWorkspace ws(train_std);
        TemplateObjective obj(train_std);
        FitConfig fold_cfg = cfg;
        fold_cfg.master_seed = mix_seed(cfg.master_seed, 0x1417f, std::uint64_t(k));
        std::vector<TemplateSolution> fold_inits = init_templates(train_std, fold_cfg);
        ctx.push_back({std::move(train_std), std::move(ws), std::move(obj),
                       std::move(val.x), std::move(val.y), std::move(fold_inits)});
    }

    const int cells = cfg.folds * cfg.Q * M;
    std::vector<double> val_mse(cells);
    std::vector<std::vector<double>> traces(cells);
    detail::parallel_for(cells, cfg.jobs, [&](int c) {
        const int k = c / (cfg.Q * M);
        const int q = (c / M) % cfg.Q + 1;
        const int m = c % M;
        const auto& fc = ctx[k];
        RefineResult r = alternate_refine(
            fc.train_std, fc.ws, fc.obj, fc.inits[q - 1], cfg.lambda_grid[m], cfg,
            mix_seed(cfg.master_seed, std::uint64_t(k), std::uint64_t(q),
                     std::uint64_t(m)));
        val_mse[c] = mse(predict(r.fit, fc.val_x), fc.val_y);
        traces[c] = std::move(r.train_losses);
    });

    FitResult out{RidgeFit(ds_raw.grid), {}, 1, 0.0, Matrix::Zero(cfg.Q, M), {},
                  std::move(traces)};
    for (int c = 0; c < cells; ++c) {
        const int q = (c / M) % cfg.Q;
        const int m = c % M;
        out.cv_table(q, m) += val_mse[c] / cfg.folds;
    }

    // Argmin with ties broken toward smaller q, then larger lambda.
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q < cfg.Q; ++q)
        for (int m = M - 1; m >= 0; --m)
            if (out.cv_table(q, m) < best) {
                best = out.cv_table(q, m);
                out.q_star = q + 1;
                out.lambda_star = cfg.lambda_grid[m];
            }

    RidgeWorkspace full_ws(full_std);
    TemplateObjective full_obj(full_std);
    RefineResult final = alternate_refine(
        full_std, full_ws, full_obj, inits[out.q_star - 1], out.lambda_star, cfg,
        mix_seed(cfg.master_seed, 0xf17a11, out.q_star));
    out.fit = std::move(final.fit);
    out.gamma_star = final.gamma.to_template();
    out.trace = std::move(final.train_losses);
    return out;
}

}  // namespace aatr
