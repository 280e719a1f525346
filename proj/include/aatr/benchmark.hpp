#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "aatr/fitter.hpp"
#include "aatr/ridge.hpp"

namespace aatr {

enum class Method { aatr, ridge, roughness, mnlstsq };

inline Method parse_method(const std::string& s) {
    if (s == "aatr") return Method::aatr;
    if (s == "ridge") return Method::ridge;
    if (s == "roughness") return Method::roughness;
    if (s == "mnlstsq") return Method::mnlstsq;
    throw std::invalid_argument("unknown method: " + s);
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::aatr: return "aatr";
        case Method::ridge: return "ridge";
        case Method::roughness: return "roughness";
        case Method::mnlstsq: return "mnlstsq";
    }
    return "?";
}

// Inner CV selection of lambda for the zero-centered ridge and roughness
// baselines. Ties go to the larger lambda.
inline double select_lambda_cv(const FunctionalDataset& ds_raw, Method method,
                               const std::vector<double>& lambda_grid, int folds,
                               std::uint64_t seed) {
    auto split = kfold_split(int(ds_raw.n()), folds, seed);
    std::vector<double> cv(lambda_grid.size(), 0.0);
    for (int k = 0; k < folds; ++k) {
        FunctionalDataset train = standardize(subset(ds_raw, complement(split, k)));
        FunctionalDataset val = subset(ds_raw, split[k]);
        RidgeWorkspace ws(train);
        Vector zero = Vector::Zero(ds_raw.p());
        for (size_t m = 0; m < lambda_grid.size(); ++m) {
            RidgeFit fit = method == Method::ridge
                               ? solve_centered_ridge(train, zero, lambda_grid[m], ws)
                               : solve_roughness_ridge(train, lambda_grid[m]);
            cv[m] += mse(predict(fit, val.x), val.y) / folds;
        }
    }
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = lambda_grid.back();
    for (int m = int(lambda_grid.size()) - 1; m >= 0; --m)
        if (cv[m] < best) {
            best = cv[m];
            best_lambda = lambda_grid[m];
        }
    return best_lambda;
}

// Fit one method on a raw training set, with nested hyperparameter
// selection where the method has any.
inline RidgeFit fit_method(const FunctionalDataset& train_raw, Method method,
                           const FitConfig& cfg, std::uint64_t seed) {
    switch (method) {
        case Method::aatr: {
            FitConfig c = cfg;
            c.master_seed = seed;
            return fit_aatr(train_raw, c).fit;
        }
        case Method::ridge: {
            double lam = select_lambda_cv(train_raw, method, cfg.lambda_grid, 3, seed);
            FunctionalDataset train = standardize(train_raw);
            return solve_centered_ridge(train, Vector::Zero(train.p()), lam);
        }
        case Method::roughness: {
            double lam = select_lambda_cv(train_raw, method, cfg.lambda_grid, 3, seed);
            FunctionalDataset train = standardize(train_raw);
            return solve_roughness_ridge(train, lam);
        }
        case Method::mnlstsq:
            return solve_min_norm_ls(standardize(train_raw));
    }
    throw std::logic_error("fit_method: unreachable");
}

struct BenchmarkRow {
    Method method;
    std::vector<double> fold_mse;
    double mean = 0.0;
    double sd = 0.0;
};

// Outer K-fold test-error estimate with nested selection per split.
inline std::vector<BenchmarkRow> run_benchmark(const FunctionalDataset& ds_raw,
                                               const std::vector<Method>& methods,
                                               int outer_folds, const FitConfig& cfg) {
    auto split = kfold_split(int(ds_raw.n()), outer_folds,
                             mix_seed(cfg.master_seed, 0xbe7c));
    std::vector<BenchmarkRow> rows;
    for (Method method : methods) {
        BenchmarkRow row{method, {}, 0.0, 0.0};
        for (int k = 0; k < outer_folds; ++k) {
            FunctionalDataset train_raw = subset(ds_raw, complement(split, k));
            FunctionalDataset test = subset(ds_raw, split[k]);
            RidgeFit fit = fit_method(train_raw, method, cfg,
                                      mix_seed(cfg.master_seed, std::uint64_t(method),
                                               std::uint64_t(k)));
            row.fold_mse.push_back(mse(predict(fit, test.x), test.y));
        }
        for (double v : row.fold_mse) row.mean += v;
        row.mean /= double(row.fold_mse.size());
        if (row.fold_mse.size() > 1) {
            double ss = 0.0;
            for (double v : row.fold_mse) ss += (v - row.mean) * (v - row.mean);
            row.sd = std::sqrt(ss / double(row.fold_mse.size() - 1));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace aatr
