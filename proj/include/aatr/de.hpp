#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aatr/grid.hpp"

namespace aatr {

// Deterministic seed mixing (splitmix64 finalizer) for per-cell RNG streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t z = seed;
    for (std::uint64_t w : {a, b, c}) {
        z += 0x9e3779b97f4a7c15ULL + w;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
    }
    return z;
}

struct DeConfig {
    int population_size = 20;
    std::pair<double, double> mutation_factor_range = {0.5, 1.0};
    double crossover_rate = 0.9;
    int eval_budget = 5000;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> bounds;

    void validate() const {
        if (population_size < 4)
            throw std::invalid_argument("DeConfig: population_size must be >= 4");
        if (eval_budget < population_size)
            throw std::invalid_argument("DeConfig: eval_budget must be >= population_size");
        if (bounds.empty()) throw std::invalid_argument("DeConfig: empty bounds");
        for (const auto& [lo, hi] : bounds)
            if (!(lo < hi)) throw std::invalid_argument("DeConfig: infeasible bounds");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw std::invalid_argument("DeConfig: crossover_rate outside [0, 1]");
    }
};

struct DeResult {
    Vector best;        // dim
    double objective = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    int generations = 0;
};

namespace detail {

inline double reflect_into(double v, double lo, double hi) {
    const double w = hi - lo;
    // Fold into a period of 2w, then mirror.
    double t = std::fmod(v - lo, 2.0 * w);
    if (t < 0.0) t += 2.0 * w;
    return lo + (t <= w ? t : 2.0 * w - t);
}

inline double sanitize(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// DE/rand/1/bin with dithered F, binomial crossover with one forced
// coordinate, reflection at the bounds and greedy selection. Deterministic
// for a given config. `initial` members (if any) replace the first rows of
// the random initial population.
inline DeResult de_minimize(const std::function<double(const Vector&)>& f,
                            const DeConfig& cfg,
                            const std::vector<Vector>& initial = {}) {
    cfg.validate();
    const int dim = int(cfg.bounds.size());
    const int np = cfg.population_size;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> dither(cfg.mutation_factor_range.first,
                                                  cfg.mutation_factor_range.second);

    std::vector<Vector> pop(np, Vector(dim));
    std::vector<double> fitness(np);
    DeResult res;
    res.best = Vector::Zero(dim);

    for (int i = 0; i < np; ++i) {
        for (int d = 0; d < dim; ++d) {
            const auto& [lo, hi] = cfg.bounds[d];
            pop[i][d] = lo + unit(rng) * (hi - lo);
        }
    }
    for (size_t i = 0; i < initial.size() && int(i) < np; ++i) {
        if (initial[i].size() != dim)
            throw std::invalid_argument("de_minimize: warm-start dimension mismatch");
        pop[i] = initial[i];
        for (int d = 0; d < dim; ++d)
            pop[i][d] = detail::reflect_into(pop[i][d], cfg.bounds[d].first,
                                             cfg.bounds[d].second);
    }

    for (int i = 0; i < np; ++i) {
        fitness[i] = detail::sanitize(f(pop[i]));
        ++res.evaluations;
        if (fitness[i] < res.objective) {
            res.objective = fitness[i];
            res.best = pop[i];
        }
    }

    std::uniform_int_distribution<int> pick(0, np - 1);
    std::uniform_int_distribution<int> pick_dim(0, dim - 1);
    Vector trial(dim);
    while (res.evaluations < cfg.eval_budget) {
        ++res.generations;
        for (int t = 0; t < np && res.evaluations < cfg.eval_budget; ++t) {
            int i, j, k;
            do { i = pick(rng); } while (i == t);
            do { j = pick(rng); } while (j == t || j == i);
            do { k = pick(rng); } while (k == t || k == i || k == j);
            const double F = dither(rng);
            const int forced = pick_dim(rng);
            for (int d = 0; d < dim; ++d) {
                if (d == forced || unit(rng) < cfg.crossover_rate) {
                    double v = pop[k][d] + F * (pop[i][d] - pop[j][d]);
                    trial[d] = detail::reflect_into(v, cfg.bounds[d].first,
                                                    cfg.bounds[d].second);
                } else {
                    trial[d] = pop[t][d];
                }
            }
            const double ft = detail::sanitize(f(trial));
            ++res.evaluations;
            if (ft <= fitness[t]) {
                pop[t] = trial;
                fitness[t] = ft;
                if (ft < res.objective) {
                    res.objective = ft;
                    res.best = trial;
                }
            }
        }
    }
    return res;
}

}  // namespace aatr
