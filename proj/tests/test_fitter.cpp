#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "aatr/fitter.hpp"
#include "aatr/simgen.hpp"

using namespace aatr;

namespace {

double pearson(const Vector& a, const Vector& b) {
    Vector ac = (a.array() - a.mean()).matrix();
    Vector bc = (b.array() - b.mean()).matrix();
    return ac.dot(bc) / (ac.norm() * bc.norm());
}

FunctionalDataset planted_rectangle_data(int n, int p, double t0, double T,
                                         double noise_sd, std::uint64_t seed) {
    SimScenario scn;
    scn.n = n;
    scn.p = p;
    scn.seed = seed;
    Grid grid(p, -1.0, 1.0);
    Matrix x = gen_curves(scn, grid);
    Template tpl{{{1.0, t0, T}}};
    Vector beta = template_eval(tpl, grid);
    Vector y = gen_responses(x, beta, 0.0, noise_sd, grid, seed);
    return FunctionalDataset(grid, std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("kfold_split") {
    auto f1 = kfold_split(6, 3, 1);
    std::set<int> seen;
    for (const auto& fold : f1) {
        CHECK(fold.size() == 2);
        seen.insert(fold.begin(), fold.end());
    }
    CHECK(seen.size() == 6);

    auto f2 = kfold_split(5, 3, 1);
    std::multiset<size_t> sizes;
    for (const auto& fold : f2) sizes.insert(fold.size());
    CHECK(sizes == std::multiset<size_t>{1, 2, 2});

    CHECK(kfold_split(10, 4, 42) == kfold_split(10, 4, 42));
    CHECK_THROWS_AS(kfold_split(3, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(kfold_split(3, 1, 0), std::invalid_argument);
}

TEST_CASE("init_templates recovers a planted rectangle") {
    FunctionalDataset ds =
        standardize(planted_rectangle_data(100, 200, 0.1, 0.8, 0.0, 21));
    FitConfig cfg = default_fit_config(21);
    cfg.Q = 1;
    cfg.de_init_budget = 5000;
    auto inits = init_templates(ds, cfg);
    REQUIRE(inits.size() == 1);
    CHECK(std::abs(inits[0].t0[0] - 0.1) < 0.05);
    CHECK(std::abs(inits[0].T[0] - 0.8) < 0.1);
}

TEST_CASE("init_templates on pure noise cannot beat unconstrained LS") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> nd(0.0, 1.0);
    Grid g(40, -1.0, 1.0);
    Matrix x(30, 40);
    Vector y(30);
    for (int i = 0; i < 30; ++i) {
        y[i] = nd(rng);
        for (int j = 0; j < 40; ++j) x(i, j) = nd(rng);
    }
    FunctionalDataset ds = standardize(FunctionalDataset(g, x, y));
    FitConfig cfg = default_fit_config(22);
    cfg.Q = 1;
    cfg.de_init_budget = 1000;
    auto inits = init_templates(ds, cfg);

    RidgeFit ls = solve_min_norm_ls(ds);
    double ls_ss = (predict_standardized(ls, ds.x) - ds.y).squaredNorm();
    CHECK(inits[0].objective >= ls_ss - 1e-8);
}

TEST_CASE("init_templates deterministic per master seed") {
    FunctionalDataset ds =
        standardize(planted_rectangle_data(40, 60, -0.3, 0.5, 1.0, 23));
    FitConfig cfg = default_fit_config(23);
    cfg.Q = 2;
    cfg.de_init_budget = 800;
    auto a = init_templates(ds, cfg);
    auto b = init_templates(ds, cfg);
    for (int q = 0; q < 2; ++q) {
        CHECK(a[q].t0 == b[q].t0);
        CHECK(a[q].T == b[q].T);
        CHECK(a[q].objective == b[q].objective);
    }
}

TEST_CASE("alternate_refine trace and rejection path") {
    FunctionalDataset ds =
        standardize(planted_rectangle_data(50, 80, 0.2, 0.6, 0.5, 24));
    FitConfig cfg = default_fit_config(24);
    cfg.de_init_budget = 1500;
    cfg.de_reshape_budget = 400;
    TemplateObjective obj(ds);
    RidgeWorkspace ws(ds);
    TemplateSolution init = optimize_template_init(obj, 1, cfg.de_init_budget, 24);

    RefineResult r = alternate_refine(ds, ws, obj, init, 1.0, cfg, 24);
    REQUIRE(!r.train_losses.empty());
    for (size_t i = 1; i < r.train_losses.size(); ++i)
        CHECK((r.train_losses[i - 1] - r.train_losses[i]) / r.train_losses[i - 1] >
              cfg.rel_improve_tol);

    // With no reshape iterations allowed beyond a rejected one, the result is
    // the initial ridge fit.
    if (r.train_losses.size() == 1) {
        Vector gamma_vec = template_eval(init.to_template(), ds.grid);
        RidgeFit direct = solve_centered_ridge(ds, gamma_vec, 1.0, ws);
        CHECK(r.fit.beta == direct.beta);
    }
}

TEST_CASE("fit_aatr on noiseless rectangle data recovers the shape") {
    FunctionalDataset ds = planted_rectangle_data(80, 120, 0.0, 0.8, 0.0, 25);
    FitConfig cfg = default_fit_config(25);
    cfg.Q = 1;
    cfg.lambda_grid = log_spaced(1e-2, 1e3, 6);
    cfg.de_init_budget = 3000;
    cfg.de_reshape_budget = 300;
    FitResult res = fit_aatr(ds, cfg);
    Vector truth = template_eval(Template{{{1.0, 0.0, 0.8}}}, ds.grid);
    CHECK(pearson(res.fit.beta, truth) > 0.95);
    CHECK(res.cv_table.rows() == 1);
    CHECK(res.cv_table.cols() == 6);
    CHECK(res.cv_table.allFinite());
}

TEST_CASE("fit_aatr with vanishing lambda matches least squares") {
    // Overdetermined full-rank case: the ridge path limit is plain LS.
    FunctionalDataset ds = planted_rectangle_data(40, 10, 0.0, 0.8, 0.3, 26);
    FitConfig cfg = default_fit_config(26);
    cfg.Q = 1;
    cfg.lambda_grid = {1e-12};
    cfg.de_init_budget = 500;
    cfg.de_reshape_budget = 200;
    FitResult res = fit_aatr(ds, cfg);
    RidgeFit ls = solve_min_norm_ls(standardize(ds));
    CHECK((res.fit.beta - ls.beta).norm() < 1e-4 * (1.0 + ls.beta.norm()));
}

TEST_CASE("fit_aatr selection coherence and determinism", "[property]") {
    FunctionalDataset ds = planted_rectangle_data(45, 60, -0.2, 0.7, 1.0, 27);
    FitConfig cfg = default_fit_config(27);
    cfg.Q = 2;
    cfg.lambda_grid = log_spaced(1e-2, 1e2, 5);
    cfg.de_init_budget = 600;
    cfg.de_reshape_budget = 200;

    FitResult a = fit_aatr(ds, cfg);

    // Selected cell is an argmin of the table.
    double best = a.cv_table.minCoeff();
    int mi = -1;
    for (int m = 0; m < 5; ++m)
        if (cfg.lambda_grid[m] == a.lambda_star) mi = m;
    REQUIRE(mi >= 0);
    CHECK(a.cv_table(a.q_star - 1, mi) == best);

    // jobs=4 reproduces jobs=1 exactly.
    FitConfig par = cfg;
    par.jobs = 4;
    FitResult b = fit_aatr(ds, par);
    CHECK(a.cv_table == b.cv_table);
    CHECK(a.fit.beta == b.fit.beta);
    CHECK(a.q_star == b.q_star);
    CHECK(a.lambda_star == b.lambda_star);

    // Identical rerun is bitwise identical.
    FitResult c = fit_aatr(ds, cfg);
    CHECK(a.fit.beta == c.fit.beta);
    CHECK(a.cv_table == c.cv_table);
}
