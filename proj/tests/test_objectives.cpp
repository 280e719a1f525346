#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aatr/objectives.hpp"

using namespace aatr;

namespace {

FunctionalDataset random_dataset(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Grid g(p, -1.0, 1.0);
    Matrix x(n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = nd(rng);
        for (int j = 0; j < p; ++j) x(i, j) = nd(rng);
    }
    return FunctionalDataset(g, x, y);
}

}  // namespace

TEST_CASE("closed_form_A_init recovers a constructed optimum") {
    FunctionalDataset ds = random_dataset(30, 60, 1);
    Vector t0(2), T(2);
    t0 << -0.3, 0.5;
    T << 0.6, 0.8;
    Matrix S = s_vectors(ds, t0, T);
    Vector a_true(2);
    a_true << 1.5, -0.7;
    Vector y_centered = S * a_true;
    Vector a = closed_form_A_init(S, y_centered);
    CHECK((a - a_true).norm() < 1e-8);
}

TEST_CASE("closed_form_A_init degenerate cases") {
    Matrix S = Matrix::Zero(10, 2);
    CHECK(closed_form_A_init(S, Vector::Ones(10)).norm() == 0.0);

    // Identical columns: minimum-norm split is even.
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix S2(10, 2);
    Vector y(10);
    for (int i = 0; i < 10; ++i) {
        S2(i, 0) = nd(rng);
        y[i] = nd(rng);
    }
    S2.col(1) = S2.col(0);
    Vector yc = (y.array() - y.mean()).matrix();
    Vector a = closed_form_A_init(S2, yc);
    CHECK(a[0] == Catch::Approx(a[1]).margin(1e-10));

    // Against an independent pseudoinverse oracle.
    Matrix sss = S2.transpose() * S2;
    Vector oracle = sss.completeOrthogonalDecomposition().pseudoInverse() *
                    (S2.transpose() * yc);
    CHECK((a - oracle).norm() < 1e-8);

    CHECK_THROWS_AS(closed_form_A_init(S2, Vector::Ones(3)), std::invalid_argument);
}

TEST_CASE("closed_form_A_reshape") {
    FunctionalDataset ds = random_dataset(25, 50, 3);
    Vector t0(2), T(2);
    t0 << -0.4, 0.3;
    T << 0.5, 0.9;
    Matrix S = s_vectors(ds, t0, T);
    Vector yc = (ds.y.array() - ds.y.mean()).matrix();
    Matrix Sgg = overlap_gram(t0, T, ds.grid);
    Vector beta = Vector::Random(50);
    Vector Sbg = beta_gram(beta, t0, T, ds.grid);

    SECTION("vanishing lambda matches the init heights") {
        Vector a0 = closed_form_A_init(S, yc);
        Vector a = closed_form_A_reshape(S, yc, Sgg, Sbg, 1e-12);
        CHECK((a - a0).norm() < 1e-6);
    }

    SECTION("pure projection: S = 0 gives the local average of beta") {
        Vector t1(1), T1(1);
        t1 << 0.2;
        T1 << 0.5;
        Matrix S0 = Matrix::Zero(25, 1);
        Matrix Sgg1 = overlap_gram(t1, T1, ds.grid);
        Vector Sbg1 = beta_gram(beta, t1, T1, ds.grid);
        Vector a = closed_form_A_reshape(S0, Vector::Zero(25), Sgg1, Sbg1, 2.0);
        CHECK(a[0] == Catch::Approx(Sbg1[0] / Sgg1(0, 0)).margin(1e-10));
    }

    SECTION("matches a brute-force grid search over the heights") {
        const double lambda = 0.8;
        Vector a = closed_form_A_reshape(S, yc, Sgg, Sbg, lambda);
        auto J = [&](double a1, double a2) {
            Vector av(2);
            av << a1, a2;
            double beta_sq = ds.grid.dt() * beta.squaredNorm();
            return (yc - S * av).squaredNorm() +
                   lambda * (beta_sq + av.dot(Sgg * av) - 2.0 * av.dot(Sbg));
        };
        const double res = 0.05;
        double best = std::numeric_limits<double>::infinity();
        double b1 = 0, b2 = 0;
        for (double a1 = -5.0; a1 <= 5.0; a1 += res)
            for (double a2 = -5.0; a2 <= 5.0; a2 += res)
                if (J(a1, a2) < best) {
                    best = J(a1, a2);
                    b1 = a1;
                    b2 = a2;
                }
        CHECK(std::abs(a[0] - b1) <= res);
        CHECK(std::abs(a[1] - b2) <= res);
        CHECK(J(a[0], a[1]) <= best + 1e-10);
    }

    SECTION("rejects an asymmetric gram matrix") {
        Matrix bad = Sgg;
        bad(0, 1) += 0.1;
        CHECK_THROWS_AS(closed_form_A_reshape(S, yc, bad, Sbg, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("objective_init") {
    // Noiseless data from a known template is fit exactly at the true knots.
    // Curve columns are centered so the planted responses have zero mean and
    // the centered objective can reach zero.
    FunctionalDataset base = random_dataset(40, 80, 4);
    Eigen::RowVectorXd mu = base.x.colwise().mean();
    base.x.rowwise() -= mu;
    Vector t0(1), T(1);
    t0 << 0.1;
    T << 0.7;
    Matrix S = s_vectors(base, t0, T);
    Vector y = S * Vector::Constant(1, 2.0);
    FunctionalDataset ds(base.grid, base.x, y);
    TemplateObjective obj(ds);

    auto [val, a] = obj.eval_init(t0, T);
    CHECK(val < 1e-8);
    CHECK(a[0] == Catch::Approx(2.0).margin(1e-6));

    // All-zero S columns: objective is the centered response energy.
    Matrix xz = Matrix::Zero(5, 80);
    Vector yz = Vector::Random(5);
    FunctionalDataset dz(base.grid, xz, yz);
    TemplateObjective objz(dz);
    auto [vz, az] = objz.eval_init(t0, T);
    CHECK(vz == Catch::Approx((yz.array() - yz.mean()).matrix().squaredNorm()));
    CHECK(az.norm() == 0.0);
}

TEST_CASE("closed-form heights are stationary points", "[property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        FunctionalDataset ds = random_dataset(20, 50, 100 + rep);
        const int q = 1 + rep % 3;
        Vector t0(q), T(q);
        for (int j = 0; j < q; ++j) {
            t0[j] = uc(rng);
            T[j] = 0.1 + 0.9 * std::abs(uc(rng));
        }
        Matrix S = s_vectors(ds, t0, T);
        Vector yc = (ds.y.array() - ds.y.mean()).matrix();
        Vector a = closed_form_A_init(S, yc);

        auto J = [&](const Vector& av) { return (yc - S * av).squaredNorm(); };
        double j0 = J(a);
        // Single-coordinate perturbations never improve by more than round-off.
        for (int j = 0; j < q; ++j) {
            for (double d : {-1e-3, 1e-3}) {
                Vector ap = a;
                ap[j] += d;
                CHECK(J(ap) >= j0 - 1e-10);
            }
        }
        // Finite-difference gradient is negligible relative to the objective.
        for (int j = 0; j < q; ++j) {
            Vector ap = a, am = a;
            ap[j] += 1e-6;
            am[j] -= 1e-6;
            CHECK(std::abs(J(ap) - J(am)) / 2e-6 < 1e-5 * (1.0 + j0));
        }
        // Normal-equation residual lies in the null space of Sigma_SS.
        Matrix sss = S.transpose() * S;
        Vector resid = sss * a - S.transpose() * yc;
        CHECK((sss * resid).norm() < 1e-8 * (1.0 + sss.norm()));
    }
}

TEST_CASE("objective_reshape") {
    FunctionalDataset ds = random_dataset(30, 60, 6);
    TemplateObjective obj(ds);
    Vector t0(2), T(2);
    t0 << -0.2, 0.4;
    T << 0.5, 0.6;
    Vector beta = Vector::Random(60);

    SECTION("vanishing lambda approaches the init objective") {
        auto [vi, ai] = obj.eval_init(t0, T);
        auto [vr, ar] = obj.eval_reshape(t0, T, beta, 1e-12);
        CHECK(vr == Catch::Approx(vi).epsilon(1e-6));
    }

    SECTION("objective is monotone in lambda at fixed knots") {
        double prev = -std::numeric_limits<double>::infinity();
        for (double lambda : {1e-6, 1e-3, 1e-1, 1.0, 10.0}) {
            double v = obj.eval_reshape(t0, T, beta, lambda).first;
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }

    SECTION("consistent template and data give a near-zero objective") {
        Vector a_true(2);
        a_true << 1.0, -0.5;
        Matrix xc = ds.x;
        Eigen::RowVectorXd mu = xc.colwise().mean();
        xc.rowwise() -= mu;
        FunctionalDataset centered(ds.grid, xc, ds.y);
        Matrix S = s_vectors(centered, t0, T);
        Vector y = S * a_true;
        FunctionalDataset dsc(ds.grid, xc, y);
        TemplateObjective objc(dsc);
        Template tpl{{{a_true[0], t0[0], T[0]}, {a_true[1], t0[1], T[1]}}};
        Vector beta_t = template_eval(tpl, ds.grid);
        const double lambda = 0.5;
        auto [v, a] = objc.eval_reshape(t0, T, beta_t, lambda);
        // The penalty mixes the exact rectangle gram with grid quadrature of
        // the template, so the floor is O(dt), not machine precision.
        const double height_sum = a_true.cwiseAbs().sum();
        const double bound = 2.0 * lambda * ds.grid.dt() * height_sum * height_sum;
        CHECK(v < bound);
    }
}

TEST_CASE("template DE search finds a planted rectangle") {
    FunctionalDataset base = random_dataset(60, 100, 7);
    Eigen::RowVectorXd mu = base.x.colwise().mean();
    base.x.rowwise() -= mu;
    Vector t0(1), T(1);
    t0 << -0.25;
    T << 0.8;
    Matrix S = s_vectors(base, t0, T);
    Vector y = S * Vector::Constant(1, 1.0);
    FunctionalDataset ds(base.grid, base.x, y);
    TemplateObjective obj(ds);
    TemplateSolution sol = optimize_template_init(obj, 1, 4000, 11);
    CHECK(sol.objective < 1e-6);
}

TEST_CASE("reduced search beats full 3q search on equal budget", "[property]") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        FunctionalDataset ds = random_dataset(25, 50, 300 + seed);
        TemplateObjective obj(ds);
        const int q = 2;
        const int budget = 1500;
        TemplateSolution reduced = optimize_template_init(obj, q, budget, seed);

        // 3q-dimensional DE over (A, t0, T) jointly, same budget.
        DeConfig cfg;
        cfg.population_size = std::max(20, 10 * 3 * q);
        cfg.eval_budget = budget;
        cfg.seed = seed;
        for (int j = 0; j < q; ++j) cfg.bounds.emplace_back(-5.0, 5.0);
        for (int j = 0; j < q; ++j) cfg.bounds.emplace_back(-1.0, 1.0);
        for (int j = 0; j < q; ++j)
            cfg.bounds.emplace_back(2.0 * ds.grid.dt(), 2.0);
        Vector yc = (ds.y.array() - ds.y.mean()).matrix();
        auto f = [&](const Vector& v) {
            Matrix S = obj.s_matrix(v.segment(q, q), v.tail(q));
            return (yc - S * v.head(q)).squaredNorm();
        };
        DeResult full = de_minimize(f, cfg);
        if (reduced.objective <= full.objective + 1e-12) ++wins;
    }
    CHECK(wins >= 9);
}
