#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aatr/dataset.hpp"
#include "aatr/grid.hpp"

using namespace aatr;

TEST_CASE("grid midpoints") {
    Grid g2(2, -1.0, 1.0);
    CHECK(g2.dt() == 1.0);
    CHECK(g2.point(0) == -0.5);
    CHECK(g2.point(1) == 0.5);

    Grid g200(200, -1.0, 1.0);
    CHECK(g200.dt() == Catch::Approx(0.01));

    Grid g4(4, 0.0, 1.0);
    CHECK(g4.point(0) == 0.125);
    CHECK(g4.point(1) == 0.375);
    CHECK(g4.point(2) == 0.625);
    CHECK(g4.point(3) == 0.875);

    CHECK_THROWS_AS(Grid(1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(10, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("grid points strictly increasing with constant spacing") {
    Grid g(37, -3.0, 2.5);
    for (int j = 0; j + 1 < g.size(); ++j) {
        CHECK(g.point(j) < g.point(j + 1));
        CHECK(g.point(j + 1) - g.point(j) == Catch::Approx(g.dt()).margin(1e-14));
    }
    CHECK(g.point(0) > g.a());
    CHECK(g.point(g.size() - 1) < g.b());
}

TEST_CASE("inner product quadrature") {
    Grid g(50, -1.0, 1.0);
    Vector ones = Vector::Ones(50);
    CHECK(inner_product(ones, ones, g) == Catch::Approx(2.0).margin(1e-14));

    // Odd integrand on a symmetric midpoint grid.
    CHECK(std::abs(inner_product(g.points(), ones, g)) < 1e-12);

    Grid g200(200, -1.0, 1.0);
    CHECK(inner_product(g200.points(), g200.points(), g200) ==
          Catch::Approx(2.0 / 3.0).margin(1e-4));

    CHECK_THROWS_AS(inner_product(ones, ones, g200), std::invalid_argument);
}

TEST_CASE("inner product exact for cell-constant functions") {
    Grid g(17, 0.0, 3.0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Vector f(17), ones = Vector::Ones(17);
    for (int j = 0; j < 17; ++j) f[j] = u(rng);
    // A function constant on each cell integrates to dt * sum exactly.
    double exact = 0.0;
    for (int j = 0; j < 17; ++j) exact += f[j] * g.dt();
    CHECK(inner_product(f, ones, g) == Catch::Approx(exact).margin(1e-15));
}

TEST_CASE("standardize") {
    Grid g(2, -1.0, 1.0);
    Matrix x(2, 2);
    x << 1.0, 5.0,
         3.0, 5.0;
    Vector y(2);
    y << 0.0, 1.0;
    FunctionalDataset ds(g, x, y);
    FunctionalDataset s = standardize(ds);

    CHECK(s.x(0, 0) == Catch::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(s.x(1, 0) == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.col_means[0] == Catch::Approx(2.0));
    CHECK(s.col_scales[0] == Catch::Approx(std::sqrt(2.0)));

    // Constant column zeroed with recorded scale 1.
    CHECK(s.x(0, 1) == 0.0);
    CHECK(s.x(1, 1) == 0.0);
    CHECK(s.col_scales[1] == 1.0);

    CHECK_THROWS_AS(standardize(s), std::invalid_argument);
}

TEST_CASE("standardize statistics and round trip", "[property]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(1.0, 3.0);
    Grid g(20, -1.0, 1.0);
    Matrix x(15, 20);
    Vector y(15);
    for (int i = 0; i < 15; ++i) {
        y[i] = n(rng);
        for (int j = 0; j < 20; ++j) x(i, j) = n(rng);
    }
    FunctionalDataset s = standardize(FunctionalDataset(g, x, y));
    for (int j = 0; j < 20; ++j) {
        CHECK(std::abs(s.x.col(j).mean()) < 1e-10);
        double sd = std::sqrt(s.x.col(j).squaredNorm() / 14.0);
        CHECK(std::abs(sd - 1.0) < 1e-8);
    }
    Matrix back = (s.x.array().rowwise() * s.col_scales.transpose().array()).matrix();
    back.rowwise() += s.col_means.transpose();
    CHECK((back - x).norm() / x.norm() < 1e-12);
}
