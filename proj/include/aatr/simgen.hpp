#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "aatr/dataset.hpp"
#include "aatr/de.hpp"
#include "aatr/grid.hpp"
#include "aatr/rectangles.hpp"

namespace aatr {

enum class Dependence { independent, dependent };
enum class BetaShape { rect1, rect2, rect3, smooth };

struct SimScenario {
    int n = 100;
    int p = 200;
    Dependence dependence = Dependence::independent;
    BetaShape beta_shape = BetaShape::rect1;
    double noise_sd = 1.0;
    double ar_rho = 0.9;  // dependent-coefficient AR(1) correlation
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2 || p < 10 || noise_sd < 0.0)
            throw std::invalid_argument("SimScenario: invalid parameters");
    }
};

inline BetaShape parse_beta_shape(const std::string& s) {
    if (s == "rect1") return BetaShape::rect1;
    if (s == "rect2") return BetaShape::rect2;
    if (s == "rect3") return BetaShape::rect3;
    if (s == "smooth") return BetaShape::smooth;
    throw std::invalid_argument("unknown beta shape: " + s);
}

inline Dependence parse_dependence(const std::string& s) {
    if (s == "independent") return Dependence::independent;
    if (s == "dependent") return Dependence::dependent;
    throw std::invalid_argument("unknown dependence mode: " + s);
}

// Cubic B-spline basis with clamped boundary knots and equispaced inner
// knots, evaluated by the Cox-de Boor recursion.
class CubicBsplineBasis {
public:
    CubicBsplineBasis(double lo, double hi, int inner_knots) {
        const int order = 4;
        for (int i = 0; i < order; ++i) knots_.push_back(lo);
        for (int j = 1; j <= inner_knots; ++j)
            knots_.push_back(lo + (hi - lo) * j / double(inner_knots + 1));
        for (int i = 0; i < order; ++i) knots_.push_back(hi);
        nbasis_ = int(knots_.size()) - order;
    }

    int size() const { return nbasis_; }

    // Row of all basis values at t.
    Vector eval(double t) const {
        const int order = 4;
        const int nk = int(knots_.size());
        std::vector<double> b(nk - 1, 0.0);
        // Degree 0.
        for (int i = 0; i < nk - 1; ++i)
            b[i] = (knots_[i] <= t && t < knots_[i + 1]) ? 1.0 : 0.0;
        if (t >= knots_[nk - 1]) {
            // Right endpoint belongs to the last nonempty interval.
            for (int i = nk - 2; i >= 0; --i)
                if (knots_[i] < knots_[i + 1]) { b[i] = 1.0; break; }
        }
        for (int d = 1; d < order; ++d) {
            for (int i = 0; i + d + 1 < nk; ++i) {
                double left = 0.0, right = 0.0;
                if (knots_[i + d] > knots_[i])
                    left = (t - knots_[i]) / (knots_[i + d] - knots_[i]) * b[i];
                if (knots_[i + d + 1] > knots_[i + 1])
                    right = (knots_[i + d + 1] - t) /
                            (knots_[i + d + 1] - knots_[i + 1]) * b[i + 1];
                b[i] = left + right;
            }
        }
        Vector out(nbasis_);
        for (int i = 0; i < nbasis_; ++i) out[i] = b[i];
        return out;
    }

private:
    std::vector<double> knots_;
    int nbasis_ = 0;
};

// Random curves: cubic B-spline on [-2, 2] with 40 inner knots, coefficient
// vectors drawn from N(0, Sigma), evaluated at the grid midpoints.
inline Matrix gen_curves(const SimScenario& scn, const Grid& grid) {
    scn.validate();
    CubicBsplineBasis basis(-2.0, 2.0, 40);
    const int nb = basis.size();

    Matrix chol_l;
    if (scn.dependence == Dependence::dependent) {
        Matrix sigma(nb, nb);
        for (int j = 0; j < nb; ++j)
            for (int k = 0; k < nb; ++k)
                sigma(j, k) = std::pow(scn.ar_rho, std::abs(j - k));
        chol_l = sigma.llt().matrixL();
    }

    std::mt19937_64 rng(mix_seed(scn.seed, 0xc0ef));
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix design(grid.size(), nb);
    for (int j = 0; j < grid.size(); ++j) design.row(j) = basis.eval(grid.point(j));

    Matrix x(scn.n, grid.size());
    Vector coef(nb);
    for (int i = 0; i < scn.n; ++i) {
        for (int k = 0; k < nb; ++k) coef[k] = normal(rng);
        if (scn.dependence == Dependence::dependent) coef = chol_l * coef;
        x.row(i) = (design * coef).transpose();
    }
    return x;
}

inline Matrix gen_curves(const SimScenario& scn) {
    return gen_curves(scn, Grid(scn.p, -1.0, 1.0));
}

inline Template true_beta_template(BetaShape shape) {
    Template tpl;
    switch (shape) {
        case BetaShape::rect3: tpl.rects.push_back({0.5, 0.6, 0.4}); [[fallthrough]];
        case BetaShape::rect2: tpl.rects.push_back({-1.0, -0.55, 0.5}); [[fallthrough]];
        case BetaShape::rect1: tpl.rects.push_back({1.0, 0.0, 0.8}); break;
        case BetaShape::smooth: break;
    }
    return tpl;
}

inline Vector true_beta(BetaShape shape, const Grid& grid) {
    if (shape == BetaShape::smooth) {
        Vector out(grid.size());
        for (int j = 0; j < grid.size(); ++j) {
            double t = grid.point(j);
            out[j] = std::exp(-t * t / (2.0 * 0.3 * 0.3));
        }
        return out;
    }
    return template_eval(true_beta_template(shape), grid);
}

inline Vector gen_responses(const Matrix& x, const Vector& beta, double beta0,
                            double sigma, const Grid& grid, std::uint64_t seed) {
    if (x.cols() != beta.size() || beta.size() != grid.size())
        throw std::invalid_argument("gen_responses: dimension mismatch");
    if (sigma < 0.0) throw std::invalid_argument("gen_responses: sigma < 0");
    std::mt19937_64 rng(mix_seed(seed, 0x5e5));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector y = (beta0 + (grid.dt() * (x * beta)).array()).matrix();
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * normal(rng);
    return y;
}

// Full scenario: curves, true beta and noisy responses on [-1, 1].
inline FunctionalDataset gen_dataset(const SimScenario& scn) {
    Grid grid(scn.p, -1.0, 1.0);
    Matrix x = gen_curves(scn, grid);
    Vector beta = true_beta(scn.beta_shape, grid);
    Vector y = gen_responses(x, beta, 0.0, scn.noise_sd, grid, scn.seed);
    return FunctionalDataset(grid, std::move(x), std::move(y));
}

}  // namespace aatr
