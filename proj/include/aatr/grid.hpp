#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aatr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Equispaced cell-midpoint grid on [a, b]. Functions are represented by
// their values at the p midpoints, so integrals reduce to dt * sum.
class Grid {
public:
    Grid(int p, double a, double b) : p_(p), a_(a), b_(b) {
        if (p < 2) throw std::invalid_argument("Grid: need p >= 2");
        if (!(a < b)) throw std::invalid_argument("Grid: need a < b");
        dt_ = (b - a) / p;
        points_.resize(p);
        for (int j = 0; j < p; ++j) points_[j] = a + (j + 0.5) * dt_;
    }

    int size() const { return p_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double dt() const { return dt_; }
    double length() const { return b_ - a_; }
    const Vector& points() const { return points_; }
    double point(int j) const { return points_[j]; }

    bool operator==(const Grid& o) const {
        return p_ == o.p_ && a_ == o.a_ && b_ == o.b_;
    }

private:
    int p_;
    double a_, b_;
    double dt_;
    Vector points_;
};

// Midpoint-rule discretization of the L2 inner product on [a, b].
inline double inner_product(const Vector& f, const Vector& g, const Grid& grid) {
    if (f.size() != grid.size() || g.size() != grid.size())
        throw std::invalid_argument("inner_product: length mismatch with grid");
    return grid.dt() * f.dot(g);
}

}  // namespace aatr
