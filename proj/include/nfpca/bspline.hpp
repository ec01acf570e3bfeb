#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfpca/errors.hpp"
#include "nfpca/quadrature.hpp"

namespace nfpca {

// Clamped B-spline basis of degree d with L functions on [0, 1].
// Interior knots are equally spaced; boundary knots have multiplicity d + 1.
class BSplineBasis {
public:
    BSplineBasis(int count, int degree)
        : count_(count), degree_(degree)
    {
        if (degree < 1)
            throw invalid_dimension("BSplineBasis: degree must be >= 1");
        if (count < degree + 1)
            throw invalid_dimension(
                "BSplineBasis: basis count " + std::to_string(count) +
                " must be >= degree + 1 = " + std::to_string(degree + 1));

        const int spans = count - degree; // interior intervals
        knots_.resize(count + degree + 1);
        for (int i = 0; i <= degree; ++i)
            knots_[i] = 0.0;
        for (int i = 1; i < spans; ++i)
            knots_[degree + i] = static_cast<double>(i) / spans;
        for (int i = count; i < count + degree + 1; ++i)
            knots_[i] = 1.0;
    }

    int count() const { return count_; }
    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }

    // Index i with knots[i] <= t < knots[i+1]; the last span is closed at 1.
    int find_span(double t) const
    {
        if (t < 0.0 || t > 1.0)
            throw domain_error("BSplineBasis: t = " + std::to_string(t) +
                               " outside [0, 1]");
        if (t >= 1.0)
            return count_ - 1;
        auto it = std::upper_bound(knots_.begin() + degree_,
                                   knots_.begin() + count_ + 1, t);
        return static_cast<int>(it - knots_.begin()) - 1;
    }

    // Cox-de Boor values of all L basis functions at t. At most d + 1 entries
    // are nonzero and they sum to 1.
    Eigen::RowVectorXd eval(double t) const
    {
        const int i = find_span(t);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(count_);

        std::vector<double> local(degree_ + 1), left(degree_ + 1), right(degree_ + 1);
        local[0] = 1.0;
        for (int j = 1; j <= degree_; ++j) {
            left[j] = t - knots_[i + 1 - j];
            right[j] = knots_[i + j] - t;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                const double temp = local[r] / (right[r + 1] + left[j - r]);
                local[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            local[j] = saved;
        }
        for (int j = 0; j <= degree_; ++j)
            row(i - degree_ + j) = local[j];
        return row;
    }

    bool operator==(const BSplineBasis& other) const
    {
        return count_ == other.count_ && degree_ == other.degree_;
    }

private:
    int count_;
    int degree_;
    std::vector<double> knots_;
};

inline BSplineBasis make_basis(int count, int degree = 3)
{
    return BSplineBasis(count, degree);
}

// L x M matrix of basis values, column m = eval(grid[m]).
inline Eigen::MatrixXd eval_matrix(const BSplineBasis& basis,
                                   const std::vector<double>& grid)
{
    Eigen::MatrixXd B(basis.count(), static_cast<int>(grid.size()));
    for (int m = 0; m < static_cast<int>(grid.size()); ++m)
        B.col(m) = basis.eval(grid[m]).transpose();
    return B;
}

// W_{hl} = int_0^1 B_h B_l dt, by per-span Gauss-Legendre with d + 1 nodes
// (exact for the degree-2d integrand).
inline Eigen::MatrixXd gram_matrix(const BSplineBasis& basis)
{
    const int L = basis.count();
    const int d = basis.degree();
    const auto& knots = basis.knots();

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(L, L);
    for (int i = d; i < L; ++i) {
        if (knots[i + 1] <= knots[i])
            continue;
        const QuadRule rule = gauss_legendre(d + 1, knots[i], knots[i + 1]);
        for (int q = 0; q < d + 1; ++q) {
            const Eigen::RowVectorXd b = basis.eval(rule.nodes[q]);
            // only the d + 1 active functions are nonzero on this span
            for (int h = i - d; h <= i; ++h)
                for (int l = i - d; l <= i; ++l)
                    W(h, l) += rule.weights[q] * (b(h) * b(l));
        }
    }
    return W;
}

// A sample of curves held both as basis coefficients and as dense values on
// an evaluation grid; the two representations are kept consistent.
struct CurveSet {
    BSplineBasis basis;
    Eigen::MatrixXd coeffs;        // n x L
    std::vector<double> grid;      // length M
    Eigen::MatrixXd values;        // n x M, = coeffs * eval_matrix(basis, grid)

    int n() const { return static_cast<int>(coeffs.rows()); }
    int m() const { return static_cast<int>(grid.size()); }
};

inline CurveSet make_curve_set(const BSplineBasis& basis,
                               const Eigen::MatrixXd& coeffs,
                               const std::vector<double>& grid)
{
    if (coeffs.cols() != basis.count())
        throw invalid_input("make_curve_set: coefficient width != basis count");
    CurveSet cs{basis, coeffs, grid, {}};
    cs.values = coeffs * eval_matrix(basis, grid);
    return cs;
}

inline void check_grid(const std::vector<double>& grid)
{
    if (grid.size() < 2)
        throw invalid_input("grid must have at least 2 points");
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (grid[j] < 0.0 || grid[j] > 1.0)
            throw domain_error("grid point outside [0, 1]");
        if (j > 0 && grid[j] <= grid[j - 1])
            throw invalid_input("grid must be strictly increasing");
    }
}

// Per-curve ridge-regularized least squares fit of the observations Y (n x T
// on grid s) into the basis, with dense values materialized on out_grid.
inline CurveSet smooth_curves(const Eigen::MatrixXd& Y,
                              const std::vector<double>& s,
                              const BSplineBasis& basis,
                              double ridge,
                              const std::vector<double>& out_grid)
{
    check_grid(s);
    check_grid(out_grid);
    if (Y.cols() != static_cast<int>(s.size()))
        throw invalid_input("smooth_curves: Y width != observation grid size");
    if (ridge < 0.0)
        throw invalid_input("smooth_curves: ridge must be >= 0");

    const int L = basis.count();
    const Eigen::MatrixXd Phi = eval_matrix(basis, s).transpose(); // T x L

    Eigen::MatrixXd G = Phi.transpose() * Phi;
    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
        qr.setThreshold(1e-10);
        if (qr.rank() < L)
            throw singular_system(
                "smooth_curves: design matrix rank " +
                std::to_string(qr.rank()) + " < basis count " +
                std::to_string(L) + "; supply more observation points or ridge > 0");
    } else {
        G.diagonal().array() += ridge;
    }

    Eigen::LDLT<Eigen::MatrixXd> solver(G);
    Eigen::MatrixXd coeffs = solver.solve(Phi.transpose() * Y.transpose()).transpose();
    return make_curve_set(basis, coeffs, out_grid);
}

inline std::vector<double> uniform_grid(int m)
{
    if (m < 2)
        throw invalid_input("uniform_grid: need at least 2 points");
    std::vector<double> g(m);
    for (int j = 0; j < m; ++j)
        g[j] = static_cast<double>(j) / (m - 1);
    return g;
}

} // namespace nfpca
