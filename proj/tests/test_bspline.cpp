#include <doctest.h>

#include <cmath>

#include "nfpca/bspline.hpp"
#include "nfpca/rng.hpp"
#include "nfpca/simulation.hpp"

using namespace nfpca;

TEST_CASE("make_basis knot layout")
{
    SUBCASE("single-span cubic Bernstein basis")
    {
        const auto basis = make_basis(4, 3);
        const auto& knots = basis.knots();
        REQUIRE(knots.size() == 8);
        for (int i = 0; i < 4; ++i) {
            CHECK(knots[i] == 0.0);
            CHECK(knots[4 + i] == 1.0);
        }
    }
    SUBCASE("equally spaced interior knots")
    {
        const auto basis = make_basis(10, 3);
        const auto& knots = basis.knots();
        REQUIRE(knots.size() == 14);
        for (int j = 1; j <= 6; ++j)
            CHECK(knots[3 + j] == doctest::Approx(j / 7.0).epsilon(1e-15));
    }
    SUBCASE("L < d + 1 rejected")
    {
        CHECK_THROWS_AS(make_basis(3, 3), invalid_dimension);
    }
}

TEST_CASE("eval_basis values")
{
    const auto basis = make_basis(4, 3);
    SUBCASE("clamped left endpoint")
    {
        const auto row = basis.eval(0.0);
        CHECK(row(0) == 1.0);
        CHECK(row(1) == 0.0);
        CHECK(row(2) == 0.0);
        CHECK(row(3) == 0.0);
    }
    SUBCASE("Bernstein cubic at t = 0.5")
    {
        const auto row = basis.eval(0.5);
        CHECK(row(0) == doctest::Approx(0.125).epsilon(1e-14));
        CHECK(row(1) == doctest::Approx(0.375).epsilon(1e-14));
        CHECK(row(2) == doctest::Approx(0.375).epsilon(1e-14));
        CHECK(row(3) == doctest::Approx(0.125).epsilon(1e-14));
    }
    SUBCASE("domain error outside [0, 1]")
    {
        CHECK_THROWS_AS(basis.eval(-0.01), domain_error);
        CHECK_THROWS_AS(basis.eval(1.01), domain_error);
    }
}

TEST_CASE("partition of unity and local support at random points")
{
    const auto basis = make_basis(10, 3);
    Rng rng(42);
    for (int it = 0; it < 1000; ++it) {
        const double t = rng.uniform();
        const auto row = basis.eval(t);
        CHECK(std::abs(row.sum() - 1.0) < 1e-12);
        CHECK(row.minCoeff() >= 0.0);

        const int span = basis.find_span(t);
        int nonzero_outside = 0;
        for (int l = 0; l < 10; ++l)
            if ((l < span - 3 || l > span) && row(l) != 0.0)
                ++nonzero_outside;
        CHECK(nonzero_outside == 0);
    }
}

TEST_CASE("eval_matrix consistency")
{
    const auto basis = make_basis(7, 3);
    const auto grid = uniform_grid(33);
    const auto B = eval_matrix(basis, grid);
    REQUIRE(B.rows() == 7);
    REQUIRE(B.cols() == 33);

    CHECK(B(0, 0) == 1.0);
    CHECK(B.col(0).tail(6).cwiseAbs().maxCoeff() == 0.0);
    for (int m = 0; m < 33; ++m)
        CHECK(std::abs(B.col(m).sum() - 1.0) < 1e-12);

    // matrix route vs pointwise route on an in-span curve
    Rng rng(7);
    Eigen::VectorXd coef(7);
    for (int l = 0; l < 7; ++l)
        coef(l) = rng.normal();
    const Eigen::VectorXd dense = B.transpose() * coef;
    for (int m = 0; m < 33; ++m)
        CHECK(dense(m) == doctest::Approx(basis.eval(grid[m]) * coef).epsilon(1e-10));
}

TEST_CASE("gram matrix")
{
    SUBCASE("Bernstein closed form W11 = 1/7")
    {
        const auto W = gram_matrix(make_basis(4, 3));
        CHECK(std::abs(W(0, 0) - 1.0 / 7.0) < 1e-12);
    }
    SUBCASE("structure")
    {
        const auto basis = make_basis(10, 3);
        const auto W = gram_matrix(basis);
        CHECK(std::abs(W.sum() - 1.0) < 1e-12);
        CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(W.minCoeff() >= 0.0);
        // bandwidth d: entries |h - l| > 3 vanish
        for (int h = 0; h < 10; ++h)
            for (int l = 0; l < 10; ++l)
                if (std::abs(h - l) > 3)
                    CHECK(W(h, l) == 0.0);
    }
    SUBCASE("trapezoid-rule oracle")
    {
        const auto basis = make_basis(8, 3);
        const auto W = gram_matrix(basis);
        const int npts = 10000;
        const auto grid = uniform_grid(npts);
        const auto B = eval_matrix(basis, grid);
        Eigen::VectorXd weights = Eigen::VectorXd::Constant(npts, 1.0 / (npts - 1));
        weights(0) *= 0.5;
        weights(npts - 1) *= 0.5;
        const Eigen::MatrixXd W_trap = B * weights.asDiagonal() * B.transpose();
        CHECK((W - W_trap).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("smooth_curves")
{
    const auto basis = make_basis(10, 3);
    const auto s = uniform_grid(51);
    const auto out_grid = uniform_grid(101);

    SUBCASE("constant curves are reproduced")
    {
        Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(3, 51, 2.5);
        const auto cs = smooth_curves(Y, s, basis, 0.0, out_grid);
        CHECK((cs.values.array() - 2.5).abs().maxCoeff() < 1e-10);
    }
    SUBCASE("projection: in-span curves recover their own coefficients")
    {
        Rng rng(3);
        Eigen::MatrixXd coef(2, 10);
        for (int i = 0; i < coef.size(); ++i)
            coef(i / 10, i % 10) = rng.normal();
        const Eigen::MatrixXd Y = coef * eval_matrix(basis, s);
        const auto cs = smooth_curves(Y, s, basis, 0.0, out_grid);
        CHECK((cs.coeffs - coef).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("rank-deficient design without ridge is an error")
    {
        Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(1, 5);
        const auto coarse = uniform_grid(5);
        CHECK_THROWS_AS(smooth_curves(Y, coarse, basis, 0.0, out_grid),
                        singular_system);
    }
    SUBCASE("noisy simulated curves are recovered well")
    {
        SimCase sc;
        sc.case_id = 1;
        sc.noise_sd = 0.1;
        sc.obs_count = 51;
        sc.sample_size = 100;
        sc.seed = 11;
        const auto data = generate(sc, 101);
        const auto cs = smooth_curves(data.observations, data.obs_grid, basis,
                                      1e-9, data.eval_grid);
        const auto m = rmse(cs.values, data.truth);
        CHECK(m.rmse < 0.05);
    }
}
