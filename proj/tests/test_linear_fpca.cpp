#include <doctest.h>

#include <cmath>

#include "nfpca/bspline.hpp"
#include "nfpca/linear_fpca.hpp"
#include "nfpca/rng.hpp"
#include "nfpca/simulation.hpp"

using namespace nfpca;

namespace {

CurveSet case1_curves(int n, double noise_sd, std::uint64_t seed,
                      const BSplineBasis& basis)
{
    SimCase sc;
    sc.case_id = 1;
    sc.noise_sd = noise_sd;
    sc.obs_count = 51;
    sc.sample_size = n;
    sc.seed = seed;
    const auto data = generate(sc, 101);
    return smooth_curves(data.observations, data.obs_grid, basis, 1e-9,
                         data.eval_grid);
}

} // namespace

TEST_CASE("fit_fpca on noiseless rank-2 data")
{
    const auto basis = make_basis(10, 3);
    const auto gram = gram_matrix(basis);
    const auto curves = case1_curves(1000, 0.0, 21, basis);
    const auto model = fit_fpca(curves, gram, 3);

    // generator mode sin(2pi t) has squared L2 norm 1/2 on [0, 1], so the
    // operator eigenvalues are Var(xi_k) / 2
    CHECK(model.eigenvalues(0) == doctest::Approx(4.5).epsilon(0.15));
    CHECK(model.eigenvalues(1) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(model.eigenvalues(2) < 0.01 * model.eigenvalues(0));

    const Eigen::MatrixXd ortho =
        model.components * gram * model.components.transpose();
    CHECK((ortho - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit_fpca degenerate and error cases")
{
    const auto basis = make_basis(8, 3);
    const auto gram = gram_matrix(basis);

    SUBCASE("identical curves")
    {
        Eigen::RowVectorXd coef(8);
        coef << 1, 2, 0, -1, 3, 0.5, 2, 1;
        Eigen::MatrixXd coeffs = coef.replicate(20, 1);
        const auto curves = make_curve_set(basis, coeffs, uniform_grid(11));
        const auto model = fit_fpca(curves, gram, 2);
        CHECK(model.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-10));
        CHECK((model.mean - coef).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("K out of range")
    {
        Eigen::MatrixXd coeffs = Eigen::MatrixXd::Random(5, 8);
        const auto curves = make_curve_set(basis, coeffs, uniform_grid(11));
        CHECK_THROWS_AS(fit_fpca(curves, gram, 0), invalid_dimension);
        CHECK_THROWS_AS(fit_fpca(curves, gram, 5), invalid_dimension);
    }
    SUBCASE("W-orthonormality on random data")
    {
        Eigen::MatrixXd coeffs = Eigen::MatrixXd::Random(40, 8);
        const auto curves = make_curve_set(basis, coeffs, uniform_grid(11));
        const auto model = fit_fpca(curves, gram, 4);
        const Eigen::MatrixXd ortho =
            model.components * gram * model.components.transpose();
        CHECK((ortho - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("fpca_scores")
{
    const auto basis = make_basis(10, 3);
    const auto gram = gram_matrix(basis);
    const auto curves = case1_curves(400, 0.0, 5, basis);
    const auto model = fit_fpca(curves, gram, 2);
    const auto grid = uniform_grid(101);

    SUBCASE("mean curve scores to zero")
    {
        const auto mean_set = make_curve_set(basis, model.mean, grid);
        const auto scores = fpca_scores(model, mean_set);
        CHECK(scores.cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("mean plus c * phi_k scores to c * e_k")
    {
        for (int k = 0; k < 2; ++k) {
            const double c = 1.7;
            Eigen::MatrixXd coeffs = model.mean + c * model.components.row(k);
            const auto one = make_curve_set(basis, coeffs, grid);
            const auto scores = fpca_scores(model, one);
            for (int l = 0; l < 2; ++l)
                CHECK(scores(0, l) == doctest::Approx(l == k ? c : 0.0).epsilon(1e-8));
        }
    }
    SUBCASE("dense trapezoid quadrature oracle")
    {
        const auto scores = fpca_scores(model, curves);
        const auto fine = uniform_grid(2001);
        const auto B = eval_matrix(basis, fine);
        Eigen::VectorXd w = Eigen::VectorXd::Constant(2001, 1.0 / 2000);
        w(0) *= 0.5;
        w(2000) *= 0.5;
        for (int i = 0; i < 5; ++i) {
            const Eigen::VectorXd centered =
                B.transpose() * (curves.coeffs.row(i) - model.mean).transpose();
            for (int k = 0; k < 2; ++k) {
                const Eigen::VectorXd phi =
                    B.transpose() * model.components.row(k).transpose();
                const double oracle = (centered.array() * phi.array() * w.array()).sum();
                CHECK(scores(i, k) == doctest::Approx(oracle).epsilon(1e-5));
            }
        }
    }
    SUBCASE("basis mismatch rejected")
    {
        const auto other = make_basis(12, 3);
        Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(1, 12);
        const auto bad = make_curve_set(other, coeffs, grid);
        CHECK_THROWS_AS(fpca_scores(model, bad), invalid_input);
    }
}

TEST_CASE("fpca_reconstruct")
{
    const auto basis = make_basis(10, 3);
    const auto gram = gram_matrix(basis);
    const auto grid = uniform_grid(101);
    const auto curves = case1_curves(500, 0.0, 77, basis);

    SUBCASE("zero scores give the mean curve")
    {
        const auto model = fit_fpca(curves, gram, 2);
        const Eigen::MatrixXd rec =
            fpca_reconstruct(model, Eigen::MatrixXd::Zero(1, 2), grid);
        const Eigen::MatrixXd mean_vals = model.mean * eval_matrix(basis, grid);
        CHECK((rec - mean_vals).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("round trip on rank-2 data at K = 2")
    {
        const auto model = fit_fpca(curves, gram, 2);
        const auto rec = fpca_reconstruct(model, fpca_scores(model, curves), grid);
        const auto m = rmse(rec, curves.values);
        CHECK(m.rmse < 1e-6);
    }
    SUBCASE("reconstruction error nonincreasing in K, exact at K = L")
    {
        Rng rng(13);
        Eigen::MatrixXd coeffs(50, 10);
        for (int i = 0; i < 50; ++i)
            for (int l = 0; l < 10; ++l)
                coeffs(i, l) = rng.normal();
        const auto rich = make_curve_set(basis, coeffs, grid);
        double prev = 1e100;
        for (int K = 1; K <= 10; ++K) {
            const auto model = fit_fpca(rich, gram, K);
            const auto rec = fpca_reconstruct(model, fpca_scores(model, rich), grid);
            const double err = rmse(rec, rich.values).rmse;
            CHECK(err <= prev + 1e-12);
            prev = err;
        }
        CHECK(prev < 1e-6);
    }
    SUBCASE("score covariance approximately diagonal with eigenvalue entries")
    {
        const auto model = fit_fpca(curves, gram, 2);
        const auto scores = fpca_scores(model, curves);
        const Eigen::MatrixXd centered = scores.rowwise() - scores.colwise().mean();
        const Eigen::MatrixXd cov =
            centered.transpose() * centered / (scores.rows() - 1.0);
        const double n = scores.rows();
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(cov(k, k) - model.eigenvalues(k)) <
                  3.0 * model.eigenvalues(k) / std::sqrt(n));
        CHECK(std::abs(cov(0, 1)) < 3.0 * model.eigenvalues(1) / std::sqrt(n));
    }
    SUBCASE("score width must equal K")
    {
        const auto model = fit_fpca(curves, gram, 2);
        CHECK_THROWS_AS(fpca_reconstruct(model, Eigen::MatrixXd::Zero(1, 3), grid),
                        invalid_dimension);
    }
}
