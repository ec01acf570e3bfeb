#pragma once

#include <string>

#include <Eigen/Dense>

#include "nfpca/bspline.hpp"
#include "nfpca/errors.hpp"

namespace nfpca {

// Linear FPCA model in basis-coefficient space. Eigenfunction rows are
// W-orthonormal: Phi * W * Phi^T = I_K.
struct FpcaModel {
    BSplineBasis basis;
    Eigen::MatrixXd gram;          // L x L
    Eigen::RowVectorXd mean;       // length L, coefficient row of the mean
    Eigen::MatrixXd components;    // K x L, eigenfunction coefficient rows
    Eigen::VectorXd eigenvalues;   // length K, nonincreasing

    int k() const { return static_cast<int>(components.rows()); }
};

// Eigen-square-root factor S with S^T S = W (W symmetric PSD).
inline Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& W)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::runtime_error("symmetric_sqrt: matrix is not PSD");
    Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

inline FpcaModel fit_fpca(const CurveSet& curves, const Eigen::MatrixXd& gram, int K)
{
    const int n = curves.n();
    const int L = curves.basis.count();
    if (K < 1 || K > std::min(n - 1, L))
        throw invalid_dimension("fit_fpca: K = " + std::to_string(K) +
                                " outside [1, min(n-1, L)]");

    const Eigen::RowVectorXd mean = curves.coeffs.colwise().mean();
    const Eigen::MatrixXd centered = curves.coeffs.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    // Whiten by the W-metric: eigenproblem of S Cov S^T with S^T S = W.
    const Eigen::MatrixXd S = symmetric_sqrt(gram);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S * cov * S.transpose());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("fit_fpca: eigendecomposition failed");

    Eigen::LDLT<Eigen::MatrixXd> s_solver(S);

    FpcaModel model{curves.basis, gram, mean,
                    Eigen::MatrixXd(K, L), Eigen::VectorXd(K)};
    for (int k = 0; k < K; ++k) {
        const int src = L - 1 - k; // SelfAdjointEigenSolver sorts ascending
        model.eigenvalues(k) = std::max(0.0, es.eigenvalues()(src));
        Eigen::VectorXd phi = s_solver.solve(es.eigenvectors().col(src));
        const double norm = std::sqrt(phi.dot(gram * phi));
        if (norm > 0.0)
            phi /= norm;
        // deterministic sign: largest-magnitude coefficient positive
        int idx = 0;
        phi.cwiseAbs().maxCoeff(&idx);
        if (phi(idx) < 0.0)
            phi = -phi;
        model.components.row(k) = phi.transpose();
    }
    return model;
}

inline Eigen::MatrixXd fpca_scores(const FpcaModel& model, const CurveSet& curves)
{
    if (!(curves.basis == model.basis))
        throw invalid_input("fpca_scores: curve basis differs from model basis");
    const Eigen::MatrixXd centered = curves.coeffs.rowwise() - model.mean;
    return centered * model.gram * model.components.transpose();
}

inline Eigen::MatrixXd fpca_reconstruct(const FpcaModel& model,
                                        const Eigen::MatrixXd& scores,
                                        const std::vector<double>& grid)
{
    if (scores.cols() != model.k())
        throw invalid_dimension("fpca_reconstruct: score width != K");
    const Eigen::MatrixXd coeffs =
        (scores * model.components).rowwise() + model.mean;
    return coeffs * eval_matrix(model.basis, grid);
}

} // namespace nfpca
