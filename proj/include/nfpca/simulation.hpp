#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfpca/bspline.hpp"
#include "nfpca/errors.hpp"
#include "nfpca/rng.hpp"

namespace nfpca {

// One simulated-data scenario: case id, noise level, observation design.
struct SimCase {
    int case_id = 1;        // 1..5
    double noise_sd = 0.1;  // delta
    int obs_count = 51;     // T
    int sample_size = 1000; // n
    std::uint64_t seed = 0;

    void validate() const
    {
        if (case_id < 1 || case_id > 5)
            throw invalid_input("SimCase: case id must be in 1..5");
        if (noise_sd < 0.0)
            throw invalid_input("SimCase: noise sd must be >= 0");
        if (obs_count < 2)
            throw invalid_input("SimCase: need T >= 2");
        if (sample_size < 1)
            throw invalid_input("SimCase: need n >= 1");
    }
};

// True curve value for one subject with latent scores (xi1, xi2).
inline double truth_curve(int case_id, double xi1, double xi2, double t)
{
    const double two_pi_t = 2.0 * M_PI * t;
    switch (case_id) {
    case 1: return xi1 * std::sin(two_pi_t) + xi2 * std::cos(two_pi_t);
    case 2: return xi2 * std::sin(xi1 * t);
    case 3: return xi2 * std::cos(xi1 * t);
    case 4:
        return xi1 * std::sin(two_pi_t) + xi2 * std::cos(two_pi_t) +
               xi2 * std::sin(xi1 * t);
    case 5:
        return xi1 * std::sin(two_pi_t) + xi2 * std::cos(two_pi_t) +
               xi2 * std::cos(xi1 * t);
    default:
        throw invalid_input("truth_curve: unknown case id " + std::to_string(case_id));
    }
}

struct SimData {
    Eigen::MatrixXd observations; // n x T, truth + noise on obs_grid
    std::vector<double> obs_grid; // length T
    Eigen::MatrixXd truth;        // n x M, noiseless values on eval_grid
    std::vector<double> eval_grid;
    Eigen::MatrixXd scores;       // n x 2 latent draws
};

// Draw scores and observation noise, evaluate the truth on both the
// observation grid and a separate evaluation grid.
inline SimData generate(const SimCase& sc, int eval_count = 101)
{
    sc.validate();
    SimData data;
    data.obs_grid = uniform_grid(sc.obs_count);
    data.eval_grid = uniform_grid(eval_count);

    Rng rng(sc.seed);
    const double sd1 = sc.case_id == 1 ? 3.0 : 2.0;
    const double sd2 = 2.0;

    data.scores.resize(sc.sample_size, 2);
    data.observations.resize(sc.sample_size, sc.obs_count);
    data.truth.resize(sc.sample_size, eval_count);
    for (int i = 0; i < sc.sample_size; ++i) {
        const double xi1 = rng.normal(0.0, sd1);
        const double xi2 = rng.normal(0.0, sd2);
        data.scores(i, 0) = xi1;
        data.scores(i, 1) = xi2;
        for (int j = 0; j < sc.obs_count; ++j)
            data.observations(i, j) =
                truth_curve(sc.case_id, xi1, xi2, data.obs_grid[j]) +
                rng.normal(0.0, sc.noise_sd);
        for (int m = 0; m < eval_count; ++m)
            data.truth(i, m) = truth_curve(sc.case_id, xi1, xi2, data.eval_grid[m]);
    }
    return data;
}

struct Metrics {
    double rmse = 0.0;
    double rrmse = 0.0;
};

// RMSE / RRMSE over all n x M cells, every grid point included.
inline Metrics rmse(const Eigen::MatrixXd& reconstruction,
                    const Eigen::MatrixXd& truth)
{
    if (reconstruction.rows() != truth.rows() ||
        reconstruction.cols() != truth.cols())
        throw invalid_dimension("rmse: shape mismatch");
    const double cells = static_cast<double>(truth.size());
    const double sq = (reconstruction - truth).squaredNorm();
    const double truth_sq = truth.squaredNorm();
    Metrics out;
    out.rmse = std::sqrt(sq / cells);
    if (truth_sq == 0.0)
        throw invalid_input("rmse: RRMSE undefined for all-zero targets");
    out.rrmse = std::sqrt(sq) / std::sqrt(truth_sq);
    return out;
}

// Same criteria with noisy observations as targets.
inline Metrics rmse_observed(const Eigen::MatrixXd& reconstruction,
                             const Eigen::MatrixXd& observations)
{
    return rmse(reconstruction, observations);
}

} // namespace nfpca
