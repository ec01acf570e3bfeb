#pragma once

#include <chrono>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfpca/bspline.hpp"
#include "nfpca/errors.hpp"
#include "nfpca/network.hpp"
#include "nfpca/rng.hpp"

namespace nfpca {

struct TrainConfig {
    NetworkDims dims;
    Activation activation = Activation::Tanh;
    AdamHyper adam;                 // lr default 1e-3
    int batch_size = 64;
    int max_epochs = 500;
    double validation_fraction = 0.2;
    int patience = 50;              // epochs past best validation; < 0 disables
    std::uint64_t seed = 0;

    void validate() const
    {
        if (validation_fraction < 0.0 || validation_fraction >= 1.0)
            throw invalid_input("TrainConfig: validation fraction must be in [0, 1)");
        if (batch_size < 1)
            throw invalid_input("TrainConfig: batch size must be >= 1");
        if (adam.lr <= 0.0 || adam.beta1 <= 0.0 || adam.beta2 <= 0.0 || adam.eps <= 0.0)
            throw invalid_input("TrainConfig: all rates must be positive");
        if (max_epochs < 1)
            throw invalid_input("TrainConfig: max epochs must be >= 1");
    }
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss; // NaN entries when no validation split
    std::vector<double> epoch_seconds;
    int best_epoch = 0;           // 0-based
    double best_loss = std::numeric_limits<double>::infinity();

    int epochs_run() const { return static_cast<int>(train_loss.size()); }
};

namespace detail {

// Fisher-Yates with our own generator; std::shuffle is implementation-defined.
inline void shuffle_indices(std::vector<int>& idx, Rng& rng)
{
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                                 const std::vector<int>& rows, int lo, int hi)
{
    Eigen::MatrixXd out(hi - lo, m.cols());
    for (int i = lo; i < hi; ++i)
        out.row(i - lo) = m.row(rows[i]);
    return out;
}

} // namespace detail

// Full training loop: shuffled minibatch Adam with validation monitoring and
// best-epoch checkpointing. Deterministic under a fixed seed.
inline std::pair<NetworkParams, TrainHistory>
train(const CurveSet& curves, const TrainConfig& config, std::ostream* log = nullptr)
{
    config.validate();
    if (curves.n() < 2)
        throw invalid_input("train: need at least 2 curves");
    if (config.dims.L != curves.basis.count())
        throw invalid_dimension("train: dims.L != curve basis count");

    const Eigen::MatrixXd Bmat = eval_matrix(curves.basis, curves.grid);

    Rng rng(config.seed);
    std::vector<int> order(curves.n());
    std::iota(order.begin(), order.end(), 0);
    detail::shuffle_indices(order, rng);

    const int n_val = static_cast<int>(curves.n() * config.validation_fraction);
    const int n_train = curves.n() - n_val;
    std::vector<int> train_idx(order.begin(), order.begin() + n_train);

    const Eigen::MatrixXd val_x = detail::take_rows(curves.coeffs, order, n_train, curves.n());
    const Eigen::MatrixXd val_t = detail::take_rows(curves.values, order, n_train, curves.n());

    NetworkParams params = init_params(config.dims, config.activation, config.seed);
    AdamState adam = make_adam_state(config.dims, config.activation);
    NetworkParams grads = zeros_like_params(config.dims, config.activation);

    TrainHistory history;
    NetworkParams best = params;
    int step = 0;

    if (log)
        *log << "epoch\ttrain_loss\tval_loss\n";

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        detail::shuffle_indices(train_idx, rng);

        double epoch_loss = 0.0;
        int batches = 0;
        for (int lo = 0; lo < n_train; lo += config.batch_size) {
            const int hi = std::min(lo + config.batch_size, n_train);
            const Eigen::MatrixXd bx = detail::take_rows(curves.coeffs, train_idx, lo, hi);
            const Eigen::MatrixXd bt = detail::take_rows(curves.values, train_idx, lo, hi);
            const double batch_loss = batch_loss_grad(params, bx, bt, Bmat, grads);
            if (!std::isfinite(batch_loss))
                throw training_aborted("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(batches));
            adam_step(params, grads, adam, config.adam, ++step);
            epoch_loss += batch_loss;
            ++batches;
        }
        epoch_loss /= batches;

        double monitored = epoch_loss;
        double v = std::numeric_limits<double>::quiet_NaN();
        if (n_val > 0) {
            v = loss(batch_reconstruct(params, val_x, Bmat), val_t);
            monitored = v;
        }

        history.train_loss.push_back(epoch_loss);
        history.val_loss.push_back(v);
        history.epoch_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (log)
            *log << epoch << '\t' << epoch_loss << '\t' << v << '\n';

        if (monitored < history.best_loss) {
            history.best_loss = monitored;
            history.best_epoch = epoch;
            best = params;
        }
        if (config.patience >= 0 && epoch - history.best_epoch >= config.patience)
            break;
    }
    return {best, history};
}

// Row i = decode(encode(x_i)) on the requested grid.
inline Eigen::MatrixXd reconstruct_all(const NetworkParams& params,
                                       const CurveSet& curves,
                                       const std::vector<double>& grid)
{
    return batch_reconstruct(params, curves.coeffs, eval_matrix(curves.basis, grid));
}

} // namespace nfpca
