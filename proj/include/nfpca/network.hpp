#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfpca/errors.hpp"
#include "nfpca/rng.hpp"

namespace nfpca {

enum class Activation { Tanh, Sigmoid, Relu };

inline std::string activation_name(Activation a)
{
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    }
    throw invalid_input("unknown activation");
}

inline Activation activation_from_name(const std::string& name)
{
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    throw invalid_input("unknown activation '" + name + "'");
}

inline double act_value(Activation a, double z)
{
    switch (a) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    }
    return 0.0;
}

inline double act_deriv(Activation a, double z)
{
    switch (a) {
    case Activation::Tanh: {
        const double th = std::tanh(z);
        return 1.0 - th * th;
    }
    case Activation::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return s * (1.0 - s);
    }
    case Activation::Relu:
        return z > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

template <typename Derived>
Eigen::MatrixXd act_value(Activation a, const Eigen::MatrixBase<Derived>& z)
{
    return z.unaryExpr([a](double v) { return act_value(a, v); });
}

template <typename Derived>
Eigen::MatrixXd act_deriv(Activation a, const Eigen::MatrixBase<Derived>& z)
{
    return z.unaryExpr([a](double v) { return act_deriv(a, v); });
}

struct NetworkDims {
    int L = 0; // basis count (input width)
    int J = 0; // encoder units
    int K = 0; // bottleneck scores
    int R = 0; // decoder units

    bool operator==(const NetworkDims&) const = default;
};

// All trainable quantities of the transformed autoassociative network.
// b, u are stored as single-column matrices so that every array is uniform
// for the optimizer and serialization.
struct NetworkParams {
    NetworkDims dims;
    Activation activation = Activation::Tanh;
    Eigen::MatrixXd b; // J x 1 encoder intercepts
    Eigen::MatrixXd D; // J x L folded encoder weights
    Eigen::MatrixXd w; // J x K bottleneck weights
    Eigen::MatrixXd A; // R x L decoder intercept coefficients
    std::vector<Eigen::MatrixXd> V; // K matrices, each R x L
    Eigen::MatrixXd u; // R x 1 output weights

    std::vector<Eigen::MatrixXd*> arrays()
    {
        std::vector<Eigen::MatrixXd*> out{&b, &D, &w, &A};
        for (auto& vk : V)
            out.push_back(&vk);
        out.push_back(&u);
        return out;
    }

    std::vector<const Eigen::MatrixXd*> arrays() const
    {
        std::vector<const Eigen::MatrixXd*> out{&b, &D, &w, &A};
        for (const auto& vk : V)
            out.push_back(&vk);
        out.push_back(&u);
        return out;
    }

    std::vector<std::string> array_names() const
    {
        std::vector<std::string> names{"b", "D", "w", "A"};
        for (int k = 0; k < dims.K; ++k)
            names.push_back("V" + std::to_string(k));
        names.push_back("u");
        return names;
    }

    bool all_finite() const
    {
        for (const auto* arr : arrays())
            if (!arr->allFinite())
                return false;
        return true;
    }
};

inline NetworkParams zeros_like_params(const NetworkDims& dims, Activation act)
{
    NetworkParams p;
    p.dims = dims;
    p.activation = act;
    p.b = Eigen::MatrixXd::Zero(dims.J, 1);
    p.D = Eigen::MatrixXd::Zero(dims.J, dims.L);
    p.w = Eigen::MatrixXd::Zero(dims.J, dims.K);
    p.A = Eigen::MatrixXd::Zero(dims.R, dims.L);
    p.V.assign(dims.K, Eigen::MatrixXd::Zero(dims.R, dims.L));
    p.u = Eigen::MatrixXd::Zero(dims.R, 1);
    return p;
}

// Uniform fan-based initialization, intercepts b and A zero. The draw order
// is fixed (D, w, V, u, row-major) so a seed is reproducible.
inline NetworkParams init_params(const NetworkDims& dims, Activation act,
                                 std::uint64_t seed)
{
    if (dims.L < 1 || dims.J < 1 || dims.K < 1 || dims.R < 1)
        throw invalid_dimension("init_params: all dims must be >= 1");

    NetworkParams p = zeros_like_params(dims, act);
    Rng rng(seed);

    auto fill = [&rng](Eigen::MatrixXd& m, double limit) {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                m(i, j) = rng.uniform(-limit, limit);
    };
    fill(p.D, std::sqrt(6.0 / (dims.L + dims.J)));
    fill(p.w, std::sqrt(6.0 / (dims.J + dims.K)));
    for (auto& vk : p.V)
        fill(vk, std::sqrt(6.0 / (dims.K + dims.R)));
    fill(p.u, std::sqrt(6.0 / (dims.R + 1)));
    return p;
}

// Cached per-curve intermediates of one forward pass.
struct ForwardTrace {
    Eigen::VectorXd x;          // L input coefficients
    Eigen::VectorXd encoder_pre; // J
    Eigen::VectorXd h1;          // J
    Eigen::VectorXd scores;      // K
    Eigen::MatrixXd coef_rows;   // R x L, A_r + sum_k V_kr * score_k
    Eigen::MatrixXd decoder_pre; // R x M
    Eigen::MatrixXd h3;          // R x M
    Eigen::VectorXd output;      // M
};

inline Eigen::VectorXd encode(const NetworkParams& p, const Eigen::VectorXd& x)
{
    if (x.size() != p.dims.L)
        throw invalid_dimension("encode: input length != L");
    if (!x.allFinite())
        throw invalid_input("encode: non-finite input");
    const Eigen::VectorXd pre = p.b.col(0) + p.D * x;
    const Eigen::VectorXd h1 = act_value(p.activation, pre);
    return p.w.transpose() * h1; // plain weighted sum, no bottleneck activation
}

inline Eigen::VectorXd decode(const NetworkParams& p, const Eigen::VectorXd& scores,
                              const Eigen::MatrixXd& Bmat)
{
    if (scores.size() != p.dims.K)
        throw invalid_dimension("decode: score length != K");
    if (Bmat.rows() != p.dims.L)
        throw invalid_dimension("decode: Bmat rows != L");
    Eigen::MatrixXd C = p.A;
    for (int k = 0; k < p.dims.K; ++k)
        C += scores(k) * p.V[k];
    const Eigen::MatrixXd h3 = act_value(p.activation, C * Bmat);
    return h3.transpose() * p.u.col(0);
}

inline ForwardTrace forward(const NetworkParams& p, const Eigen::VectorXd& x,
                            const Eigen::MatrixXd& Bmat)
{
    if (x.size() != p.dims.L)
        throw invalid_dimension("forward: input length != L");
    if (!x.allFinite())
        throw invalid_input("forward: non-finite input");
    ForwardTrace t;
    t.x = x;
    t.encoder_pre = p.b.col(0) + p.D * x;
    t.h1 = act_value(p.activation, t.encoder_pre);
    t.scores = p.w.transpose() * t.h1;
    t.coef_rows = p.A;
    for (int k = 0; k < p.dims.K; ++k)
        t.coef_rows += t.scores(k) * p.V[k];
    t.decoder_pre = t.coef_rows * Bmat;
    t.h3 = act_value(p.activation, t.decoder_pre);
    t.output = t.h3.transpose() * p.u.col(0);
    return t;
}

// Right-hand Riemann-sum reconstruction loss: the first grid column is
// excluded, every later column contributes with weight 1 / (M - 1).
inline double loss(const Eigen::MatrixXd& reconstruction,
                   const Eigen::MatrixXd& target)
{
    if (reconstruction.rows() != target.rows() ||
        reconstruction.cols() != target.cols())
        throw invalid_dimension("loss: shape mismatch");
    const int M = static_cast<int>(target.cols());
    if (M < 2)
        throw invalid_dimension("loss: need M >= 2 grid columns");
    const Eigen::MatrixXd diff =
        reconstruction.rightCols(M - 1) - target.rightCols(M - 1);
    return diff.squaredNorm() / ((M - 1) * static_cast<double>(target.rows()));
}

// Exact partials of the per-curve loss term with respect to every parameter.
inline NetworkParams backward(const NetworkParams& p, const ForwardTrace& t,
                              const Eigen::VectorXd& target,
                              const Eigen::MatrixXd& Bmat)
{
    const int M = static_cast<int>(target.size());
    NetworkParams g = zeros_like_params(p.dims, p.activation);

    Eigen::VectorXd d_out = Eigen::VectorXd::Zero(M);
    d_out.tail(M - 1) =
        (2.0 / (M - 1)) * (t.output.tail(M - 1) - target.tail(M - 1));

    g.u.col(0) = t.h3 * d_out;

    const Eigen::MatrixXd d_h3 = p.u.col(0) * d_out.transpose();        // R x M
    const Eigen::MatrixXd d_pre3 =
        d_h3.cwiseProduct(act_deriv(p.activation, t.decoder_pre));
    const Eigen::MatrixXd d_coef = d_pre3 * Bmat.transpose();           // R x L

    g.A = d_coef;
    Eigen::VectorXd d_scores(p.dims.K);
    for (int k = 0; k < p.dims.K; ++k) {
        g.V[k] = t.scores(k) * d_coef;
        d_scores(k) = p.V[k].cwiseProduct(d_coef).sum();
    }

    g.w = t.h1 * d_scores.transpose();
    const Eigen::VectorXd d_h1 = p.w * d_scores;
    const Eigen::VectorXd d_pre1 =
        d_h1.cwiseProduct(act_deriv(p.activation, t.encoder_pre));
    g.b.col(0) = d_pre1;
    g.D = d_pre1 * t.x.transpose();
    return g;
}

// Batched forward over the rows of X (nb x L). Row i equals
// decode(encode(x_i)). The decoder is evaluated through the precomputed
// grid images P = A * Bmat and Q_k = V_k * Bmat, which avoids the R x L x M
// product per curve.
inline Eigen::MatrixXd batch_reconstruct(const NetworkParams& p,
                                         const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& Bmat)
{
    if (X.cols() != p.dims.L)
        throw invalid_dimension("batch_reconstruct: input width != L");
    const int nb = static_cast<int>(X.rows());
    const int M = static_cast<int>(Bmat.cols());

    const Eigen::MatrixXd H1 =
        act_value(p.activation,
                  (X * p.D.transpose()).rowwise() + p.b.col(0).transpose());
    const Eigen::MatrixXd S = H1 * p.w; // nb x K

    const Eigen::MatrixXd P = p.A * Bmat; // R x M
    std::vector<Eigen::MatrixXd> Q(p.dims.K);
    for (int k = 0; k < p.dims.K; ++k)
        Q[k] = p.V[k] * Bmat;

    Eigen::MatrixXd out(nb, M);
    Eigen::MatrixXd pre(p.dims.R, M);
    for (int i = 0; i < nb; ++i) {
        pre = P;
        for (int k = 0; k < p.dims.K; ++k)
            pre += S(i, k) * Q[k];
        out.row(i) = (act_value(p.activation, pre).transpose() * p.u.col(0)).transpose();
    }
    return out;
}

// Batch loss and mean gradient in one pass; algebraically identical to
// averaging per-curve backward() results.
inline double batch_loss_grad(const NetworkParams& p, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& target,
                              const Eigen::MatrixXd& Bmat, NetworkParams& grads)
{
    if (X.cols() != p.dims.L)
        throw invalid_dimension("batch_loss_grad: input width != L");
    if (target.rows() != X.rows() || target.cols() != Bmat.cols())
        throw invalid_dimension("batch_loss_grad: target shape mismatch");
    const int nb = static_cast<int>(X.rows());
    const int M = static_cast<int>(Bmat.cols());
    if (M < 2)
        throw invalid_dimension("batch_loss_grad: need M >= 2");

    grads = zeros_like_params(p.dims, p.activation);

    const Eigen::MatrixXd Z1 =
        (X * p.D.transpose()).rowwise() + p.b.col(0).transpose();
    const Eigen::MatrixXd H1 = act_value(p.activation, Z1);
    const Eigen::MatrixXd S = H1 * p.w; // nb x K

    const Eigen::MatrixXd P = p.A * Bmat;
    std::vector<Eigen::MatrixXd> Q(p.dims.K);
    for (int k = 0; k < p.dims.K; ++k)
        Q[k] = p.V[k] * Bmat;

    Eigen::MatrixXd d_scores(nb, p.dims.K);
    Eigen::MatrixXd d_pre_sum = Eigen::MatrixXd::Zero(p.dims.R, M);
    std::vector<Eigen::MatrixXd> d_pre_scored(
        p.dims.K, Eigen::MatrixXd::Zero(p.dims.R, M));

    double total = 0.0;
    Eigen::MatrixXd pre(p.dims.R, M), h3(p.dims.R, M), d_pre(p.dims.R, M);
    Eigen::VectorXd d_out = Eigen::VectorXd::Zero(M);
    for (int i = 0; i < nb; ++i) {
        pre = P;
        for (int k = 0; k < p.dims.K; ++k)
            pre += S(i, k) * Q[k];
        h3 = act_value(p.activation, pre);
        const Eigen::VectorXd xhat = h3.transpose() * p.u.col(0);

        const Eigen::VectorXd resid =
            xhat.tail(M - 1) - target.row(i).tail(M - 1).transpose();
        total += resid.squaredNorm() / (M - 1);
        d_out.tail(M - 1) = (2.0 / (M - 1)) * resid;

        grads.u.col(0) += h3 * d_out;
        d_pre = (p.u.col(0) * d_out.transpose())
                    .cwiseProduct(act_deriv(p.activation, pre));
        d_pre_sum += d_pre;
        for (int k = 0; k < p.dims.K; ++k) {
            d_pre_scored[k] += S(i, k) * d_pre;
            d_scores(i, k) = Q[k].cwiseProduct(d_pre).sum();
        }
    }

    grads.A = d_pre_sum * Bmat.transpose();
    for (int k = 0; k < p.dims.K; ++k)
        grads.V[k] = d_pre_scored[k] * Bmat.transpose();

    grads.w = H1.transpose() * d_scores;
    const Eigen::MatrixXd d_z1 =
        (d_scores * p.w.transpose()).cwiseProduct(act_deriv(p.activation, Z1));
    grads.b.col(0) = d_z1.colwise().sum().transpose();
    grads.D = d_z1.transpose() * X;

    const double inv_n = 1.0 / nb;
    for (auto* arr : grads.arrays())
        *arr *= inv_n;
    return total * inv_n;
}

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    NetworkParams m;
    NetworkParams v;
};

inline AdamState make_adam_state(const NetworkDims& dims, Activation act)
{
    return AdamState{zeros_like_params(dims, act), zeros_like_params(dims, act)};
}

// One bias-corrected Adam update, in place.
inline void adam_step(NetworkParams& params, const NetworkParams& grads,
                      AdamState& state, const AdamHyper& hyper, int step_index)
{
    if (!grads.all_finite())
        throw training_aborted("adam_step: non-finite gradient");
    const double bc1 = 1.0 - std::pow(hyper.beta1, step_index);
    const double bc2 = 1.0 - std::pow(hyper.beta2, step_index);

    auto theta = params.arrays();
    auto g = grads.arrays();
    auto m = state.m.arrays();
    auto v = state.v.arrays();
    for (std::size_t i = 0; i < theta.size(); ++i) {
        *m[i] = hyper.beta1 * *m[i] + (1.0 - hyper.beta1) * *g[i];
        *v[i] = hyper.beta2 * *v[i] + (1.0 - hyper.beta2) * g[i]->cwiseProduct(*g[i]);
        const Eigen::MatrixXd m_hat = *m[i] / bc1;
        const Eigen::MatrixXd v_hat = *v[i] / bc2;
        *theta[i] -= hyper.lr *
            (m_hat.array() / (v_hat.array().sqrt() + hyper.eps)).matrix();
    }
}

} // namespace nfpca
