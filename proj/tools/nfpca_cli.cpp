// Command-line surface for the nonlinear functional PCA toolkit:
// simulate / smooth / train / evaluate / sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfpca/bspline.hpp"
#include "nfpca/csv.hpp"
#include "nfpca/linear_fpca.hpp"
#include "nfpca/model_io.hpp"
#include "nfpca/simulation.hpp"
#include "nfpca/trainer.hpp"

namespace fs = std::filesystem;
using namespace nfpca;

namespace {

struct CommonOpts {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts)
{
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->set_config("--config", "", "key=value config file");
    cmd->allow_config_extras(false);
}

std::vector<double> index_grid(int n)
{
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = i;
    return g;
}

struct BasisOpts {
    int L = 10;
    int degree = 3;
    double ridge = 1e-9;
};

void add_basis(CLI::App* cmd, BasisOpts& opts)
{
    cmd->add_option("--L", opts.L, "number of B-spline basis functions");
    cmd->add_option("--degree", opts.degree, "B-spline degree");
    cmd->add_option("--ridge", opts.ridge, "smoothing ridge");
}

struct NetOpts {
    int J = 20;
    int K = 2;
    int R = 20;
    std::string activation = "tanh";
    double lr = 1e-3;
    int batch_size = 64;
    int epochs = 500;
    double val_fraction = 0.2;
    int patience = 50;
};

void add_net(CLI::App* cmd, NetOpts& opts)
{
    cmd->add_option("--J", opts.J, "encoder units");
    cmd->add_option("--K", opts.K, "bottleneck scores");
    cmd->add_option("--R", opts.R, "decoder units");
    cmd->add_option("--activation", opts.activation, "tanh|sigmoid|relu");
    cmd->add_option("--lr", opts.lr, "Adam learning rate");
    cmd->add_option("--batch-size", opts.batch_size, "minibatch size");
    cmd->add_option("--epochs", opts.epochs, "max training epochs");
    cmd->add_option("--val-fraction", opts.val_fraction, "validation fraction");
    cmd->add_option("--patience", opts.patience, "early-stop patience, <0 disables");
}

TrainConfig make_train_config(const BasisOpts& basis, const NetOpts& net,
                              std::uint64_t seed)
{
    if (basis.L < basis.degree + 1)
        throw invalid_input("L must be >= degree + 1");
    if (net.K > net.J)
        throw invalid_input("K must not exceed J");
    TrainConfig cfg;
    cfg.dims = NetworkDims{basis.L, net.J, net.K, net.R};
    cfg.activation = activation_from_name(net.activation);
    cfg.adam.lr = net.lr;
    cfg.batch_size = net.batch_size;
    cfg.max_epochs = net.epochs;
    cfg.validation_fraction = net.val_fraction;
    cfg.patience = net.patience;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

Eigen::MatrixXd load_observations(const std::string& data_path, bool ucr,
                                  std::vector<double>& grid)
{
    if (ucr) {
        const auto data = read_ucr(data_path);
        grid = data.grid;
        return data.values;
    }
    const auto data = read_matrix_csv(data_path);
    grid = data.grid;
    return data.values;
}

struct SplitMetrics {
    Metrics vs_truth;
    bool has_truth = false;
    Metrics vs_observed;
};

void print_metric_row(std::ostream& out, const std::string& prefix,
                      const std::string& target, const Metrics& m)
{
    out << prefix << '\t' << target << '\t' << format_double(m.rmse) << '\t'
        << format_double(m.rrmse) << '\n';
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const CommonOpts& common, const SimCase& sc, int eval_points)
{
    const auto data = generate(sc, eval_points);
    fs::create_directories(common.out_dir);
    const auto obs = (fs::path(common.out_dir) / "observations.csv").string();
    const auto truth = (fs::path(common.out_dir) / "truth.csv").string();
    const auto scores = (fs::path(common.out_dir) / "scores.csv").string();
    write_matrix_csv(obs, data.observations, data.obs_grid);
    write_matrix_csv(truth, data.truth, data.eval_grid);
    write_matrix_csv(scores, data.scores, index_grid(2));
    std::cout << "wrote " << obs << " (" << data.observations.rows() << "x"
              << data.observations.cols() << ")\n"
              << "wrote " << truth << " (" << data.truth.rows() << "x"
              << data.truth.cols() << ")\n"
              << "wrote " << scores << " (" << data.scores.rows() << "x2)\n";
    return 0;
}

// ------------------------------------------------------------------ smooth

int cmd_smooth(const CommonOpts& common, const std::string& data_path, bool ucr,
               const BasisOpts& basis_opts, int eval_points)
{
    std::vector<double> obs_grid;
    const auto Y = load_observations(data_path, ucr, obs_grid);
    const auto basis = make_basis(basis_opts.L, basis_opts.degree);
    const auto curves = smooth_curves(Y, obs_grid, basis, basis_opts.ridge,
                                      uniform_grid(eval_points));
    fs::create_directories(common.out_dir);
    const auto coef_path = (fs::path(common.out_dir) / "coefficients.csv").string();
    const auto val_path = (fs::path(common.out_dir) / "smoothed.csv").string();
    write_matrix_csv(coef_path, curves.coeffs, index_grid(basis_opts.L));
    write_matrix_csv(val_path, curves.values, curves.grid);
    std::cout << "wrote " << coef_path << "\nwrote " << val_path << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const CommonOpts& common, const std::string& data_path, bool ucr,
              const std::string& kind, const BasisOpts& basis_opts,
              const NetOpts& net_opts, int eval_points)
{
    std::vector<double> obs_grid;
    const auto Y = load_observations(data_path, ucr, obs_grid);
    const auto basis = make_basis(basis_opts.L, basis_opts.degree);
    const auto curves = smooth_curves(Y, obs_grid, basis, basis_opts.ridge,
                                      uniform_grid(eval_points));

    fs::create_directories(common.out_dir);
    const auto model_path = (fs::path(common.out_dir) / "model.nfpca").string();

    if (kind == "fpca") {
        const auto model = fit_fpca(curves, gram_matrix(basis), net_opts.K);
        save_model(model_path, to_model_file(model, common.seed));
        std::cout << "wrote " << model_path << "\n";
        return 0;
    }

    const auto cfg = make_train_config(basis_opts, net_opts, common.seed);
    const auto log_path = (fs::path(common.out_dir) / "train.log").string();
    std::ofstream log(log_path);
    const auto [params, history] = train(curves, cfg, &log);
    save_model(model_path, to_model_file(params, basis, common.seed));
    std::cout << "wrote " << model_path << "\nwrote " << log_path << "\n"
              << "epochs " << history.epochs_run() << ", best epoch "
              << history.best_epoch << ", best loss "
              << format_double(history.best_loss) << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

SplitMetrics evaluate_one(const ModelFile& mf, const std::string& data_path,
                          bool ucr, const std::string& truth_path, double ridge)
{
    std::vector<double> obs_grid;
    const auto Y = load_observations(data_path, ucr, obs_grid);
    const BSplineBasis basis(mf.basis_count, mf.basis_degree);

    SplitMetrics out;
    Eigen::MatrixXd recon_obs;
    if (mf.kind == "network") {
        const auto params = network_from_model_file(mf);
        const auto curves = smooth_curves(Y, obs_grid, basis, ridge, obs_grid);
        recon_obs = reconstruct_all(params, curves, obs_grid);
        out.vs_observed = rmse_observed(recon_obs, Y);
        if (!truth_path.empty()) {
            const auto truth = read_matrix_csv(truth_path);
            out.vs_truth = rmse(reconstruct_all(params, curves, truth.grid),
                                truth.values);
            out.has_truth = true;
        }
    } else {
        const auto model = fpca_from_model_file(mf);
        const auto curves = smooth_curves(Y, obs_grid, basis, ridge, obs_grid);
        const auto scores = fpca_scores(model, curves);
        recon_obs = fpca_reconstruct(model, scores, obs_grid);
        out.vs_observed = rmse_observed(recon_obs, Y);
        if (!truth_path.empty()) {
            const auto truth = read_matrix_csv(truth_path);
            out.vs_truth =
                rmse(fpca_reconstruct(model, scores, truth.grid), truth.values);
            out.has_truth = true;
        }
    }
    return out;
}

std::string substitute(const std::string& pattern, int rep)
{
    std::string out = pattern;
    const std::string tag = "{rep}";
    const auto pos = out.find(tag);
    if (pos != std::string::npos)
        out.replace(pos, tag.size(), std::to_string(rep));
    return out;
}

int cmd_evaluate(const CommonOpts& common, const std::string& model_path,
                 const std::string& data_path, bool ucr,
                 const std::string& truth_path, int replicates, double ridge)
{
    std::vector<Metrics> truth_rows, obs_rows;
    std::ostringstream table;
    table << "replicate\ttarget\trmse\trrmse\n";
    for (int rep = 0; rep < replicates; ++rep) {
        const auto mf = load_model(substitute(model_path, rep));
        const auto m = evaluate_one(mf, substitute(data_path, rep), ucr,
                                    truth_path.empty() ? ""
                                                       : substitute(truth_path, rep),
                                    ridge);
        obs_rows.push_back(m.vs_observed);
        print_metric_row(table, std::to_string(rep), "observed", m.vs_observed);
        if (m.has_truth) {
            truth_rows.push_back(m.vs_truth);
            print_metric_row(table, std::to_string(rep), "truth", m.vs_truth);
        }
    }

    auto summarize = [&table](const std::string& target,
                              const std::vector<Metrics>& rows) {
        if (rows.empty())
            return;
        double mr = 0.0, mrr = 0.0;
        for (const auto& m : rows) {
            mr += m.rmse;
            mrr += m.rrmse;
        }
        mr /= rows.size();
        mrr /= rows.size();
        double sr = 0.0, srr = 0.0;
        for (const auto& m : rows) {
            sr += (m.rmse - mr) * (m.rmse - mr);
            srr += (m.rrmse - mrr) * (m.rrmse - mrr);
        }
        const double denom = rows.size() > 1 ? rows.size() - 1.0 : 1.0;
        print_metric_row(table, "mean", target, Metrics{mr, mrr});
        print_metric_row(table, "sd", target,
                         Metrics{std::sqrt(sr / denom), std::sqrt(srr / denom)});
    };
    summarize("observed", obs_rows);
    summarize("truth", truth_rows);

    std::cout << table.str();
    if (common.out_dir != ".") {
        fs::create_directories(common.out_dir);
        std::ofstream((fs::path(common.out_dir) / "metrics.tsv").string())
            << table.str();
    }
    return 0;
}

// ------------------------------------------------------------------- sweep

int cmd_sweep(const CommonOpts& common, const SimCase& base_case, int n_test,
              const std::vector<int>& l_grid, const std::vector<int>& j_grid,
              const std::vector<int>& k_grid, int replicates,
              const BasisOpts& basis_opts, const NetOpts& net_opts,
              int eval_points)
{
    std::ostringstream table;
    table << "case\tL\tJ\tK\treplicate\tsplit\tmethod\trmse\trrmse\n";

    auto emit = [&table, &base_case](int L, int J, int K, int rep,
                                     const std::string& split,
                                     const std::string& method, const Metrics& m) {
        table << base_case.case_id << '\t' << L << '\t' << J << '\t' << K << '\t'
              << rep << '\t' << split << '\t' << method << '\t'
              << format_double(m.rmse) << '\t' << format_double(m.rrmse) << '\n';
    };

    for (int L : l_grid)
        for (int J : j_grid)
            for (int K : k_grid)
                for (int rep = 0; rep < replicates; ++rep) {
                    SimCase sc = base_case;
                    sc.seed = Rng::child_seed(common.seed, rep);
                    const auto train_data = generate(sc, eval_points);
                    SimCase sc_test = sc;
                    sc_test.sample_size = n_test;
                    sc_test.seed = Rng::child_seed(common.seed, 100000 + rep);
                    const auto test_data = generate(sc_test, eval_points);

                    const auto basis = make_basis(L, basis_opts.degree);
                    const auto gram = gram_matrix(basis);
                    const auto train_curves =
                        smooth_curves(train_data.observations, train_data.obs_grid,
                                      basis, basis_opts.ridge, train_data.eval_grid);
                    const auto test_curves =
                        smooth_curves(test_data.observations, test_data.obs_grid,
                                      basis, basis_opts.ridge, test_data.eval_grid);

                    BasisOpts b = basis_opts;
                    b.L = L;
                    NetOpts n = net_opts;
                    n.J = J;
                    n.R = J; // J = R convention for sweeps
                    n.K = K;
                    const auto cfg = make_train_config(b, n, sc.seed);
                    const auto [params, history] = train(train_curves, cfg);
                    emit(L, J, K, rep, "train", "nfunnn",
                         rmse(reconstruct_all(params, train_curves,
                                              train_data.eval_grid),
                              train_data.truth));
                    emit(L, J, K, rep, "test", "nfunnn",
                         rmse(reconstruct_all(params, test_curves,
                                              test_data.eval_grid),
                              test_data.truth));

                    const auto fpca = fit_fpca(train_curves, gram, K);
                    emit(L, J, K, rep, "train", "fpca",
                         rmse(fpca_reconstruct(fpca, fpca_scores(fpca, train_curves),
                                               train_data.eval_grid),
                              train_data.truth));
                    emit(L, J, K, rep, "test", "fpca",
                         rmse(fpca_reconstruct(fpca, fpca_scores(fpca, test_curves),
                                               test_data.eval_grid),
                              test_data.truth));
                }

    std::cout << table.str();
    if (common.out_dir != ".") {
        fs::create_directories(common.out_dir);
        std::ofstream((fs::path(common.out_dir) / "sweep.tsv").string())
            << table.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nonlinear functional PCA toolkit"};
    app.require_subcommand(1);

    // simulate
    CommonOpts sim_common;
    SimCase sim_case;
    int sim_eval_points = 101;
    auto* simulate = app.add_subcommand("simulate", "generate simulated curves");
    add_common(simulate, sim_common);
    simulate->add_option("--case", sim_case.case_id, "simulation case 1..5");
    simulate->add_option("--n", sim_case.sample_size, "number of curves");
    simulate->add_option("--T", sim_case.obs_count, "observations per curve");
    simulate->add_option("--noise-sd", sim_case.noise_sd, "measurement noise sd");
    simulate->add_option("--eval-points", sim_eval_points, "truth grid size");

    // smooth
    CommonOpts smooth_common;
    std::string smooth_data;
    bool smooth_ucr = false;
    BasisOpts smooth_basis;
    int smooth_eval_points = 101;
    auto* smooth = app.add_subcommand("smooth", "smooth observations into basis coefficients");
    add_common(smooth, smooth_common);
    smooth->add_option("--data", smooth_data, "observation CSV")->required();
    smooth->add_flag("--ucr", smooth_ucr, "data is UCR label-first format");
    add_basis(smooth, smooth_basis);
    smooth->add_option("--eval-points", smooth_eval_points, "output grid size");

    // train
    CommonOpts train_common;
    std::string train_data, train_kind = "network";
    bool train_ucr = false;
    BasisOpts train_basis;
    NetOpts train_net;
    int train_eval_points = 101;
    auto* train_cmd = app.add_subcommand("train", "train a model");
    add_common(train_cmd, train_common);
    train_cmd->add_option("--data", train_data, "observation CSV")->required();
    train_cmd->add_flag("--ucr", train_ucr, "data is UCR label-first format");
    train_cmd->add_option("--model-kind", train_kind, "network|fpca");
    add_basis(train_cmd, train_basis);
    add_net(train_cmd, train_net);
    train_cmd->add_option("--eval-points", train_eval_points, "training grid size");

    // evaluate
    CommonOpts eval_common;
    std::string eval_model, eval_data, eval_truth;
    bool eval_ucr = false;
    int eval_replicates = 1;
    double eval_ridge = 1e-9;
    auto* evaluate = app.add_subcommand("evaluate", "score a model on a dataset");
    add_common(evaluate, eval_common);
    evaluate->add_option("--model", eval_model, "model file, may contain {rep}")->required();
    evaluate->add_option("--data", eval_data, "observation CSV, may contain {rep}")->required();
    evaluate->add_flag("--ucr", eval_ucr, "data is UCR label-first format");
    evaluate->add_option("--truth", eval_truth, "truth CSV, may contain {rep}");
    evaluate->add_option("--replicates", eval_replicates, "replicate count");
    evaluate->add_option("--ridge", eval_ridge, "smoothing ridge");

    // sweep
    CommonOpts sweep_common;
    SimCase sweep_case;
    int sweep_n_test = 1000;
    std::vector<int> sweep_l{10}, sweep_j{20}, sweep_k{2};
    int sweep_replicates = 5;
    BasisOpts sweep_basis;
    NetOpts sweep_net;
    int sweep_eval_points = 101;
    auto* sweep = app.add_subcommand("sweep", "tuning-parameter study over (L, J, K)");
    add_common(sweep, sweep_common);
    sweep->add_option("--case", sweep_case.case_id, "simulation case 1..5");
    sweep->add_option("--n", sweep_case.sample_size, "training curves");
    sweep->add_option("--n-test", sweep_n_test, "test curves");
    sweep->add_option("--T", sweep_case.obs_count, "observations per curve");
    sweep->add_option("--noise-sd", sweep_case.noise_sd, "measurement noise sd");
    sweep->add_option("--L-grid", sweep_l, "basis counts");
    sweep->add_option("--J-grid", sweep_j, "encoder unit counts (R tied to J)");
    sweep->add_option("--K-grid", sweep_k, "bottleneck sizes");
    sweep->add_option("--replicates", sweep_replicates, "Monte Carlo replicates");
    add_basis(sweep, sweep_basis);
    add_net(sweep, sweep_net);
    sweep->add_option("--eval-points", sweep_eval_points, "evaluation grid size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(sim_common, [&] {
                SimCase sc = sim_case;
                sc.seed = sim_common.seed;
                sc.validate();
                return sc;
            }(), sim_eval_points);
        if (smooth->parsed())
            return cmd_smooth(smooth_common, smooth_data, smooth_ucr, smooth_basis,
                              smooth_eval_points);
        if (train_cmd->parsed())
            return cmd_train(train_common, train_data, train_ucr, train_kind,
                             train_basis, train_net, train_eval_points);
        if (evaluate->parsed())
            return cmd_evaluate(eval_common, eval_model, eval_data, eval_ucr,
                                eval_truth, eval_replicates, eval_ridge);
        if (sweep->parsed())
            return cmd_sweep(sweep_common, [&] {
                SimCase sc = sweep_case;
                sc.validate();
                return sc;
            }(), sweep_n_test, sweep_l, sweep_j, sweep_k, sweep_replicates,
                             sweep_basis, sweep_net, sweep_eval_points);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
