// Experiment runner for the infinite-network kernel library.
//
// Subcommands: kernel, gram, train, eval, convergence, stability. Every run
// is driven by a flat key=value config; all randomness flows from config
// seeds, so reruns produce byte-identical metric payloads (timing is
// reported separately on stderr). Exit codes: 0 ok, 2 config error, 3 data
// error, 4 numeric error.

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "infinet/experiment.hpp"

namespace {

infinet::Vec parse_vector(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw infinet::ConfigError("not a number in vector: '" + token + "'");
        }
    }
    if (values.empty()) throw infinet::ConfigError("empty vector");
    infinet::Vec v(static_cast<long>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<long>(i)] = values[i];
    return v;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed;
};

infinet::ExperimentConfig load_config(const CommonOpts& opts) {
    auto config = opts.config_path.empty() ? infinet::ExperimentConfig()
                                           : infinet::ExperimentConfig::from_file(opts.config_path);
    if (!opts.seed.empty()) config.set("seed", opts.seed);
    if (!opts.out_dir.empty()) config.set("out", opts.out_dir);
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value experiment config file");
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infinite-network kernels: evaluation, Gram building, training, "
                 "MC convergence and stability experiments"};
    app.require_subcommand(1);

    CommonOpts kernel_opts, gram_opts, train_opts, eval_opts, conv_opts, stab_opts;
    std::string xi_text, xj_text, pair_file, pair_rows;

    auto* kernel_cmd = app.add_subcommand("kernel", "evaluate one kernel value");
    add_common(kernel_cmd, kernel_opts);
    kernel_cmd->add_option("--xi", xi_text, "first input, comma separated");
    kernel_cmd->add_option("--xj", xj_text, "second input, comma separated");
    kernel_cmd->add_option("--file", pair_file, "CSV file to take the input pair from");
    kernel_cmd->add_option("--rows", pair_rows, "two row indices into --file, e.g. 3,7");

    auto* gram_cmd = app.add_subcommand("gram", "build and persist a Gram matrix");
    add_common(gram_cmd, gram_opts);
    auto* train_cmd = app.add_subcommand("train", "train the kernel logistic model");
    add_common(train_cmd, train_opts);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a persisted model");
    add_common(eval_cmd, eval_opts);
    auto* conv_cmd = app.add_subcommand("convergence", "MC error vs sample count study");
    add_common(conv_cmd, conv_opts);
    auto* stab_cmd = app.add_subcommand("stability", "replace-one stability probe");
    add_common(stab_cmd, stab_opts);

    CLI11_PARSE(app, argc, argv);

    const auto started = std::chrono::steady_clock::now();
    try {
        infinet::json metrics;
        if (kernel_cmd->parsed()) {
            auto config = load_config(kernel_opts);
            infinet::Vec xi, xj;
            if (!pair_file.empty()) {
                if (pair_rows.empty())
                    throw infinet::ConfigError("kernel --file needs --rows i,j");
                const auto rows = parse_vector(pair_rows);
                if (rows.size() != 2) throw infinet::ConfigError("--rows wants two indices");
                auto data = infinet::load_csv(pair_file);
                const long i = static_cast<long>(rows[0]);
                const long j = static_cast<long>(rows[1]);
                if (i < 0 || j < 0 || i >= data.size() || j >= data.size())
                    throw infinet::DataError("--rows out of range for " + pair_file);
                xi = data.instances.row(i);
                xj = data.instances.row(j);
            } else {
                if (xi_text.empty() || xj_text.empty())
                    throw infinet::ConfigError("kernel needs --xi and --xj (or --file/--rows)");
                xi = parse_vector(xi_text);
                xj = parse_vector(xj_text);
            }
            metrics = infinet::cmd_kernel(config, xi, xj);
        } else if (gram_cmd->parsed()) {
            metrics = infinet::cmd_gram(load_config(gram_opts));
        } else if (train_cmd->parsed()) {
            metrics = infinet::cmd_train(load_config(train_opts));
        } else if (eval_cmd->parsed()) {
            metrics = infinet::cmd_eval(load_config(eval_opts));
        } else if (conv_cmd->parsed()) {
            metrics = infinet::cmd_convergence(load_config(conv_opts));
        } else if (stab_cmd->parsed()) {
            metrics = infinet::cmd_stability(load_config(stab_opts));
        }
        std::cout << metrics.dump(2) << std::endl;
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        std::cerr << "elapsed_ms=" << elapsed << std::endl;
        return 0;
    } catch (const infinet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const infinet::DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return 3;
    } catch (const infinet::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << std::endl;
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
