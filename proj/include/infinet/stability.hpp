#pragma once

#include <vector>

#include "infinet/gram.hpp"
#include "infinet/klr.hpp"

namespace infinet {

/// Outcome of the replace-one stability experiment: retrain with single
/// examples replaced by fresh draws and compare
/// the observed loss movements against the 1/(m*lambda) scale.
struct StabilityReport {
    std::vector<double> train_loss_delta;  // |L_S(v^S) - L_{S^i}(v^{S^i})| per replacement
    std::vector<double> test_loss_delta;   // |L_T(v^S) - L_T(v^{S^i})| per replacement
    double max_train_delta = 0.0;
    double max_test_delta = 0.0;
    double theoretical_bound = 0.0;  // 1/(m*lambda)
    double train_loss = 0.0;         // L_S(v^S), mean log-loss, no regularizer
    double test_loss = 0.0;          // L_T(v^S)
    double test_loss_stderr = 0.0;
    double generalization_gap = 0.0;  // |train_loss - test_loss|
    double gram_rescale_factor = 0.0;
    long m = 0;
    double lambda = 0.0;

    bool within_bounds() const {
        const double slack = theoretical_bound + 3.0 * test_loss_stderr;
        return max_train_delta <= slack && max_test_delta <= slack &&
               generalization_gap <= slack;
    }
};

/// Replace-one retraining probe. The Gram is rescaled to unit diagonal
/// (factor recorded) so the feature norms match the |psi_x| <= 1 premise of
/// the stability bound; each sampled index is replaced by a fresh example
/// from `pool` and the model retrained from scratch.
inline StabilityReport stability_probe(const Dataset& train, const Dataset& pool,
                                       const Dataset& test, const KernelSpec& spec,
                                       const TrainConfig& config, int n_replacements,
                                       std::uint64_t seed) {
    if (n_replacements < 1) throw ConfigError("stability_probe: need at least one replacement");
    if (n_replacements > train.size())
        throw ConfigError("stability_probe: more replacements than training examples");
    if (pool.size() < n_replacements)
        throw ConfigError("stability_probe: replacement pool too small");

    GramMatrix g = gram(train, spec);
    const double max_diag = g.values.diagonal().maxCoeff();
    if (max_diag <= 0.0) throw NumericError("stability_probe: nonpositive Gram diagonal");
    const double factor = 1.0 / max_diag;
    g.values *= factor;

    Mat test_cross = cross_gram(test, train, spec) * factor;

    StabilityReport report;
    report.gram_rescale_factor = factor;
    report.m = train.size();
    report.lambda = config.lambda;
    report.theoretical_bound = 1.0 / (static_cast<double>(train.size()) * config.lambda);

    TrainResult base = train_klr(g, train.labels, config, train.num_classes);
    report.train_loss = mean_log_loss(base.model, g.values, train.labels);
    report.test_loss =
        mean_log_loss(base.model, test_cross, test.labels, &report.test_loss_stderr);
    report.generalization_gap = std::abs(report.train_loss - report.test_loss);

    auto replaced_indices = sample_indices(train.size(), n_replacements, seed);
    for (int r = 0; r < n_replacements; ++r) {
        const long idx = replaced_indices[static_cast<std::size_t>(r)];

        Dataset train_r = train;
        train_r.instances.row(idx) = pool.instances.row(r);
        train_r.labels[static_cast<std::size_t>(idx)] = pool.labels[static_cast<std::size_t>(r)];

        GramMatrix g_r = gram(train_r, spec);
        g_r.values *= factor;
        Mat test_cross_r = cross_gram(test, train_r, spec) * factor;

        TrainResult repl = train_klr(g_r, train_r.labels, config, train_r.num_classes);
        const double train_loss_r = mean_log_loss(repl.model, g_r.values, train_r.labels);
        const double test_loss_r = mean_log_loss(repl.model, test_cross_r, test.labels);

        report.train_loss_delta.push_back(std::abs(report.train_loss - train_loss_r));
        report.test_loss_delta.push_back(std::abs(report.test_loss - test_loss_r));
    }
    for (double d : report.train_loss_delta)
        report.max_train_delta = std::max(report.max_train_delta, d);
    for (double d : report.test_loss_delta)
        report.max_test_delta = std::max(report.max_test_delta, d);
    return report;
}

}  // namespace infinet
