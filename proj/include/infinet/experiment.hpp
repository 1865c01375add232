#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "infinet/blobs.hpp"
#include "infinet/gram.hpp"
#include "infinet/gram_io.hpp"
#include "infinet/io_csv.hpp"
#include "infinet/io_idx.hpp"
#include "infinet/klr.hpp"
#include "infinet/stability.hpp"

namespace infinet {

using nlohmann::json;

inline constexpr const char* kMetricsSchema = "infinet/v1";

/// Flat key=value experiment configuration. '#' starts a comment, blank
/// lines are skipped, keys outside the documented set are rejected so a
/// typo cannot silently fall back to a default mid-sweep.
class ExperimentConfig {
public:
    ExperimentConfig() = default;

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path);
        std::ostringstream text;
        text << in.rdbuf();
        return from_string(text.str());
    }

    static ExperimentConfig from_string(const std::string& text) {
        ExperimentConfig config;
        std::istringstream in(text);
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
                while (!s.empty() && is_space(s.front())) s.erase(s.begin());
                while (!s.empty() && is_space(s.back())) s.pop_back();
                return s;
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!known_keys().count(key))
                throw ConfigError("unknown config key '" + key + "'");
            config.values_[key] = value;
        }
        return config;
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: " + it->second);
        }
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stol(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an integer: " + it->second);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an integer: " + it->second);
        }
    }

    /// Canonical text form; part of every metrics payload so reruns can be
    /// compared byte for byte.
    json to_json() const {
        json out = json::object();
        for (const auto& [key, value] : values_) out[key] = value;
        return out;
    }

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "seed", "out",
            "data.kind", "data.normalization",
            "data.blobs.n", "data.blobs.d", "data.blobs.k", "data.blobs.spread",
            "data.blobs.seed",
            "data.path", "data.label_column", "data.header",
            "data.images", "data.labels", "data.test_images", "data.test_labels",
            "data.train_size", "data.test_size", "data.split_seed",
            "kernel.activation", "kernel.depth", "kernel.estimator", "kernel.covariance",
            "kernel.alpha", "kernel.const_value", "kernel.scale", "kernel.mc_samples",
            "kernel.shards",
            "kernel.patch_size", "kernel.patch_stride", "kernel.image_height",
            "kernel.image_width", "kernel.aggregation",
            "train.lambda", "train.max_epochs", "train.tolerance", "train.step", "train.eta",
            "convergence.samples", "convergence.replicates", "convergence.dim",
            "stability.replacements", "stability.pool_size",
            "eval.model"};
        return keys;
    }

private:
    std::map<std::string, std::string> values_;
};

inline KernelSpec kernel_spec_from_config(const ExperimentConfig& config) {
    KernelSpec spec;
    spec.activation = activation_from_name(config.get_string("kernel.activation", "relu"));
    spec.depth = static_cast<int>(config.get_long("kernel.depth", 1));
    const std::string est = config.get_string("kernel.estimator", "analytic");
    if (est == "analytic") spec.estimator = KernelSpec::Estimator::Analytic;
    else if (est == "direct") spec.estimator = KernelSpec::Estimator::DirectMC;
    else if (est == "bochner") spec.estimator = KernelSpec::Estimator::BochnerMC;
    else throw ConfigError("kernel.estimator: expected analytic|direct|bochner, got " + est);

    if (spec.depth == 2 || config.has("kernel.covariance")) {
        const std::string cov = config.get_string("kernel.covariance", "se");
        if (cov == "se")
            spec.covariance = GpCovariance::squared_exponential(config.get_double("kernel.alpha", 1.0));
        else if (cov == "ou")
            spec.covariance = GpCovariance::ornstein_uhlenbeck();
        else if (cov == "const")
            spec.covariance = GpCovariance::constant(config.get_double("kernel.const_value", 1.0));
        else
            throw ConfigError("kernel.covariance: expected se|ou|const, got " + cov);
    }

    const std::string scale = config.get_string("kernel.scale", "canonical");
    if (scale == "canonical") spec.scale = ScaleConvention::Canonical;
    else if (scale == "unnormalized") spec.scale = ScaleConvention::Unnormalized;
    else throw ConfigError("kernel.scale: expected canonical|unnormalized, got " + scale);

    spec.mc_samples = config.get_u64("kernel.mc_samples", 100000);
    spec.mc_shards = static_cast<int>(config.get_long("kernel.shards", kDefaultShards));
    spec.seed = config.get_u64("seed", 0);

    if (config.has("kernel.patch_size")) {
        const long patch = config.get_long("kernel.patch_size", 0);
        const long stride = config.get_long("kernel.patch_stride", 1);
        const auto agg = config.get_string("kernel.aggregation", "sum") == "mean"
                             ? PatchScheme::Aggregation::Mean
                             : PatchScheme::Aggregation::Sum;
        if (config.has("kernel.image_height")) {
            spec.patches = PatchScheme::image(config.get_long("kernel.image_height", 0),
                                              config.get_long("kernel.image_width", 0), patch,
                                              stride, agg);
        } else {
            throw ConfigError("kernel.patch_size needs kernel.image_height/width "
                              "(flat inputs take patch kernels via the library API)");
        }
    }
    spec.validate();
    return spec;
}

inline TrainConfig train_config_from_config(const ExperimentConfig& config) {
    TrainConfig tc;
    tc.lambda = config.get_double("train.lambda", 0.05);
    tc.max_epochs = static_cast<int>(config.get_long("train.max_epochs", 500));
    tc.dual_tolerance = config.get_double("train.tolerance", 1e-6);
    const std::string step = config.get_string("train.step", "backtracking");
    if (step == "backtracking") tc.step_rule = TrainConfig::StepRule::Backtracking;
    else if (step == "fixed") tc.step_rule = TrainConfig::StepRule::Fixed;
    else throw ConfigError("train.step: expected backtracking|fixed, got " + step);
    tc.eta = config.get_double("train.eta", 1.0);
    tc.seed = config.get_u64("seed", 0);
    tc.validate();
    return tc;
}

struct DataBundle {
    Dataset train;
    Dataset test;
    bool has_test = false;
};

/// Materializes the experiment's data: synthetic blobs, a CSV table split in
/// two, or an IDX train/test file pair subsampled to the requested sizes.
inline DataBundle load_data(const ExperimentConfig& config) {
    const std::string kind = config.get_string("data.kind", "blobs");
    const std::uint64_t seed = config.get_u64("seed", 0);
    const std::uint64_t split_seed = config.get_u64("data.split_seed", derive_seed(seed, 0x5b1d));
    const auto norm = normalization_from_name(config.get_string("data.normalization", "unit"));
    const long train_size = config.get_long("data.train_size", 0);
    const long test_size = config.get_long("data.test_size", 0);

    DataBundle bundle;
    if (kind == "blobs") {
        const long n = config.get_long("data.blobs.n", 100);
        const long d = config.get_long("data.blobs.d", 8);
        const int k = static_cast<int>(config.get_long("data.blobs.k", 3));
        const double spread = config.get_double("data.blobs.spread", 0.3);
        const std::uint64_t blob_seed = config.get_u64("data.blobs.seed", derive_seed(seed, 0xb10b));
        const long total = n + (test_size > 0 ? test_size : 0);
        Dataset all = make_blobs(total, d, k, spread, blob_seed, norm);
        if (test_size > 0) {
            auto [train, test] = split_train_test(all, n, test_size, split_seed);
            bundle.train = std::move(train);
            bundle.test = std::move(test);
            bundle.has_test = true;
        } else {
            bundle.train = std::move(all);
        }
        return bundle;
    }
    if (kind == "csv") {
        Dataset all = load_csv(config.require_string("data.path"),
                               config.get_long("data.label_column", -1),
                               config.get_long("data.header", 0) != 0);
        if (norm == Normalization::UnitNorm) all.unit_normalize();
        if (test_size > 0) {
            const long n_train = train_size > 0 ? train_size : all.size() - test_size;
            auto [train, test] = split_train_test(all, n_train, test_size, split_seed);
            bundle.train = std::move(train);
            bundle.test = std::move(test);
            bundle.has_test = true;
        } else if (train_size > 0) {
            bundle.train = all.subset(sample_indices(all.size(), train_size, split_seed));
        } else {
            bundle.train = std::move(all);
        }
        return bundle;
    }
    if (kind == "idx") {
        Dataset train_all = load_idx(config.require_string("data.images"),
                                     config.require_string("data.labels"), norm);
        bundle.train =
            train_size > 0 && train_size < train_all.size()
                ? train_all.subset(sample_indices(train_all.size(), train_size, split_seed))
                : std::move(train_all);
        if (config.has("data.test_images")) {
            Dataset test_all = load_idx(config.require_string("data.test_images"),
                                        config.require_string("data.test_labels"), norm);
            bundle.test =
                test_size > 0 && test_size < test_all.size()
                    ? test_all.subset(
                          sample_indices(test_all.size(), test_size, derive_seed(split_seed, 1)))
                    : std::move(test_all);
            bundle.has_test = true;
        }
        return bundle;
    }
    throw ConfigError("data.kind: expected blobs|csv|idx, got " + kind);
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!out) throw DataError("write failed for " + path);
}

inline std::string out_path(const ExperimentConfig& config, const std::string& name) {
    const std::string dir = config.get_string("out", ".");
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace detail

/// kernel subcommand: one kernel value for an explicit input pair.
inline json cmd_kernel(const ExperimentConfig& config, const Vec& xi, const Vec& xj) {
    KernelSpec spec = kernel_spec_from_config(config);
    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "kernel";
    metrics["config"] = config.to_json();
    metrics["fingerprint"] = spec.fingerprint();
    metrics["value"] = kernel_value(xi, xj, spec, 0);
    if (spec.depth == 2 && spec.estimator == KernelSpec::Estimator::DirectMC) {
        auto est = sigma_pair_mc(xi, xj, spec.activation, *spec.covariance, spec.mc_samples,
                                     derive_seed(spec.seed, 0), spec.mc_shards);
        metrics["sigma_stderr"] = {est.stderr11, est.stderr12, est.stderr22};
        metrics["sigma"] = {est.sigma.s11, est.sigma.s12, est.sigma.s22};
        metrics["sigma_clamped"] = est.sigma.clamped;
    }
    if (spec.depth == 2 && spec.estimator == KernelSpec::Estimator::BochnerMC) {
        auto sampler = BochnerSampler::for_covariance(*spec.covariance, xi.size());
        auto est = two_layer_bochner(xi, xj, spec.activation, sampler, spec.mc_samples,
                                     derive_seed(spec.seed, 0), spec.mc_shards);
        metrics["sigma_stderr"] = {est.sigma.stderr11, est.sigma.stderr12, est.sigma.stderr22};
        metrics["sigma"] = {est.sigma.sigma.s11, est.sigma.sigma.s12, est.sigma.sigma.s22};
        metrics["sigma_clamped"] = est.sigma.sigma.clamped;
    }
    if (spec.depth == 1 && spec.estimator == KernelSpec::Estimator::DirectMC) {
        auto est = mc_oracle_pairwise(xi, xj, spec.activation, spec.mc_samples,
                                      derive_seed(spec.seed, 0), spec.mc_shards);
        metrics["stderr"] = est.stderr_;
    }
    return metrics;
}

/// gram subcommand: builds the Gram over the training data, persists it as
/// IKGRAM01, reports size, extremes, and the minimum eigenvalue.
inline json cmd_gram(const ExperimentConfig& config) {
    KernelSpec spec = kernel_spec_from_config(config);
    DataBundle data = load_data(config);
    GramMatrix g = gram(data.train, spec);

    const std::string gram_path = detail::out_path(config, "gram.ikgram");
    save_gram(gram_path, g);

    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "gram";
    metrics["config"] = config.to_json();
    metrics["n"] = g.size();
    metrics["fingerprint"] = g.fingerprint;
    metrics["file"] = "gram.ikgram";
    metrics["trace"] = g.values.trace();
    metrics["min_eigenvalue"] = min_eigenvalue(g.values);
    metrics["max_entry"] = g.values.maxCoeff();
    metrics["min_entry"] = g.values.minCoeff();
    detail::write_text_file(detail::out_path(config, "gram.json"), metrics.dump(2) + "\n");
    return metrics;
}

namespace detail {

inline json train_eval_metrics(const Model& model, const GramMatrix& train_gram,
                               const std::vector<int>& train_labels, const Mat* test_cross,
                               const std::vector<int>* test_labels) {
    json metrics;
    auto train_pred = predict(model, train_gram.values, train_gram.fingerprint);
    metrics["train_error"] = error_rate(train_pred.labels, train_labels);
    metrics["train_log_loss"] = mean_log_loss(model, train_gram.values, train_labels);
    if (test_cross && test_labels) {
        auto test_pred = predict(model, *test_cross, model.gram_fingerprint);
        double stderr_ = 0.0;
        metrics["test_error"] = error_rate(test_pred.labels, *test_labels);
        metrics["test_log_loss"] = mean_log_loss(model, *test_cross, *test_labels, &stderr_);
        metrics["test_log_loss_stderr"] = stderr_;
    }
    return metrics;
}

}  // namespace detail

/// train subcommand: Gram + KLR training + persisted model + metrics.
inline json cmd_train(const ExperimentConfig& config) {
    KernelSpec spec = kernel_spec_from_config(config);
    TrainConfig tc = train_config_from_config(config);
    DataBundle data = load_data(config);

    GramMatrix g = gram(data.train, spec);
    TrainResult result = train_klr(g, data.train.labels, tc, data.train.num_classes);
    result.model.train_data_hash = dataset_content_hash(data.train);

    const std::string model_path = detail::out_path(config, "model.ikmodel");
    save_model(model_path, result.model);

    Mat test_cross;
    if (data.has_test) test_cross = cross_gram(data.test, data.train, spec);

    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "train";
    metrics["config"] = config.to_json();
    metrics["fingerprint"] = g.fingerprint;
    metrics["model_file"] = "model.ikmodel";
    metrics["m"] = data.train.size();
    metrics["num_classes"] = data.train.num_classes;
    metrics["epochs"] = result.state.epoch;
    metrics["converged"] = result.state.converged;
    metrics["duality_gap"] = result.state.duality_gap;
    metrics["dual_objective"] = result.state.dual_objective;
    metrics["primal_objective"] = result.state.primal_objective;
    metrics["support_size"] = result.trace.empty() ? 0 : result.trace.back().support_size;
    metrics.update(detail::train_eval_metrics(result.model, g, data.train.labels,
                                              data.has_test ? &test_cross : nullptr,
                                              data.has_test ? &data.test.labels : nullptr));
    detail::write_text_file(detail::out_path(config, "train.json"), metrics.dump(2) + "\n");
    return metrics;
}

/// eval subcommand: loads a persisted model and scores the test split.
inline json cmd_eval(const ExperimentConfig& config) {
    KernelSpec spec = kernel_spec_from_config(config);
    DataBundle data = load_data(config);
    if (!data.has_test) throw ConfigError("eval: config provides no test split");

    const std::string model_path = config.has("eval.model")
                                       ? config.require_string("eval.model")
                                       : detail::out_path(config, "model.ikmodel");
    Model model = load_model(model_path);
    if (model.gram_fingerprint != spec.fingerprint())
        throw ConfigError("eval: model fingerprint " + model.gram_fingerprint +
                          " does not match kernel spec " + spec.fingerprint());
    if (model.train_size() != data.train.size())
        throw DataError("eval: model trained on " + std::to_string(model.train_size()) +
                        " examples but config re-derives " + std::to_string(data.train.size()));
    if (!model.train_data_hash.empty() &&
        model.train_data_hash != dataset_content_hash(data.train))
        throw DataError("eval: config re-derives a different training sample than the model "
                        "was fit on (training-data hash mismatch)");

    Mat test_cross = cross_gram(data.test, data.train, spec);
    auto pred = predict(model, test_cross, model.gram_fingerprint);

    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "eval";
    metrics["config"] = config.to_json();
    metrics["fingerprint"] = model.gram_fingerprint;
    metrics["n_test"] = data.test.size();
    double stderr_ = 0.0;
    metrics["test_error"] = error_rate(pred.labels, data.test.labels);
    metrics["test_log_loss"] = mean_log_loss(model, test_cross, data.test.labels, &stderr_);
    metrics["test_log_loss_stderr"] = stderr_;
    detail::write_text_file(detail::out_path(config, "eval.json"), metrics.dump(2) + "\n");
    return metrics;
}

/// convergence subcommand: |MC - analytic| against sample count for the
/// direct-MC and Bochner paths on a seeded unit pair, with fitted log-log
/// slopes (the Monte-Carlo rate should sit near -1/2).
inline json cmd_convergence(const ExperimentConfig& config) {
    const std::uint64_t seed = config.get_u64("seed", 0);
    const long dim = config.get_long("convergence.dim", 3);
    const int replicates = static_cast<int>(config.get_long("convergence.replicates", 16));
    const double alpha = config.get_double("kernel.alpha", 1.0);
    const auto activation = activation_from_name(config.get_string("kernel.activation", "relu"));
    const std::string cov_name = config.get_string("kernel.covariance", "se");
    if (cov_name != "se" && cov_name != "const")
        throw ConfigError("convergence: analytic reference exists for se|const only");

    std::vector<std::size_t> sample_counts;
    {
        std::istringstream list(
            config.get_string("convergence.samples", "1000,10000,100000,1000000"));
        std::string token;
        while (std::getline(list, token, ',')) sample_counts.push_back(std::stoull(token));
        if (sample_counts.size() < 2)
            throw ConfigError("convergence.samples: need at least two sample counts");
    }

    Rng rng(derive_seed(seed, 0xc0a7));
    Vec a(dim), b(dim);
    rng.fill_normal(a);
    a.normalize();
    rng.fill_normal(b);
    b.normalize();

    const double const_value = config.get_double("kernel.const_value", 1.0);
    const auto cov = cov_name == "se" ? GpCovariance::squared_exponential(alpha)
                                      : GpCovariance::constant(const_value);
    const auto sampler = BochnerSampler::for_covariance(cov, dim);
    const double truth = cov_name == "se"
                             ? two_layer_analytic_se(a, b, activation, alpha)
                             : two_layer_constant(a, b, activation, const_value);

    std::ostringstream csv;
    csv << "path,n_samples,mean_abs_error,mean_stderr\n";
    json rows = json::array();
    std::map<std::string, std::vector<std::pair<double, double>>> loglog;
    for (const char* path : {"direct", "bochner"}) {
        for (std::size_t n : sample_counts) {
            double abs_err_sum = 0.0, stderr_sum = 0.0;
            for (int rep = 0; rep < replicates; ++rep) {
                const std::uint64_t rep_seed =
                    derive_seed(seed, fnv1a64(std::string(path)) + 31 * rep + n);
                double value = 0.0, se = 0.0;
                if (std::string(path) == "direct") {
                    auto est = sigma_pair_mc(a, b, activation, cov, n, rep_seed);
                    value = bivariate_expectation(est.sigma, activation);
                    se = est.stderr11 + est.stderr12 + est.stderr22;
                } else {
                    auto est = two_layer_bochner(a, b, activation, sampler, n, rep_seed);
                    value = est.value;
                    se = est.sigma.stderr11 + est.sigma.stderr12 + est.sigma.stderr22;
                }
                abs_err_sum += std::abs(value - truth);
                stderr_sum += se;
            }
            const double mean_err = abs_err_sum / replicates;
            const double mean_se = stderr_sum / replicates;
            csv << path << ',' << n << ',' << mean_err << ',' << mean_se << '\n';
            rows.push_back({{"path", path},
                            {"n_samples", n},
                            {"mean_abs_error", mean_err},
                            {"mean_stderr", mean_se}});
            loglog[path].push_back({std::log10(static_cast<double>(n)), std::log10(mean_err)});
        }
    }

    json slopes;
    for (const auto& [path, points] : loglog) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(points.size());
        for (auto [x, y] : points) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        slopes[path] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    detail::write_text_file(detail::out_path(config, "convergence.csv"), csv.str());
    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "convergence";
    metrics["config"] = config.to_json();
    metrics["analytic_value"] = truth;
    metrics["rows"] = rows;
    metrics["fitted_slope"] = slopes;
    detail::write_text_file(detail::out_path(config, "convergence.json"), metrics.dump(2) + "\n");
    return metrics;
}

/// stability subcommand: replace-one retraining probe on blob data.
inline json cmd_stability(const ExperimentConfig& config) {
    KernelSpec spec = kernel_spec_from_config(config);
    TrainConfig tc = train_config_from_config(config);
    const std::uint64_t seed = config.get_u64("seed", 0);
    const int replacements = static_cast<int>(config.get_long("stability.replacements", 10));
    const long pool_size = config.get_long("stability.pool_size", replacements);

    if (config.get_string("data.kind", "blobs") != "blobs")
        throw ConfigError("stability: only blob data carries a generating distribution to "
                          "draw replacements from");
    const long n = config.get_long("data.blobs.n", 200);
    const long d = config.get_long("data.blobs.d", 8);
    const int k = static_cast<int>(config.get_long("data.blobs.k", 3));
    const double spread = config.get_double("data.blobs.spread", 0.3);
    const auto norm = normalization_from_name(config.get_string("data.normalization", "unit"));
    const std::uint64_t blob_seed = config.get_u64("data.blobs.seed", derive_seed(seed, 0xb10b));
    const long test_size = config.get_long("data.test_size", 500);

    // one generation so train, pool, and test share the blob centers
    Dataset all = make_blobs(n + pool_size + test_size, d, k, spread, blob_seed, norm);
    std::vector<long> idx(static_cast<std::size_t>(all.size()));
    std::iota(idx.begin(), idx.end(), 0L);
    Dataset train = all.subset({idx.begin(), idx.begin() + n});
    Dataset pool = all.subset({idx.begin() + n, idx.begin() + n + pool_size});
    Dataset test = all.subset({idx.begin() + n + pool_size, idx.end()});

    StabilityReport report =
        stability_probe(train, pool, test, spec, tc, replacements, derive_seed(seed, 0x57ab));

    json metrics;
    metrics["schema"] = kMetricsSchema;
    metrics["command"] = "stability";
    metrics["config"] = config.to_json();
    metrics["m"] = report.m;
    metrics["lambda"] = report.lambda;
    metrics["theoretical_bound"] = report.theoretical_bound;
    metrics["gram_rescale_factor"] = report.gram_rescale_factor;
    metrics["train_loss"] = report.train_loss;
    metrics["test_loss"] = report.test_loss;
    metrics["test_loss_stderr"] = report.test_loss_stderr;
    metrics["generalization_gap"] = report.generalization_gap;
    metrics["max_train_delta"] = report.max_train_delta;
    metrics["max_test_delta"] = report.max_test_delta;
    metrics["train_loss_delta"] = report.train_loss_delta;
    metrics["test_loss_delta"] = report.test_loss_delta;
    metrics["within_bounds"] = report.within_bounds();
    detail::write_text_file(detail::out_path(config, "stability.json"), metrics.dump(2) + "\n");
    return metrics;
}

}  // namespace infinet
