#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "infinet/gram.hpp"
#include "infinet/softmax.hpp"

namespace infinet {

// Kernel multiclass logistic regression. The primal is
//   min_v (1/m) sum_i -log p_v(y_i|x_i) + (lambda/2) sum_k |v_k|^2,
// scores through the Gram only. The dual variables are per-example simplex
// rows alpha_i, linked to the primal by
//   v_k(alpha) = (1/(lambda m)) sum_i (1[y_i=k] - alpha_ik) psi_{x_i},
// and the (negated) dual objective minimized here is
//   J(alpha) = (1/m) sum alpha log alpha + (lambda/2) sum_k |v_k(alpha)|^2,
// so duality_gap = primal + J >= 0 with equality at the optimum.
// The solver cycles the rows in fixed order applying multiplicative
// (exponentiated-gradient) updates with optional backtracking on J.

struct TrainConfig {
    enum class StepRule { Backtracking, Fixed };

    double lambda = 1.0;
    int max_epochs = 200;
    double dual_tolerance = 1e-6;
    StepRule step_rule = StepRule::Backtracking;
    double eta = 1.0;   // initial (Backtracking) or constant (Fixed) step
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lambda > 0.0)) throw ConfigError("TrainConfig: lambda must be > 0");
        if (!(dual_tolerance > 0.0)) throw ConfigError("TrainConfig: dual_tolerance must be > 0");
        if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
        if (!(eta > 0.0)) throw ConfigError("TrainConfig: eta must be > 0");
    }
};

struct DualState {
    Mat alpha;                // m x K, rows on the probability simplex
    int epoch = 0;
    double dual_objective = 0.0;    // -J(alpha)
    double primal_objective = 0.0;  // F(v(alpha))
    double duality_gap = 0.0;
    bool converged = false;
};

struct EpochStats {
    int epoch = 0;
    double dual_objective = 0.0;    // J(alpha); nonincreasing under backtracking
    double primal_objective = 0.0;  // F(v(alpha))
    double duality_gap = 0.0;
    long support_size = 0;  // rows whose alpha moved off the uniform start
};

/// Dual-coefficient classifier: v_k = sum_i beta(i,k) psi_{x_i}. Prediction
/// needs only kernel rows against the training points; the fingerprint ties
/// the coefficients to the Gram that trained them and train_data_hash (set by
/// callers that see the dataset) to the training sample itself.
struct Model {
    Mat beta;  // m x K
    std::string gram_fingerprint;
    std::string train_data_hash;
    int num_classes = 0;

    long train_size() const { return beta.rows(); }
};

struct TrainResult {
    Model model;
    DualState state;
    std::vector<EpochStats> trace;
};

namespace detail {

inline double entropy_term(const Mat& alpha) {
    double s = 0.0;
    for (long i = 0; i < alpha.rows(); ++i)
        for (long k = 0; k < alpha.cols(); ++k) {
            const double a = alpha(i, k);
            if (a > 0.0) s += a * std::log(a);
        }
    return s;
}

}  // namespace detail

/// `num_classes` = 0 infers K from the labels; pass it explicitly when a
/// class may be absent from this particular sample.
inline TrainResult train_klr(const GramMatrix& gram, const std::vector<int>& labels,
                             const TrainConfig& config, int num_classes = 0) {
    config.validate();
    const long m = gram.size();
    if (m == 0) throw DataError("train_klr: empty Gram");
    if (static_cast<long>(labels.size()) != m)
        throw DataError("train_klr: label count does not match Gram size");
    for (int y : labels) {
        if (y < 0) throw DataError("train_klr: negative label");
        if (num_classes == 0) continue;
        if (y >= num_classes) throw DataError("train_klr: label outside [0,K)");
    }
    if (num_classes == 0)
        for (int y : labels) num_classes = std::max(num_classes, y + 1);
    if (num_classes < 2) throw DataError("train_klr: need at least two classes");

    const Mat& g = gram.values;
    const double trace_g = g.trace();
    const double psd_floor = -1e-8 * std::max(trace_g, 1e-300);
    const double min_eig = min_eigenvalue(g);
    if (min_eig < psd_floor)
        throw NumericError("train_klr: Gram is not PSD within tolerance (min eigenvalue " +
                           std::to_string(min_eig) + ")");

    const long K = num_classes;
    const double lambda = config.lambda;
    const double inv_lm = 1.0 / (lambda * static_cast<double>(m));
    const double inv_m = 1.0 / static_cast<double>(m);

    Mat alpha = Mat::Constant(m, K, 1.0 / static_cast<double>(K));
    Mat beta(m, K);  // beta(i,k) = inv_lm * (1[y_i=k] - alpha(i,k))
    for (long i = 0; i < m; ++i)
        for (long k = 0; k < K; ++k)
            beta(i, k) = inv_lm * ((labels[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0) -
                                   alpha(i, k));
    Mat scores = g * beta;  // scores(i,k) = <v_k, psi_{x_i}>
    double quad = 0.0;      // sum_k beta_k' G beta_k
    for (long k = 0; k < K; ++k) quad += beta.col(k).dot(scores.col(k));
    double entropy = detail::entropy_term(alpha);

    std::vector<bool> row_moved(static_cast<std::size_t>(m), false);
    const bool backtracking = config.step_rule == TrainConfig::StepRule::Backtracking;

    auto dual_j = [&] { return inv_m * entropy + 0.5 * lambda * quad; };

    auto primal_objective = [&] {
        double loss = 0.0;
        for (long i = 0; i < m; ++i)
            loss += log_sum_exp(scores.row(i)) - scores(i, labels[static_cast<std::size_t>(i)]);
        return inv_m * loss + 0.5 * lambda * quad;
    };

    TrainResult result;
    Vec new_alpha(K), log_weights(K);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (long i = 0; i < m; ++i) {
            const double gii = g(i, i);
            double row_entropy = 0.0;
            for (long k = 0; k < K; ++k) {
                const double a = alpha(i, k);
                if (a > 0.0) row_entropy += a * std::log(a);
            }

            double step = config.eta;
            for (int attempt = 0;; ++attempt) {
                // multiplicative step toward exp(scores): in log space
                // log w_k = (1-step) log alpha_ik + step * scores(i,k)
                double max_lw = -INFINITY;
                for (long k = 0; k < K; ++k) {
                    const double la = alpha(i, k) > 0.0 ? std::log(alpha(i, k)) : -745.0;
                    log_weights[k] = (1.0 - step) * la + step * scores(i, k);
                    max_lw = std::max(max_lw, log_weights[k]);
                }
                double z = 0.0;
                for (long k = 0; k < K; ++k) {
                    new_alpha[k] = std::exp(log_weights[k] - max_lw);
                    z += new_alpha[k];
                }
                new_alpha /= z;

                // candidate change of J, evaluated in O(K)
                double new_entropy = 0.0, d_quad = 0.0;
                for (long k = 0; k < K; ++k) {
                    if (new_alpha[k] > 0.0) new_entropy += new_alpha[k] * std::log(new_alpha[k]);
                    const double d_beta = -inv_lm * (new_alpha[k] - alpha(i, k));
                    d_quad += 2.0 * d_beta * scores(i, k) + d_beta * d_beta * gii;
                }
                const double delta_j =
                    inv_m * (new_entropy - row_entropy) + 0.5 * lambda * d_quad;
                if (!backtracking || delta_j <= 0.0 || attempt >= 40) {
                    if (backtracking && delta_j > 0.0) break;  // no descent step found; skip row
                    // accept
                    entropy += new_entropy - row_entropy;
                    quad += d_quad;
                    for (long k = 0; k < K; ++k) {
                        const double d_beta = -inv_lm * (new_alpha[k] - alpha(i, k));
                        if (d_beta != 0.0) scores.col(k) += g.col(i) * d_beta;
                        beta(i, k) += d_beta;
                        if (new_alpha[k] != alpha(i, k)) row_moved[static_cast<std::size_t>(i)] = true;
                        alpha(i, k) = new_alpha[k];
                    }
                    break;
                }
                step *= 0.5;
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.dual_objective = dual_j();
        stats.primal_objective = primal_objective();
        stats.duality_gap = stats.primal_objective + stats.dual_objective;  // F - D = F + J
        for (bool moved : row_moved) stats.support_size += moved ? 1 : 0;
        result.trace.push_back(stats);

        if (stats.duality_gap <= config.dual_tolerance) {
            result.state.converged = true;
            result.state.epoch = epoch;
            break;
        }
        result.state.epoch = epoch;
    }

    const EpochStats& last = result.trace.back();
    result.state.alpha = alpha;
    result.state.dual_objective = -last.dual_objective;  // D(alpha) = -J(alpha)
    result.state.primal_objective = last.primal_objective;
    result.state.duality_gap = last.duality_gap;
    if (result.state.duality_gap < -1e-8)
        throw NumericError("train_klr: negative duality gap " +
                           std::to_string(result.state.duality_gap));

    result.model.beta = beta;
    result.model.gram_fingerprint = gram.fingerprint;
    result.model.num_classes = static_cast<int>(K);
    return result;
}

struct Prediction {
    std::vector<int> labels;
    Mat scores;  // n x K
};

/// Scores each row of `cross` (kernel values against the training points)
/// under the model; ties resolve to the lowest class index.
inline Prediction predict(const Model& model, const Mat& cross, const std::string& fingerprint) {
    if (fingerprint != model.gram_fingerprint)
        throw ConfigError("predict: kernel fingerprint mismatch (model " + model.gram_fingerprint +
                          ", data " + fingerprint + ")");
    if (cross.cols() != model.beta.rows())
        throw DataError("predict: cross-Gram width does not match training size");
    Prediction out;
    out.scores = cross * model.beta;
    out.labels.reserve(static_cast<std::size_t>(out.scores.rows()));
    for (long i = 0; i < out.scores.rows(); ++i) {
        int best = 0;
        for (int k = 1; k < out.scores.cols(); ++k)
            if (out.scores(i, k) > out.scores(i, best)) best = k;
        out.labels.push_back(best);
    }
    return out;
}

inline double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw DataError("error_rate: size mismatch");
    if (predicted.empty()) throw DataError("error_rate: empty label set");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

/// Mean log-loss of the model on labeled rows of kernel values.
inline double mean_log_loss(const Model& model, const Mat& cross, const std::vector<int>& labels,
                            double* stderr_out = nullptr) {
    if (cross.rows() != static_cast<long>(labels.size()))
        throw DataError("mean_log_loss: size mismatch");
    const Mat scores = cross * model.beta;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < scores.rows(); ++i) {
        const double loss =
            softmax_loss(scores.row(i), labels[static_cast<std::size_t>(i)]).loss;
        sum += loss;
        sumsq += loss * loss;
    }
    const double n = static_cast<double>(scores.rows());
    const double mean = sum / n;
    if (stderr_out) {
        const double var = n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0)) : 0.0;
        *stderr_out = std::sqrt(var / n);
    }
    return mean;
}

// Model file layout (little-endian): magic "IKMODL01", u32 format version,
// u32 K, u64 m, u32 length + bytes for the Gram fingerprint, the same for
// the training-data hash, then beta row-major f64.
inline constexpr char kModelMagic[8] = {'I', 'K', 'M', 'O', 'D', 'L', '0', '1'};

namespace detail {

inline void write_len_string(std::ofstream& out, const std::string& s) {
    const std::uint32_t len = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(s.data(), len);
}

inline std::string read_len_string(std::ifstream& in, const std::string& path) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in || len > (1u << 20)) throw DataError("model file truncated: " + path);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw DataError("model file truncated: " + path);
    return s;
}

}  // namespace detail

inline void save_model(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kModelMagic, sizeof(kModelMagic));
    const std::uint32_t version = 1;
    const std::uint32_t k = static_cast<std::uint32_t>(model.num_classes);
    const std::uint64_t m = static_cast<std::uint64_t>(model.beta.rows());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&k), 4);
    out.write(reinterpret_cast<const char*>(&m), 8);
    detail::write_len_string(out, model.gram_fingerprint);
    detail::write_len_string(out, model.train_data_hash);
    for (long i = 0; i < model.beta.rows(); ++i)
        for (long j = 0; j < model.beta.cols(); ++j) {
            const double v = model.beta(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!out) throw DataError("write failed for " + path);
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw DataError("not an IKMODL01 file: " + path);
    std::uint32_t version = 0, k = 0;
    std::uint64_t m = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&k), 4);
    in.read(reinterpret_cast<char*>(&m), 8);
    if (!in || version != 1) throw DataError("unsupported model file version in " + path);
    Model model;
    model.num_classes = static_cast<int>(k);
    model.gram_fingerprint = detail::read_len_string(in, path);
    model.train_data_hash = detail::read_len_string(in, path);
    model.beta.resize(static_cast<long>(m), static_cast<long>(k));
    for (long i = 0; i < model.beta.rows(); ++i)
        for (long j = 0; j < model.beta.cols(); ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            model.beta(i, j) = v;
        }
    if (!in) throw DataError("model file truncated: " + path);
    return model;
}

}  // namespace infinet
