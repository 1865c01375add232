#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "infinet/common.hpp"
#include "infinet/linalg.hpp"

namespace infinet {

/// Covariance function C(w1,w2) of the Gaussian process weighting the second
/// intermediate layer.
///
/// SquaredExponential carries the prefactor (1+2a)^(1+d/2) that makes the
/// two-layer kernel analytic; it is evaluated in log space because the
/// prefactor and the exponential tail can individually leave double range
/// long before their product does.
struct GpCovariance {
    enum class Kind { SquaredExponential, OrnsteinUhlenbeck, Constant, Custom };

    Kind kind = Kind::SquaredExponential;
    double alpha = 1.0;   // SquaredExponential width
    double value = 1.0;   // Constant level
    std::function<double(const Vec&, const Vec&)> custom;

    static GpCovariance squared_exponential(double alpha) {
        if (!(alpha > 0.0)) throw ConfigError("squared_exponential: alpha must be > 0");
        GpCovariance c;
        c.kind = Kind::SquaredExponential;
        c.alpha = alpha;
        return c;
    }

    static GpCovariance ornstein_uhlenbeck() {
        GpCovariance c;
        c.kind = Kind::OrnsteinUhlenbeck;
        return c;
    }

    static GpCovariance constant(double v) {
        if (!(v > 0.0)) throw ConfigError("constant covariance: value must be > 0");
        GpCovariance c;
        c.kind = Kind::Constant;
        c.value = v;
        return c;
    }

    static GpCovariance custom_fn(std::function<double(const Vec&, const Vec&)> fn) {
        GpCovariance c;
        c.kind = Kind::Custom;
        c.custom = std::move(fn);
        return c;
    }

    bool shift_invariant() const { return kind != Kind::Custom; }

    /// C(w,w) = c(0); the amplitude a Bochner feature map has to carry.
    double amplitude(long dim) const {
        switch (kind) {
            case Kind::SquaredExponential:
                return std::exp((1.0 + 0.5 * static_cast<double>(dim)) * std::log1p(2.0 * alpha));
            case Kind::OrnsteinUhlenbeck: return 1.0;
            case Kind::Constant: return value;
            case Kind::Custom: throw ConfigError("custom covariance has no known amplitude");
        }
        throw ConfigError("unknown covariance kind");
    }

    double operator()(const Vec& w1, const Vec& w2) const {
        if (w1.size() != w2.size()) throw DataError("covariance: dimension mismatch");
        switch (kind) {
            case Kind::SquaredExponential: {
                const double d = static_cast<double>(w1.size());
                const double log_pref = (1.0 + 0.5 * d) * std::log1p(2.0 * alpha);
                return std::exp(log_pref - 0.5 * alpha * (w1 - w2).squaredNorm());
            }
            case Kind::OrnsteinUhlenbeck:
                return std::exp(-(w1 - w2).cwiseAbs().sum());
            case Kind::Constant:
                return value;
            case Kind::Custom:
                if (!custom) throw ConfigError("custom covariance has no evaluator");
                return custom(w1, w2);
        }
        throw ConfigError("unknown covariance kind");
    }

    std::string name() const {
        std::ostringstream out;
        switch (kind) {
            case Kind::SquaredExponential: out << "se(alpha=" << alpha << ")"; break;
            case Kind::OrnsteinUhlenbeck: out << "ou"; break;
            case Kind::Constant: out << "const(" << value << ")"; break;
            case Kind::Custom: out << "custom"; break;
        }
        return out.str();
    }
};

}  // namespace infinet
