#pragma once

#include <string>

#include "infinet/common.hpp"

namespace infinet {

/// Transfer function of the infinite layer: relu(t) = max(0,t) or step(t) = 1[t >= 0].
enum class Activation { ReLU, Step };

inline double activation_apply(Activation a, double t) {
    switch (a) {
        case Activation::ReLU: return t > 0.0 ? t : 0.0;
        case Activation::Step: return t >= 0.0 ? 1.0 : 0.0;
    }
    throw ConfigError("unknown activation");
}

inline const char* activation_name(Activation a) {
    return a == Activation::ReLU ? "relu" : "step";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "step") return Activation::Step;
    throw ConfigError("unknown activation '" + name + "' (expected relu|step)");
}

}  // namespace infinet
