#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/errors.hpp"

namespace svtas {

using Rng = std::mt19937_64;

// Named trainable tensors in registration order. Names are dotted paths
// ("tcn.layer0.dilated.weight") and double as checkpoint keys.
template <class T>
class ParameterStore {
public:
    ag::Var<T> add(const std::string& name, Tensor<T> init) {
        for (const auto& [n, v] : entries_) {
            if (n == name) throw ConfigError("duplicate parameter name " + name);
        }
        auto v = ag::Var<T>::parameter(std::move(init));
        entries_.emplace_back(name, v);
        return v;
    }

    const ag::Var<T>& get(const std::string& name) const {
        for (const auto& [n, v] : entries_)
            if (n == name) return v;
        throw DataError("no parameter named " + name);
    }

    std::vector<std::pair<std::string, ag::Var<T>>>& entries() { return entries_; }
    const std::vector<std::pair<std::string, ag::Var<T>>>& entries() const { return entries_; }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.second.value().numel();
        return n;
    }

    void zero_grad() {
        for (auto& e : entries_) e.second.zero_grad();
    }

private:
    std::vector<std::pair<std::string, ag::Var<T>>> entries_;
};

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual default for conv and linear layers.
template <class T>
Tensor<T> fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = T(dist(rng));
    return t;
}

// U(-sqrt(6/fan_in), sqrt(6/fan_in)), for weights feeding a ReLU.
template <class T>
Tensor<T> he_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / double(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = T(dist(rng));
    return t;
}

template <class T>
Tensor<T> normal_init(Shape shape, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = T(dist(rng));
    return t;
}

} // namespace svtas
