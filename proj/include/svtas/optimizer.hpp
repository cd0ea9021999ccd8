#pragma once

#include <cstddef>
#include <vector>

#include "svtas/parameters.hpp"

namespace svtas {

struct AdamOptions {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4; // L2 term added to the gradient
};

// Adam over every tensor of a ParameterStore, in registration order.
template <class T>
class Adam {
public:
    Adam(ParameterStore<T>& params, AdamOptions options);

    // Applies one update from the current gradients scaled by grad_scale.
    void step(double grad_scale = 1.0);
    void zero_grad() { params_->zero_grad(); }
    std::size_t steps() const { return t_; }
    const AdamOptions& options() const { return options_; }

private:
    ParameterStore<T>* params_;
    AdamOptions options_;
    std::vector<std::vector<double>> m_, v_;
    std::size_t t_ = 0;
};

} // namespace svtas
