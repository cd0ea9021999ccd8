#include "svtas/optimizer.hpp"

#include <cmath>

namespace svtas {

template <class T>
Adam<T>::Adam(ParameterStore<T>& params, AdamOptions options) : params_(&params), options_(options) {
    if (!(options_.learning_rate > 0) || options_.weight_decay < 0 || !(options_.eps > 0))
        throw ConfigError("invalid Adam options");
    for (const auto& e : params_->entries()) {
        m_.emplace_back(e.second.value().numel(), 0.0);
        v_.emplace_back(e.second.value().numel(), 0.0);
    }
}

template <class T>
void Adam<T>::step(double grad_scale) {
    ++t_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, double(t_));
    const double c2 = 1.0 - std::pow(b2, double(t_));
    auto& entries = params_->entries();
    for (std::size_t p = 0; p < entries.size(); ++p) {
        auto& var = entries[p].second;
        auto w = var.mutable_value().values();
        auto g = var.mutable_grad().values();
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double grad = double(g[i]) * grad_scale + options_.weight_decay * double(w[i]);
            m[i] = b1 * m[i] + (1 - b1) * grad;
            v[i] = b2 * v[i] + (1 - b2) * grad * grad;
            const double step = options_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.eps);
            w[i] = T(double(w[i]) - step);
        }
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace svtas
