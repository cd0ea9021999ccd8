#include "svtas/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "svtas/errors.hpp"
#include "svtas/kernels.hpp"

namespace svtas {

void LossConfig::validate() const {
    if (!(lambda_smooth >= 0.0) || !std::isfinite(lambda_smooth)) throw ConfigError("lambda_smooth must be finite and >= 0");
    if (!(tau_smooth > 0.0) || !std::isfinite(tau_smooth)) throw ConfigError("tau_smooth must be finite and > 0");
    if (!(clip_temperature > 0.0) || !std::isfinite(clip_temperature)) throw ConfigError("clip_temperature must be finite and > 0");
    if (num_chunks_norm < 1) throw ConfigError("num_chunks_norm must be >= 1");
}

namespace {

// Row-wise log-softmax of a [rows, cols] block.
template <class T>
void log_softmax_rows(const T* x, std::size_t rows, std::size_t cols, T* out) {
    for (std::size_t i = 0; i < rows; ++i) {
        const T* r = x + i * cols;
        T mx = *std::max_element(r, r + cols);
        T z = T(0);
        for (std::size_t j = 0; j < cols; ++j) z += std::exp(r[j] - mx);
        const T lz = std::log(z);
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = (r[j] - mx) - lz;
    }
}

} // namespace

namespace ag {

template <class T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const ClassId> labels) {
    if (logits.value().rank() != 2) throw ShapeError("cross_entropy: logits must be [n, C]");
    const std::size_t rows = labels.size(), c = logits.dim(1);
    if (rows == 0 || rows > logits.dim(0)) throw ShapeError("cross_entropy: label count does not fit the logits");
    for (ClassId l : labels)
        if (l < 0 || std::size_t(l) >= c) throw DataError("cross_entropy: label " + std::to_string(l) + " out of range");
    auto logp = std::make_shared<std::vector<T>>(rows * c);
    log_softmax_rows(logits.value().data(), rows, c, logp->data());
    // Running mean, exact when every row has the same loss.
    T mean = T(0);
    for (std::size_t i = 0; i < rows; ++i) mean += (-(*logp)[i * c + std::size_t(labels[i])] - mean) / T(i + 1);
    Tensor<T> out({1}, mean);
    std::vector<ClassId> lab(labels.begin(), labels.end());
    auto pl = logits.node();
    return make_result<T>(std::move(out), {logits}, [pl, logp, lab, rows, c](Node<T>& self) {
        const T g = self.grad[0] / T(rows);
        T* gx = pl->grad_buffer().data();
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                const T target = std::size_t(lab[i]) == j ? T(1) : T(0);
                gx[i * c + j] += g * (std::exp((*logp)[i * c + j]) - target);
            }
        }
    });
}

template <class T>
Var<T> truncated_mse(const Var<T>& logits, const Tensor<T>& reference, std::size_t rows, T tau) {
    if (logits.value().rank() != 2) throw ShapeError("truncated_mse: logits must be [n, C]");
    if (reference.shape() != logits.shape()) throw ShapeError("truncated_mse: reference shape differs from logits");
    const std::size_t c = logits.dim(1);
    rows = std::min(rows, logits.dim(0));
    if (rows < 2) return Var<T>::constant(Tensor<T>({1}));
    const T floor_log = T(std::log(kSmoothingProbFloor));
    auto logp = std::make_shared<std::vector<T>>(rows * c);
    std::vector<T> ref(rows * c);
    log_softmax_rows(logits.value().data(), rows, c, logp->data());
    log_softmax_rows(reference.data(), rows, c, ref.data());
    // d loss / d logp for rows 1..rows-1, zero where truncated or floored.
    auto dlogp = std::make_shared<std::vector<T>>(rows * c, T(0));
    const T count = T((rows - 1) * c);
    const T tau2 = tau * tau;
    T s = T(0);
    for (std::size_t t = 1; t < rows; ++t) {
        for (std::size_t j = 0; j < c; ++j) {
            const T cur = std::max((*logp)[t * c + j], floor_log);
            const T prev = std::max(ref[(t - 1) * c + j], floor_log);
            const T delta = cur - prev;
            const T sq = delta * delta;
            if (sq < tau2) {
                s += sq;
                if ((*logp)[t * c + j] > floor_log) (*dlogp)[t * c + j] = T(2) * delta / count;
            } else {
                s += tau2;
            }
        }
    }
    Tensor<T> out({1}, s / count);
    auto pl = logits.node();
    return make_result<T>(std::move(out), {logits}, [pl, logp, dlogp, rows, c](Node<T>& self) {
        const T g = self.grad[0];
        T* gx = pl->grad_buffer().data();
        for (std::size_t t = 1; t < rows; ++t) {
            T total = T(0);
            for (std::size_t j = 0; j < c; ++j) total += (*dlogp)[t * c + j];
            for (std::size_t j = 0; j < c; ++j) {
                const T p = std::exp((*logp)[t * c + j]);
                gx[t * c + j] += g * ((*dlogp)[t * c + j] - p * total);
            }
        }
    });
}

template <class T>
Var<T> seg_loss(const Var<T>& logits, const LabelSequence& labels, const LossConfig& cfg) {
    cfg.validate();
    if (logits.value().rank() != 2 || labels.size() > logits.dim(0)) {
        throw ShapeError("seg_loss: " + std::to_string(labels.size()) + " labels for logits " +
                         shape_str(logits.shape()));
    }
    if (labels.num_classes() > logits.dim(1)) throw ShapeError("seg_loss: more classes than logit columns");
    auto loss = cross_entropy(logits, labels.values());
    if (cfg.lambda_smooth > 0.0) {
        auto smooth = truncated_mse(logits, logits.value(), labels.size(), T(cfg.tau_smooth));
        loss = add(loss, scale(smooth, T(cfg.lambda_smooth)));
    }
    return scale(loss, T(1) / T(cfg.num_chunks_norm));
}

template <class T>
Var<T> clip_loss(const Var<T>& img, const Var<T>& txt, T temperature) {
    if (img.value().rank() != 2 || img.shape() != txt.shape()) {
        throw ShapeError("clip_loss: feature batches must share a [n, d] shape");
    }
    if (!(temperature > T(0))) throw ConfigError("clip_loss: temperature must be > 0");
    const std::size_t n = img.dim(0), d = img.dim(1);
    for (const auto* v : {&img.value(), &txt.value()}) {
        for (std::size_t i = 0; i < n; ++i) {
            T s = T(0);
            for (std::size_t j = 0; j < d; ++j) s += (*v)[i * d + j] * (*v)[i * d + j];
            if (!(s > T(0))) throw NormalizationError("clip_loss: row " + std::to_string(i) + " has zero norm");
        }
    }
    // sim[i][j] = img_i . txt_j / temperature
    std::vector<T> sim(n * n);
    kernels::gemm(false, true, n, n, d, img.value().data(), txt.value().data(), sim.data(), false);
    for (auto& v : sim) v /= temperature;
    std::vector<T> sim_t(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sim_t[j * n + i] = sim[i * n + j];
    std::vector<T> row_lp(n * n), col_lp(n * n);
    log_softmax_rows(sim.data(), n, n, row_lp.data());
    log_softmax_rows(sim_t.data(), n, n, col_lp.data());
    T row_ce = T(0), col_ce = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        row_ce -= row_lp[i * n + i];
        col_ce -= col_lp[i * n + i];
    }
    Tensor<T> out({1}, (row_ce / T(n) + col_ce / T(n)) / T(2));

    // d loss / d sim[i][j]
    auto dsim = std::make_shared<std::vector<T>>(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const T eye = i == j ? T(1) : T(0);
            (*dsim)[i * n + j] =
                ((std::exp(row_lp[i * n + j]) - eye) + (std::exp(col_lp[j * n + i]) - eye)) / (T(2) * T(n));
        }
    }
    auto pi = img.node(), pt = txt.node();
    return make_result<T>(std::move(out), {img, txt}, [pi, pt, dsim, n, d, temperature](Node<T>& self) {
        const T g = self.grad[0] / temperature;
        std::vector<T> scaled(dsim->size());
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = g * (*dsim)[i];
        if (pi->requires_grad)
            kernels::gemm(false, false, n, d, n, scaled.data(), pt->value.data(), pi->grad_buffer().data(), true);
        if (pt->requires_grad)
            kernels::gemm(true, false, n, d, n, scaled.data(), pi->value.data(), pt->grad_buffer().data(), true);
    });
}

} // namespace ag

template <class T>
T seg_loss(const Tensor<T>& logits, const LabelSequence& labels, const LossConfig& cfg) {
    ag::NoGradGuard guard;
    return ag::seg_loss(ag::Var<T>::constant(logits), labels, cfg).value()[0];
}

template <class T>
T clip_loss(const Tensor<T>& img, const Tensor<T>& txt, T temperature) {
    ag::NoGradGuard guard;
    return ag::clip_loss(ag::Var<T>::constant(img), ag::Var<T>::constant(txt), temperature).value()[0];
}

#define SVTAS_INSTANTIATE(T)                                                                         \
    template ag::Var<T> ag::cross_entropy<T>(const ag::Var<T>&, std::span<const ClassId>);          \
    template ag::Var<T> ag::truncated_mse<T>(const ag::Var<T>&, const Tensor<T>&, std::size_t, T);  \
    template ag::Var<T> ag::seg_loss<T>(const ag::Var<T>&, const LabelSequence&, const LossConfig&); \
    template ag::Var<T> ag::clip_loss<T>(const ag::Var<T>&, const ag::Var<T>&, T);                  \
    template T seg_loss<T>(const Tensor<T>&, const LabelSequence&, const LossConfig&);              \
    template T clip_loss<T>(const Tensor<T>&, const Tensor<T>&, T);

SVTAS_INSTANTIATE(float)
SVTAS_INSTANTIATE(double)

} // namespace svtas
