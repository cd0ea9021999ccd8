#include "svtas/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "svtas/kernels.hpp"

namespace svtas::ag {

namespace {
thread_local bool g_grad_enabled = true;

template <class T>
void require_rank(const Var<T>& v, std::size_t rank, const char* op) {
    if (v.value().rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(v.shape()));
    }
}
} // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <class T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward_fn) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    if (!g_grad_enabled) return Var<T>(std::move(node));
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Var<T>& p) { return p.requires_grad(); });
    if (!any) return Var<T>(std::move(node));
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward_fn);
    return Var<T>(std::move(node));
}

template <class T>
void backward(const Var<T>& root) {
    if (root.value().numel() != 1) {
        throw ShapeError("backward: root must hold a single element, got " +
                         shape_str(root.shape()));
    }
    if (!root.requires_grad()) return;
    // Iterative post-order DFS gives a topological order.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node().get(), 0}};
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root.node()->grad_buffer()[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>& n = **it;
        if (n.backward_fn) {
            n.grad_buffer();
            n.backward_fn(n);
        }
    }
}

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions differ: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    }
    Tensor<T> out({m, n});
    kernels::gemm(false, false, m, n, k, a.value().data(), b.value().data(), out.data(), false);
    auto pa = a.node(), pb = b.node();
    return make_result<T>(std::move(out), {a, b}, [pa, pb, m, n, k](Node<T>& self) {
        const T* g = self.grad.data();
        if (pa->requires_grad)
            kernels::gemm(false, true, m, k, n, g, pb->value.data(), pa->grad_buffer().data(), true);
        if (pb->requires_grad)
            kernels::gemm(true, false, k, n, m, pa->value.data(), g, pb->grad_buffer().data(), true);
    });
}

template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
    require_rank(x, 2, "linear");
    require_rank(w, 2, "linear");
    const std::size_t n = x.dim(0), in = x.dim(1), out_dim = w.dim(1);
    if (w.dim(0) != in || bias.value().numel() != out_dim) {
        throw ShapeError("linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                         shape_str(w.shape()) + " / bias " + shape_str(bias.shape()));
    }
    Tensor<T> out({n, out_dim});
    kernels::gemm(false, false, n, out_dim, in, x.value().data(), w.value().data(), out.data(),
                  false);
    const T* b = bias.value().data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < out_dim; ++j) out[i * out_dim + j] += b[j];
    auto px = x.node(), pw = w.node(), pb = bias.node();
    return make_result<T>(std::move(out), {x, w, bias}, [px, pw, pb, n, in, out_dim](Node<T>& self) {
        const T* g = self.grad.data();
        if (px->requires_grad)
            kernels::gemm(false, true, n, in, out_dim, g, pw->value.data(),
                          px->grad_buffer().data(), true);
        if (pw->requires_grad)
            kernels::gemm(true, false, in, out_dim, n, px->value.data(), g,
                          pw->grad_buffer().data(), true);
        if (pb->requires_grad) {
            T* gb = pb->grad_buffer().data();
            for (std::size_t j = 0; j < out_dim; ++j) {
                T s = T(0);
                for (std::size_t i = 0; i < n; ++i) s += g[i * out_dim + j];
                gb[j] += s;
            }
        }
    });
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shapes differ: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor<T> out = a.value();
    const T* bv = b.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
    auto pa = a.node(), pb = b.node();
    return make_result<T>(std::move(out), {a, b}, [pa, pb](Node<T>& self) {
        for (auto* p : {pa.get(), pb.get()}) {
            if (!p->requires_grad) continue;
            T* gp = p->grad_buffer().data();
            for (std::size_t i = 0; i < self.grad.numel(); ++i) gp[i] += self.grad[i];
        }
    });
}

template <class T>
Var<T> scale(const Var<T>& a, T factor) {
    Tensor<T> out = a.value();
    for (auto& v : out.values()) v *= factor;
    auto pa = a.node();
    return make_result<T>(std::move(out), {a}, [pa, factor](Node<T>& self) {
        T* gp = pa->grad_buffer().data();
        for (std::size_t i = 0; i < self.grad.numel(); ++i) gp[i] += factor * self.grad[i];
    });
}

template <class T>
Var<T> relu(const Var<T>& a) {
    Tensor<T> out = a.value();
    for (auto& v : out.values()) v = v > T(0) ? v : T(0);
    auto pa = a.node();
    return make_result<T>(std::move(out), {a}, [pa](Node<T>& self) {
        T* gp = pa->grad_buffer().data();
        const T* y = self.value.data();
        for (std::size_t i = 0; i < self.grad.numel(); ++i)
            if (y[i] > T(0)) gp[i] += self.grad[i];
    });
}

template <class T>
Var<T> gelu(const Var<T>& a) {
    constexpr T c = T(0.7978845608028654); // sqrt(2/pi)
    constexpr T k3 = T(0.044715);
    Tensor<T> out = a.value();
    for (auto& v : out.values()) {
        const T u = c * (v + k3 * v * v * v);
        v = T(0.5) * v * (T(1) + std::tanh(u));
    }
    auto pa = a.node();
    return make_result<T>(std::move(out), {a}, [pa](Node<T>& self) {
        T* gp = pa->grad_buffer().data();
        const T* x = pa->value.data();
        for (std::size_t i = 0; i < self.grad.numel(); ++i) {
            const T xi = x[i];
            const T th = std::tanh(c * (xi + k3 * xi * xi * xi));
            const T d = T(0.5) * (T(1) + th) +
                        T(0.5) * xi * (T(1) - th * th) * c * (T(1) + T(3) * k3 * xi * xi);
            gp[i] += d * self.grad[i];
        }
    });
}

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::size_t stride,
              std::size_t pad) {
    require_rank(x, 4, "conv2d");
    require_rank(weight, 4, "conv2d");
    kernels::Conv2dGeometry g;
    g.frames = x.dim(0);
    g.in_h = x.dim(1);
    g.in_w = x.dim(2);
    g.in_c = x.dim(3);
    g.kernel = weight.dim(0);
    g.out_c = weight.dim(3);
    g.stride = stride;
    g.pad = pad;
    if (weight.dim(1) != g.kernel || weight.dim(2) != g.in_c || bias.value().numel() != g.out_c) {
        throw ShapeError("conv2d: input " + shape_str(x.shape()) + " incompatible with weight " +
                         shape_str(weight.shape()));
    }
    Tensor<T> out({g.frames, g.out_h(), g.out_w(), g.out_c});
    kernels::conv2d_forward(g, x.value().data(), weight.value().data(), bias.value().data(),
                            out.data());
    auto px = x.node(), pw = weight.node(), pb = bias.node();
    return make_result<T>(std::move(out), {x, weight, bias}, [px, pw, pb, g](Node<T>& self) {
        if (px->requires_grad) {
            Tensor<T> gin(px->value.shape());
            kernels::conv2d_backward_input(g, self.grad.data(), pw->value.data(), gin.data());
            T* gx = px->grad_buffer().data();
            for (std::size_t i = 0; i < gin.numel(); ++i) gx[i] += gin[i];
        }
        if (pw->requires_grad || pb->requires_grad) {
            kernels::conv2d_backward_weight(g, px->value.data(), self.grad.data(),
                                            pw->grad_buffer().data(), pb->grad_buffer().data());
        }
    });
}

template <class T>
Var<T> temporal_shift(const Var<T>& x, const Tensor<T>& carry, std::size_t shifted) {
    require_rank(x, 4, "temporal_shift");
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    if (shifted > c) throw ShapeError("temporal_shift: more shifted channels than channels");
    require_shape(carry, Shape{h, w, shifted}, "temporal_shift carry");
    Tensor<T> out = x.value();
    const std::size_t pixels = h * w;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t p = 0; p < pixels; ++p) {
            T* dst = out.data() + (t * pixels + p) * c;
            const T* src = t == 0 ? carry.data() + p * shifted
                                  : x.value().data() + ((t - 1) * pixels + p) * c;
            std::copy(src, src + shifted, dst);
        }
    }
    auto px = x.node();
    return make_result<T>(std::move(out), {x}, [px, n, pixels, c, shifted](Node<T>& self) {
        T* gx = px->grad_buffer().data();
        const T* g = self.grad.data();
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t p = 0; p < pixels; ++p) {
                const std::size_t row = (t * pixels + p) * c;
                for (std::size_t ch = shifted; ch < c; ++ch) gx[row + ch] += g[row + ch];
                if (t + 1 < n) {
                    const std::size_t next = ((t + 1) * pixels + p) * c;
                    for (std::size_t ch = 0; ch < shifted; ++ch) gx[row + ch] += g[next + ch];
                }
            }
        }
    });
}

template <class T>
Var<T> causal_conv1d(const Var<T>& x, const Tensor<T>& history, const Var<T>& weight,
                     const Var<T>& bias, std::size_t dilation) {
    require_rank(x, 2, "causal_conv1d");
    require_rank(weight, 3, "causal_conv1d");
    const std::size_t n = x.dim(0), ci = x.dim(1);
    const std::size_t taps = weight.dim(0), co = weight.dim(2);
    const std::size_t pad = dilation * (taps - 1);
    if (weight.dim(1) != ci || bias.value().numel() != co) {
        throw ShapeError("causal_conv1d: input " + shape_str(x.shape()) +
                         " incompatible with weight " + shape_str(weight.shape()));
    }
    if (history.shape() != Shape{pad, ci}) {
        throw ProtocolError("causal_conv1d: history shape " + shape_str(history.shape()) +
                            " != expected " + shape_str(Shape{pad, ci}));
    }
    auto padded = std::make_shared<std::vector<T>>((pad + n) * ci);
    std::copy(history.data(), history.data() + pad * ci, padded->begin());
    std::copy(x.value().data(), x.value().data() + n * ci, padded->begin() + pad * ci);

    Tensor<T> out({n, co});
    const T* wv = weight.value().data();
    for (std::size_t m = 0; m < taps; ++m) {
        kernels::gemm(false, false, n, co, ci, padded->data() + m * dilation * ci, wv + m * ci * co,
                      out.data(), m > 0);
    }
    const T* b = bias.value().data();
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < co; ++j) out[t * co + j] += b[j];

    auto px = x.node(), pw = weight.node(), pb = bias.node();
    return make_result<T>(
        std::move(out), {x, weight, bias},
        [px, pw, pb, padded, n, ci, co, taps, pad, dilation](Node<T>& self) {
            const T* g = self.grad.data();
            if (px->requires_grad) {
                std::vector<T> gpad((pad + n) * ci, T(0));
                for (std::size_t m = 0; m < taps; ++m) {
                    kernels::gemm(false, true, n, ci, co, g, pw->value.data() + m * ci * co,
                                  gpad.data() + m * dilation * ci, true);
                }
                T* gx = px->grad_buffer().data();
                for (std::size_t i = 0; i < n * ci; ++i) gx[i] += gpad[pad * ci + i];
            }
            if (pw->requires_grad) {
                T* gw = pw->grad_buffer().data();
                for (std::size_t m = 0; m < taps; ++m) {
                    kernels::gemm(true, false, ci, co, n, padded->data() + m * dilation * ci, g,
                                  gw + m * ci * co, true);
                }
            }
            if (pb->requires_grad) {
                T* gb = pb->grad_buffer().data();
                for (std::size_t j = 0; j < co; ++j) {
                    T s = T(0);
                    for (std::size_t t = 0; t < n; ++t) s += g[t * co + j];
                    gb[j] += s;
                }
            }
        });
}

template <class T>
Var<T> spatial_mean(const Var<T>& x) {
    require_rank(x, 4, "spatial_mean");
    const std::size_t n = x.dim(0), pixels = x.dim(1) * x.dim(2), c = x.dim(3);
    Tensor<T> out({n, c});
    const T* xv = x.value().data();
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            T s = T(0);
            for (std::size_t p = 0; p < pixels; ++p) s += xv[(t * pixels + p) * c + ch];
            out[t * c + ch] = s / T(pixels);
        }
    }
    auto px = x.node();
    return make_result<T>(std::move(out), {x}, [px, n, pixels, c](Node<T>& self) {
        T* gx = px->grad_buffer().data();
        const T inv = T(1) / T(pixels);
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t p = 0; p < pixels; ++p)
                for (std::size_t ch = 0; ch < c; ++ch)
                    gx[(t * pixels + p) * c + ch] += self.grad[t * c + ch] * inv;
    });
}

template <class T>
Var<T> concat_cols(const Var<T>& a, const Var<T>& b) {
    require_rank(a, 2, "concat_cols");
    require_rank(b, 2, "concat_cols");
    if (a.dim(0) != b.dim(0)) {
        throw ShapeError("concat_cols: row counts differ: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    const std::size_t n = a.dim(0), p = a.dim(1), q = b.dim(1);
    Tensor<T> out({n, p + q});
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(a.value().data() + i * p, p, out.data() + i * (p + q));
        std::copy_n(b.value().data() + i * q, q, out.data() + i * (p + q) + p);
    }
    auto pa = a.node(), pb = b.node();
    return make_result<T>(std::move(out), {a, b}, [pa, pb, n, p, q](Node<T>& self) {
        for (std::size_t i = 0; i < n; ++i) {
            const T* g = self.grad.data() + i * (p + q);
            if (pa->requires_grad) {
                T* ga = pa->grad_buffer().data() + i * p;
                for (std::size_t j = 0; j < p; ++j) ga[j] += g[j];
            }
            if (pb->requires_grad) {
                T* gb = pb->grad_buffer().data() + i * q;
                for (std::size_t j = 0; j < q; ++j) gb[j] += g[p + j];
            }
        }
    });
}

template <class T>
Var<T> concat_rows(const Var<T>& a, const Var<T>& b) {
    require_rank(a, 2, "concat_rows");
    require_rank(b, 2, "concat_rows");
    if (a.dim(1) != b.dim(1)) {
        throw ShapeError("concat_rows: column counts differ: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    const std::size_t na = a.value().numel();
    Tensor<T> out({a.dim(0) + b.dim(0), a.dim(1)});
    std::copy_n(a.value().data(), na, out.data());
    std::copy_n(b.value().data(), b.value().numel(), out.data() + na);
    auto pa = a.node(), pb = b.node();
    return make_result<T>(std::move(out), {a, b}, [pa, pb, na](Node<T>& self) {
        if (pa->requires_grad) {
            T* ga = pa->grad_buffer().data();
            for (std::size_t i = 0; i < na; ++i) ga[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            T* gb = pb->grad_buffer().data();
            for (std::size_t i = 0; i < pb->value.numel(); ++i) gb[i] += self.grad[na + i];
        }
    });
}

template <class T>
Var<T> reverse_rows(const Var<T>& a) {
    require_rank(a, 2, "reverse_rows");
    const std::size_t n = a.dim(0), d = a.dim(1);
    Tensor<T> out({n, d});
    for (std::size_t i = 0; i < n; ++i)
        std::copy_n(a.value().data() + (n - 1 - i) * d, d, out.data() + i * d);
    auto pa = a.node();
    return make_result<T>(std::move(out), {a}, [pa, n, d](Node<T>& self) {
        T* ga = pa->grad_buffer().data();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) ga[(n - 1 - i) * d + j] += self.grad[i * d + j];
    });
}

template <class T>
Var<T> gather_rows(const Var<T>& a, std::span<const std::size_t> rows) {
    require_rank(a, 2, "gather_rows");
    const std::size_t d = a.dim(1);
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    Tensor<T> out({idx.size(), d});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= a.dim(0)) throw ShapeError("gather_rows: row index out of range");
        std::copy_n(a.value().data() + idx[i] * d, d, out.data() + i * d);
    }
    auto pa = a.node();
    return make_result<T>(std::move(out), {a}, [pa, idx, d](Node<T>& self) {
        T* ga = pa->grad_buffer().data();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) ga[idx[i] * d + j] += self.grad[i * d + j];
    });
}

template <class T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
    require_rank(x, 2, "layer_norm");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (gamma.value().numel() != d || beta.value().numel() != d) {
        throw ShapeError("layer_norm: affine parameters do not match feature dim");
    }
    Tensor<T> out({n, d});
    auto normed = std::make_shared<std::vector<T>>(n * d);
    auto inv_std = std::make_shared<std::vector<T>>(n);
    const T* xv = x.value().data();
    const T* gv = gamma.value().data();
    const T* bv = beta.value().data();
    for (std::size_t i = 0; i < n; ++i) {
        T mean = T(0);
        for (std::size_t j = 0; j < d; ++j) mean += xv[i * d + j];
        mean /= T(d);
        T var = T(0);
        for (std::size_t j = 0; j < d; ++j) {
            const T c = xv[i * d + j] - mean;
            var += c * c;
        }
        var /= T(d);
        const T is = T(1) / std::sqrt(var + eps);
        (*inv_std)[i] = is;
        for (std::size_t j = 0; j < d; ++j) {
            const T nh = (xv[i * d + j] - mean) * is;
            (*normed)[i * d + j] = nh;
            out[i * d + j] = gv[j] * nh + bv[j];
        }
    }
    auto px = x.node(), pg = gamma.node(), pb = beta.node();
    return make_result<T>(std::move(out), {x, gamma, beta},
                          [px, pg, pb, normed, inv_std, n, d](Node<T>& self) {
        const T* g = self.grad.data();
        const T* gv = pg->value.data();
        if (pg->requires_grad || pb->requires_grad) {
            T* gg = pg->grad_buffer().data();
            T* gb = pb->grad_buffer().data();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    gg[j] += g[i * d + j] * (*normed)[i * d + j];
                    gb[j] += g[i * d + j];
                }
        }
        if (px->requires_grad) {
            T* gx = px->grad_buffer().data();
            for (std::size_t i = 0; i < n; ++i) {
                T mean_g = T(0), mean_gn = T(0);
                for (std::size_t j = 0; j < d; ++j) {
                    const T gh = g[i * d + j] * gv[j];
                    mean_g += gh;
                    mean_gn += gh * (*normed)[i * d + j];
                }
                mean_g /= T(d);
                mean_gn /= T(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const T gh = g[i * d + j] * gv[j];
                    gx[i * d + j] +=
                        (*inv_std)[i] * (gh - mean_g - (*normed)[i * d + j] * mean_gn);
                }
            }
        }
    });
}

template <class T>
Var<T> embedding(std::span<const int> ids, const Var<T>& table) {
    require_rank(table, 2, "embedding");
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    std::vector<int> idx(ids.begin(), ids.end());
    Tensor<T> out({idx.size(), d});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || std::size_t(idx[i]) >= vocab) {
            throw ShapeError("embedding: token id " + std::to_string(idx[i]) + " out of range");
        }
        std::copy_n(table.value().data() + std::size_t(idx[i]) * d, d, out.data() + i * d);
    }
    auto pt = table.node();
    return make_result<T>(std::move(out), {table}, [pt, idx, d](Node<T>& self) {
        T* gt = pt->grad_buffer().data();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                gt[std::size_t(idx[i]) * d + j] += self.grad[i * d + j];
    });
}

template <class T>
Var<T> causal_attention(const Var<T>& qkv, std::size_t batch, std::size_t length,
                        std::size_t heads) {
    require_rank(qkv, 2, "causal_attention");
    if (qkv.dim(0) != batch * length || qkv.dim(1) % (3 * heads) != 0) {
        throw ShapeError("causal_attention: qkv shape " + shape_str(qkv.shape()) +
                         " incompatible with batch/length/heads");
    }
    const std::size_t d = qkv.dim(1) / 3, dh = d / heads, stride = 3 * d;
    const T inv_scale = T(1) / std::sqrt(T(dh));
    const T* qv = qkv.value().data();
    // Attention weights per (sequence, head), lower-triangular [length, length].
    auto probs = std::make_shared<std::vector<T>>(batch * heads * length * length, T(0));
    Tensor<T> out({batch * length, d});
#pragma omp parallel for schedule(static)
    for (long bh = 0; bh < long(batch * heads); ++bh) {
        const std::size_t b = std::size_t(bh) / heads, h = std::size_t(bh) % heads;
        T* P = probs->data() + std::size_t(bh) * length * length;
        for (std::size_t i = 0; i < length; ++i) {
            const T* q = qv + (b * length + i) * stride + h * dh;
            T mx = -std::numeric_limits<T>::infinity();
            for (std::size_t j = 0; j <= i; ++j) {
                const T* kr = qv + (b * length + j) * stride + d + h * dh;
                T s = T(0);
                for (std::size_t e = 0; e < dh; ++e) s += q[e] * kr[e];
                s *= inv_scale;
                P[i * length + j] = s;
                mx = std::max(mx, s);
            }
            T z = T(0);
            for (std::size_t j = 0; j <= i; ++j) {
                P[i * length + j] = std::exp(P[i * length + j] - mx);
                z += P[i * length + j];
            }
            T* o = out.data() + (b * length + i) * d + h * dh;
            for (std::size_t j = 0; j <= i; ++j) {
                P[i * length + j] /= z;
                const T* vr = qv + (b * length + j) * stride + 2 * d + h * dh;
                for (std::size_t e = 0; e < dh; ++e) o[e] += P[i * length + j] * vr[e];
            }
        }
    }
    auto pq = qkv.node();
    return make_result<T>(std::move(out), {qkv},
                          [pq, probs, batch, length, heads, d, dh, stride, inv_scale](Node<T>& self) {
        const T* qv = pq->value.data();
        T* gq = pq->grad_buffer().data();
        const T* g = self.grad.data();
#pragma omp parallel
        {
            std::vector<T> dp(length);
#pragma omp for schedule(static)
            for (long bh = 0; bh < long(batch * heads); ++bh) {
                const std::size_t b = std::size_t(bh) / heads, h = std::size_t(bh) % heads;
                const T* P = probs->data() + std::size_t(bh) * length * length;
                for (std::size_t i = 0; i < length; ++i) {
                    const T* go = g + (b * length + i) * d + h * dh;
                    T dot = T(0);
                    for (std::size_t j = 0; j <= i; ++j) {
                        const std::size_t rj = (b * length + j) * stride;
                        T s = T(0);
                        for (std::size_t e = 0; e < dh; ++e) {
                            s += go[e] * qv[rj + 2 * d + h * dh + e];
                            gq[rj + 2 * d + h * dh + e] += P[i * length + j] * go[e];
                        }
                        dp[j] = s;
                        dot += s * P[i * length + j];
                    }
                    const std::size_t ri = (b * length + i) * stride;
                    for (std::size_t j = 0; j <= i; ++j) {
                        const T ds = P[i * length + j] * (dp[j] - dot) * inv_scale;
                        const std::size_t rj = (b * length + j) * stride;
                        for (std::size_t e = 0; e < dh; ++e) {
                            gq[ri + h * dh + e] += ds * qv[rj + d + h * dh + e];
                            gq[rj + d + h * dh + e] += ds * qv[ri + h * dh + e];
                        }
                    }
                }
            }
        }
    });
}

template <class T>
Var<T> l2_normalize_rows(const Var<T>& x) {
    require_rank(x, 2, "l2_normalize_rows");
    const std::size_t n = x.dim(0), d = x.dim(1);
    Tensor<T> out({n, d});
    auto norms = std::make_shared<std::vector<T>>(n);
    for (std::size_t i = 0; i < n; ++i) {
        T s = T(0);
        for (std::size_t j = 0; j < d; ++j) s += x.value()[i * d + j] * x.value()[i * d + j];
        const T nr = std::sqrt(s);
        if (!(nr > T(0))) {
            throw NormalizationError("l2_normalize_rows: row " + std::to_string(i) +
                                     " has zero norm");
        }
        (*norms)[i] = nr;
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = x.value()[i * d + j] / nr;
    }
    auto px = x.node();
    return make_result<T>(std::move(out), {x}, [px, norms, n, d](Node<T>& self) {
        T* gx = px->grad_buffer().data();
        for (std::size_t i = 0; i < n; ++i) {
            T dot = T(0);
            for (std::size_t j = 0; j < d; ++j) dot += self.value[i * d + j] * self.grad[i * d + j];
            for (std::size_t j = 0; j < d; ++j)
                gx[i * d + j] += (self.grad[i * d + j] - self.value[i * d + j] * dot) / (*norms)[i];
        }
    });
}

#define SVTAS_INSTANTIATE(T)                                                                      \
    template Var<T> make_result<T>(Tensor<T>, std::vector<Var<T>>, std::function<void(Node<T>&)>); \
    template void backward<T>(const Var<T>&);                                                     \
    template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                                      \
    template Var<T> linear<T>(const Var<T>&, const Var<T>&, const Var<T>&);                       \
    template Var<T> add<T>(const Var<T>&, const Var<T>&);                                         \
    template Var<T> scale<T>(const Var<T>&, T);                                                   \
    template Var<T> relu<T>(const Var<T>&);                                                       \
    template Var<T> gelu<T>(const Var<T>&);                                                       \
    template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t,           \
                              std::size_t);                                                       \
    template Var<T> temporal_shift<T>(const Var<T>&, const Tensor<T>&, std::size_t);              \
    template Var<T> causal_conv1d<T>(const Var<T>&, const Tensor<T>&, const Var<T>&,              \
                                     const Var<T>&, std::size_t);                                 \
    template Var<T> spatial_mean<T>(const Var<T>&);                                               \
    template Var<T> concat_cols<T>(const Var<T>&, const Var<T>&);                                 \
    template Var<T> concat_rows<T>(const Var<T>&, const Var<T>&);                                 \
    template Var<T> reverse_rows<T>(const Var<T>&);                                               \
    template Var<T> gather_rows<T>(const Var<T>&, std::span<const std::size_t>);                  \
    template Var<T> layer_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);                \
    template Var<T> embedding<T>(std::span<const int>, const Var<T>&);                            \
    template Var<T> causal_attention<T>(const Var<T>&, std::size_t, std::size_t, std::size_t);    \
    template Var<T> l2_normalize_rows<T>(const Var<T>&);

SVTAS_INSTANTIATE(float)
SVTAS_INSTANTIATE(double)

} // namespace svtas::ag
