#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/config.hpp"
#include "svtas/data_model.hpp"
#include "svtas/encoder.hpp"
#include "svtas/memory_tcn.hpp"
#include "svtas/parameters.hpp"
#include "svtas/prompt.hpp"
#include "svtas/text_encoder.hpp"

namespace svtas {

// Everything a stream carries from one chunk to the next. The size of every
// member is fixed by the model config.
template <class T>
struct StreamState {
    EncoderState<T> encoder;
    MemoryCache<T> tcn;
    Tensor<T> prev_text;                     // [k, d_t]; Transeger only
    std::optional<LabelSequence> prev_labels; // window that produced prev_text
    std::size_t chunks_processed = 0;
};

template <class T>
struct ChunkForward {
    ag::Var<T> logits;     // [k, num_classes]
    ag::Var<T> pooled;     // [k, d_i]
    ag::Var<T> image_proj; // [k, embed_dim], unit rows; only when the contrastive branch ran
    ag::Var<T> text_proj;  // [k, embed_dim], unit rows
};

// Time reversal of a [k, d] feature sequence.
template <class T>
ag::Var<T> downfall(const ag::Var<T>& features) {
    return ag::reverse_rows(features);
}

// The three model assemblies sharing one parameter layout per variant:
//   SETE       frames -> encoder -> pool -> memory TCN
//   METE       SETE plus a train-time text branch and contrastive heads
//   Transeger  JointNet: downfall(text of previous window) ++ pooled image -> memory TCN
template <class T>
class Model {
public:
    Model(Variant variant, ModelConfig config, std::vector<std::string> class_names, std::uint64_t seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    Variant variant() const { return variant_; }
    const ModelConfig& config() const { return config_; }
    const std::vector<std::string>& class_names() const { return class_names_; }
    const Vocabulary& vocabulary() const { return *vocab_; }
    ParameterStore<T>& parameters() { return *params_; }
    const ParameterStore<T>& parameters() const { return *params_; }
    bool has_text_branch() const { return text_ != nullptr; }
    bool has_contrastive_heads() const { return img_proj_w_.defined(); }

    StreamState<T> initial_state() const;

    // F^I: spatial features [n, h, w, d_i].
    ag::Var<T> encode_frames(const ag::Var<T>& frames, EncoderState<T>& state) const;
    // F^{I_p}: [n, d_i].
    ag::Var<T> pooled_features(const ag::Var<T>& frames, EncoderState<T>& state) const;
    // F^T for a window of labels, padded to k with background: [k, d_t].
    ag::Var<T> text_features(const LabelSequence& window) const;
    // downfall(prev_text) ++ image, through the memory TCN.
    ag::Var<T> joint_net(const ag::Var<T>& prev_text, const ag::Var<T>& image, MemoryCache<T>& cache) const;
    // Temporal model applied to already-fused or pooled features.
    ag::Var<T> temporal(const ag::Var<T>& features, MemoryCache<T>& cache) const;

    // One chunk of k frames [k, H, W, 3], advancing `state`.
    //   prompt_labels: previous window's labels (Transeger); nullptr means the
    //                  start-of-stream all-background window.
    //   text_labels:   current window's ground truth, enabling the contrastive
    //                  branch when the model has one; nullptr skips it.
    ChunkForward<T> forward(const Tensor<T>& frames, StreamState<T>& state, const LabelSequence* prompt_labels,
                            const LabelSequence* text_labels) const;

    // Same architecture in another precision with identical weights.
    template <class U>
    Model<U> cast() const {
        Model<U> out(variant_, config_, class_names_, 0);
        for (auto& [name, var] : out.parameters().entries()) var.mutable_value() = params_->get(name).value().template cast<U>();
        return out;
    }

    LabelSequence start_window() const;

private:
    Variant variant_;
    ModelConfig config_;
    std::vector<std::string> class_names_;
    std::unique_ptr<Vocabulary> vocab_;
    std::unique_ptr<ParameterStore<T>> params_;
    std::unique_ptr<FrameEncoder<T>> encoder_;
    std::unique_ptr<TextEncoder<T>> text_;
    std::unique_ptr<MemoryTcn<T>> tcn_;
    ag::Var<T> img_proj_w_, img_proj_b_, txt_proj_w_, txt_proj_b_;
};

} // namespace svtas
