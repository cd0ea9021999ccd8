#include "svtas/model.hpp"

namespace svtas {

template <class T>
Model<T>::Model(Variant variant, ModelConfig config, std::vector<std::string> class_names, std::uint64_t seed)
    : variant_(variant), config_(std::move(config)), class_names_(std::move(class_names)) {
    config_.validate();
    if (class_names_.size() != config_.num_classes) {
        throw ConfigError("model has " + std::to_string(config_.num_classes) + " classes but " +
                          std::to_string(class_names_.size()) + " class names");
    }
    vocab_ = std::make_unique<Vocabulary>(class_names_);
    params_ = std::make_unique<ParameterStore<T>>();
    Rng rng(seed);
    encoder_ = std::make_unique<FrameEncoder<T>>(config_, *params_, rng);
    if (variant_ != Variant::Sete) {
        text_ = std::make_unique<TextEncoder<T>>(config_, vocab_->size(), *params_, rng);
    }
    const std::size_t tcn_in = variant_ == Variant::Transeger ? config_.d_t + config_.d_i : config_.d_i;
    tcn_ = std::make_unique<MemoryTcn<T>>(tcn_in, config_, *params_, rng);
    const bool heads = (variant_ == Variant::Mete && config_.mete_clip_loss) ||
                       (variant_ == Variant::Transeger && config_.transeger_clip_loss);
    if (heads) {
        const std::size_t e = config_.embed_dim;
        img_proj_w_ = params_->add("head.image.weight", fan_in_uniform<T>({config_.d_i, e}, config_.d_i, rng));
        img_proj_b_ = params_->add("head.image.bias", Tensor<T>({e}));
        txt_proj_w_ = params_->add("head.text.weight", fan_in_uniform<T>({config_.d_t, e}, config_.d_t, rng));
        txt_proj_b_ = params_->add("head.text.bias", Tensor<T>({e}));
    }
}

template <class T>
StreamState<T> Model<T>::initial_state() const {
    StreamState<T> s;
    s.encoder = encoder_->initial_state();
    s.tcn = tcn_->initial_cache();
    if (variant_ == Variant::Transeger) s.prev_text = Tensor<T>({config_.k, config_.d_t});
    return s;
}

template <class T>
LabelSequence Model<T>::start_window() const {
    return LabelSequence(std::vector<ClassId>(config_.k, kBackgroundClass), config_.num_classes);
}

template <class T>
ag::Var<T> Model<T>::encode_frames(const ag::Var<T>& frames, EncoderState<T>& state) const {
    return encoder_->forward(frames, state);
}

template <class T>
ag::Var<T> Model<T>::pooled_features(const ag::Var<T>& frames, EncoderState<T>& state) const {
    return ag::spatial_mean(encoder_->forward(frames, state));
}

template <class T>
ag::Var<T> Model<T>::text_features(const LabelSequence& window) const {
    if (!text_) throw UsageError("text_features: " + variant_name(variant_) + " has no text encoder");
    const LabelSequence padded = pad_labels(window, config_.k);
    return encode_text(generate_prompts(padded, class_names_), *vocab_, *text_, config_.max_tokens);
}

template <class T>
ag::Var<T> Model<T>::temporal(const ag::Var<T>& features, MemoryCache<T>& cache) const {
    return tcn_->forward(features, cache);
}

template <class T>
ag::Var<T> Model<T>::joint_net(const ag::Var<T>& prev_text, const ag::Var<T>& image, MemoryCache<T>& cache) const {
    if (prev_text.value().rank() != 2 || image.value().rank() != 2 || prev_text.dim(0) != image.dim(0) ||
        prev_text.dim(1) != config_.d_t || image.dim(1) != config_.d_i) {
        throw ShapeError("joint_net: text " + shape_str(prev_text.shape()) + " and image " +
                         shape_str(image.shape()) + " do not fit [k, d_t] / [k, d_i]");
    }
    return tcn_->forward(ag::concat_cols(downfall(prev_text), image), cache);
}

template <class T>
ChunkForward<T> Model<T>::forward(const Tensor<T>& frames, StreamState<T>& state, const LabelSequence* prompt_labels,
                                  const LabelSequence* text_labels) const {
    if (frames.rank() != 4 || frames.dim(0) != config_.k || frames.dim(1) != config_.height ||
        frames.dim(2) != config_.width || frames.dim(3) != 3) {
        throw ShapeError("chunk frames " + shape_str(frames.shape()) + " do not match config " +
                         shape_str({config_.k, config_.height, config_.width, 3}));
    }
    ChunkForward<T> out;
    out.pooled = pooled_features(ag::Var<T>::constant(frames), state.encoder);
    if (variant_ == Variant::Transeger) {
        const LabelSequence window = prompt_labels ? *prompt_labels : start_window();
        auto prev_text = text_features(window);
        state.prev_text = prev_text.value();
        state.prev_labels = pad_labels(window, config_.k);
        out.logits = joint_net(prev_text, out.pooled, state.tcn);
    } else {
        out.logits = tcn_->forward(out.pooled, state.tcn);
    }
    if (text_labels && has_contrastive_heads()) {
        out.image_proj = ag::l2_normalize_rows(ag::linear(out.pooled, img_proj_w_, img_proj_b_));
        out.text_proj = ag::l2_normalize_rows(ag::linear(text_features(*text_labels), txt_proj_w_, txt_proj_b_));
    }
    ++state.chunks_processed;
    return out;
}

template class Model<float>;
template class Model<double>;

} // namespace svtas
