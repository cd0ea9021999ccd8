#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "svtas/data_model.hpp"

namespace svtas {

// Number of learnable context tokens in front of the class name.
inline constexpr std::size_t kContextSlots = 8;

// One frame's prompt, assembled as [ordinal, duration, position, category].
struct FramePrompt {
    std::string ordinal_text;  // "Secondly"
    std::string duration_text; // "this action lasted 4 frames in current window"
    std::string position_text; // "this is frame 2 of the action"
    ClassId class_id = 0;      // filled after the context slots
    std::string class_name;

    friend bool operator==(const FramePrompt&, const FramePrompt&) = default;
};

struct PromptSequence {
    std::vector<FramePrompt> prompts;
    std::size_t size() const { return prompts.size(); }
};

// "Firstly" .. "Tenthly", then "11thly", "12thly", ...
std::string ordinal_word(std::size_t ordinal);

// Class names are single vocabulary words; spaces become underscores.
std::string normalize_class_name(const std::string& name);

// Prompts for every frame of a window. Segments are the maximal runs of the
// window; frame i in the o-th run S_o gets ordinal o, duration len(S_o) and
// 1-based position inside S_o.
PromptSequence generate_prompts(const LabelSequence& labels, std::span<const std::string> class_names);

// Pads (with background) or truncates to exactly k frames.
LabelSequence pad_labels(const LabelSequence& labels, std::size_t k);

// Parts joined by ", "; context slots rendered as <slot0> .. <slot7>.
std::string render_prompt(const FramePrompt& prompt);

// Closed word-level vocabulary: specials, context slots, punctuation,
// template words, ordinal words, digits, then one token per class.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kSos = 1;
    static constexpr int kEos = 2;
    static constexpr int kFirstSlot = 3;

    // VocabularyError for an empty, duplicated or reserved class name.
    explicit Vocabulary(std::span<const std::string> class_names);

    std::size_t size() const { return tokens_.size(); }
    std::size_t num_classes() const { return num_classes_; }
    int id(const std::string& token) const;
    const std::string& token(int id) const;
    int class_token(ClassId cls) const;
    bool is_slot(int id) const { return id >= kFirstSlot && id < kFirstSlot + int(kContextSlots); }

    nlohmann::json to_json() const { return tokens_; }
    // Rebuilds from a serialized token list; the list must match what the
    // class names in it would produce.
    static Vocabulary from_json(const nlohmann::json& j);

private:
    std::vector<std::string> tokens_;
    std::size_t class_base_ = 0;
    std::size_t num_classes_ = 0;
};

struct TokenizedPrompt {
    std::vector<int> ids; // exactly max_tokens, padded with kPad
    std::size_t length = 0; // tokens up to and including kEos
};

// [sos] ordinal , duration , position , slot0..slot7 class [eos] [pad]...
// VocabularyError for words outside the vocabulary or prompts longer than max_tokens.
TokenizedPrompt tokenize(const FramePrompt& prompt, const Vocabulary& vocab, std::size_t max_tokens);

// Reassembles the rendered prompt text, dropping specials.
std::string detokenize(std::span<const int> ids, const Vocabulary& vocab);

} // namespace svtas
