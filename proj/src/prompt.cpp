#include "svtas/prompt.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "svtas/errors.hpp"

namespace svtas {

namespace {

constexpr std::array<const char*, 10> kOrdinals = {
    "Firstly", "Secondly", "Thirdly", "Fourthly", "Fifthly",
    "Sixthly", "Seventhly", "Eighthly", "Ninthly", "Tenthly",
};

constexpr std::array<const char*, 11> kTemplateWords = {
    "this", "action", "lasted", "frames", "in", "current", "window", "is", "frame", "of", "the",
};

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> words;
    for (std::string w; is >> w;) words.push_back(w);
    return words;
}

} // namespace

std::string ordinal_word(std::size_t ordinal) {
    if (ordinal >= 1 && ordinal <= kOrdinals.size()) return kOrdinals[ordinal - 1];
    return std::to_string(ordinal) + "thly";
}

std::string normalize_class_name(const std::string& name) {
    std::string out = name;
    std::replace(out.begin(), out.end(), ' ', '_');
    return out;
}

PromptSequence generate_prompts(const LabelSequence& labels, std::span<const std::string> class_names) {
    if (class_names.size() < labels.num_classes()) {
        throw VocabularyError("generate_prompts: " + std::to_string(class_names.size()) +
                              " class names for " + std::to_string(labels.num_classes()) + " classes");
    }
    PromptSequence seq;
    seq.prompts.reserve(labels.size());
    const SegmentList segments = run_length_encode(labels);
    for (std::size_t o = 0; o < segments.size(); ++o) {
        const auto& seg = segments[o];
        for (std::size_t i = seg.start; i < seg.end; ++i) {
            FramePrompt p;
            p.ordinal_text = ordinal_word(o + 1);
            p.duration_text = "this action lasted " + std::to_string(seg.length()) + " frames in current window";
            p.position_text = "this is frame " + std::to_string(i - seg.start + 1) + " of the action";
            p.class_id = seg.class_id;
            p.class_name = normalize_class_name(class_names[std::size_t(seg.class_id)]);
            seq.prompts.push_back(std::move(p));
        }
    }
    return seq;
}

LabelSequence pad_labels(const LabelSequence& labels, std::size_t k) {
    std::vector<ClassId> v(labels.begin(), labels.end());
    v.resize(k, kBackgroundClass);
    return LabelSequence(std::move(v), labels.num_classes());
}

std::string render_prompt(const FramePrompt& prompt) {
    std::string out = prompt.ordinal_text + ", " + prompt.duration_text + ", " + prompt.position_text + ",";
    for (std::size_t s = 0; s < kContextSlots; ++s) out += " <slot" + std::to_string(s) + ">";
    out += " " + prompt.class_name;
    return out;
}

Vocabulary::Vocabulary(std::span<const std::string> class_names) {
    if (class_names.empty()) throw VocabularyError("vocabulary needs at least one class name");
    tokens_ = {"<pad>", "<sos>", "<eos>"};
    for (std::size_t s = 0; s < kContextSlots; ++s) tokens_.push_back("<slot" + std::to_string(s) + ">");
    tokens_.push_back(",");
    for (const char* w : kTemplateWords) tokens_.push_back(w);
    for (const char* w : kOrdinals) tokens_.push_back(w);
    tokens_.push_back("thly");
    for (char d = '0'; d <= '9'; ++d) tokens_.push_back(std::string(1, d));
    class_base_ = tokens_.size();
    for (const auto& raw : class_names) {
        const std::string name = normalize_class_name(raw);
        if (name.empty()) throw VocabularyError("empty class name");
        if (std::find(tokens_.begin(), tokens_.end(), name) != tokens_.end()) {
            throw VocabularyError("class name '" + name + "' collides with another vocabulary token");
        }
        tokens_.push_back(name);
    }
    num_classes_ = class_names.size();
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw VocabularyError("vocabulary must be a JSON list");
    std::vector<std::string> tokens = j.get<std::vector<std::string>>();
    const std::size_t base = 3 + kContextSlots + 1 + kTemplateWords.size() + kOrdinals.size() + 1 + 10;
    if (tokens.size() <= base) throw VocabularyError("vocabulary list has no class tokens");
    Vocabulary v(std::vector<std::string>(tokens.begin() + long(base), tokens.end()));
    if (v.tokens_ != tokens) throw VocabularyError("vocabulary list does not match the fixed token layout");
    return v;
}

int Vocabulary::id(const std::string& token) const {
    auto it = std::find(tokens_.begin(), tokens_.end(), token);
    if (it == tokens_.end()) throw VocabularyError("word '" + token + "' is not in the vocabulary");
    return int(it - tokens_.begin());
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || std::size_t(id) >= tokens_.size()) {
        throw VocabularyError("token id " + std::to_string(id) + " out of range");
    }
    return tokens_[std::size_t(id)];
}

int Vocabulary::class_token(ClassId cls) const {
    if (cls < 0 || std::size_t(cls) >= num_classes_) {
        throw VocabularyError("class id " + std::to_string(cls) + " has no vocabulary token");
    }
    return int(class_base_) + cls;
}

namespace {

void append_text(const std::string& text, const Vocabulary& vocab, std::vector<int>& ids) {
    for (const auto& word : split_words(text)) {
        if (all_digits(word)) {
            for (char d : word) ids.push_back(vocab.id(std::string(1, d)));
        } else if (word.size() > 4 && word.ends_with("thly") && all_digits(word.substr(0, word.size() - 4))) {
            for (char d : word.substr(0, word.size() - 4)) ids.push_back(vocab.id(std::string(1, d)));
            ids.push_back(vocab.id("thly"));
        } else {
            ids.push_back(vocab.id(word));
        }
    }
}

} // namespace

TokenizedPrompt tokenize(const FramePrompt& prompt, const Vocabulary& vocab, std::size_t max_tokens) {
    std::vector<int> ids{Vocabulary::kSos};
    const int comma = vocab.id(",");
    append_text(prompt.ordinal_text, vocab, ids);
    ids.push_back(comma);
    append_text(prompt.duration_text, vocab, ids);
    ids.push_back(comma);
    append_text(prompt.position_text, vocab, ids);
    ids.push_back(comma);
    for (std::size_t s = 0; s < kContextSlots; ++s) ids.push_back(Vocabulary::kFirstSlot + int(s));
    ids.push_back(vocab.class_token(prompt.class_id));
    ids.push_back(Vocabulary::kEos);
    if (ids.size() > max_tokens) {
        throw VocabularyError("prompt needs " + std::to_string(ids.size()) + " tokens, max_tokens is " +
                              std::to_string(max_tokens));
    }
    TokenizedPrompt out;
    out.length = ids.size();
    ids.resize(max_tokens, Vocabulary::kPad);
    out.ids = std::move(ids);
    return out;
}

std::string detokenize(std::span<const int> ids, const Vocabulary& vocab) {
    std::string out;
    bool prev_digit = false;
    for (int id : ids) {
        if (id == Vocabulary::kPad || id == Vocabulary::kSos || id == Vocabulary::kEos) continue;
        const std::string& tok = vocab.token(id);
        const bool digit = tok.size() == 1 && std::isdigit(static_cast<unsigned char>(tok[0]));
        const bool glue = tok == "," || (prev_digit && (digit || tok == "thly"));
        if (!out.empty() && !glue) out += ' ';
        out += tok;
        prev_digit = digit;
    }
    return out;
}

} // namespace svtas
