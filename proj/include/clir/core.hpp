#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "clir/error.hpp"

namespace clir {

enum class Language : std::uint8_t { ko = 0, en = 1 };

inline constexpr std::array<Language, 2> kLanguages{Language::ko, Language::en};

std::string_view to_string(Language lang);
Language parse_language(std::string_view code);

/// Fixed two-slot container indexed by Language.
template <typename T>
class PerLang {
public:
    PerLang() = default;
    PerLang(T ko, T en) : values_{std::move(ko), std::move(en)} {}

    T& operator[](Language lang) { return values_[static_cast<std::size_t>(lang)]; }
    const T& operator[](Language lang) const { return values_[static_cast<std::size_t>(lang)]; }

    bool operator==(const PerLang&) const = default;

private:
    std::array<T, 2> values_{};
};

/// Languages of query, positive and negatives of a training set, "koenko" etc.
struct LangCombo {
    Language query_lang = Language::ko;
    Language positive_lang = Language::ko;
    Language negative_lang = Language::ko;

    std::string render() const;
    auto operator<=>(const LangCombo&) const = default;
};

LangCombo parse_combo(std::string_view text);

/// All eight combinations in the row order of the main results table.
const std::vector<LangCombo>& all_combos();

enum class ComboClass {
    mono,
    positive_negatives_match,
    query_negatives_match,
    same_query_positive,
};

ComboClass classify_combo(const LangCombo& combo);
std::string_view to_string(ComboClass cls);

/// Query language and document-pool language of a retrieval task, "en-ko" etc.
struct TaskDirection {
    Language query_lang = Language::en;
    Language doc_lang = Language::ko;

    bool is_cross() const { return query_lang != doc_lang; }
    bool is_mono() const { return !is_cross(); }
    std::string render() const;
    auto operator<=>(const TaskDirection&) const = default;
};

TaskDirection parse_direction(std::string_view text);

/// en-ko, ko-en, ko-ko, en-en: cross directions first, then mono.
const std::vector<TaskDirection>& all_directions();

using TextByLang = PerLang<std::string>;

struct Triple {
    std::string id;
    TextByLang query;
    TextByLang positive;
    TextByLang synthetic_negative;
    std::map<std::string, std::string> metadata;

    bool operator==(const Triple&) const = default;
};

/// Throws PreconditionError if any of the six texts is empty.
void validate_triple(const Triple& triple);

inline constexpr std::size_t kTargetNegatives = 6;

struct TrainingExample {
    std::string anchor;
    std::string positive;
    std::vector<std::string> negatives;
    LangCombo combo;
    std::string source_triple_id;
    // kTargetNegatives - negatives.size(), clamped at zero.
    std::size_t shortfall = 0;

    bool operator==(const TrainingExample&) const = default;
};

/// NDCG in percent. Full precision is kept; rounding happens in display().
class Score {
public:
    Score() = default;
    explicit Score(double value);

    static Score from_fraction(double ndcg) { return Score(ndcg * 100.0); }

    double value() const { return value_; }
    std::string display() const;

    auto operator<=>(const Score&) const = default;

private:
    double value_ = 0.0;
};

/// Two decimals, ties rounded up after absorbing binary noise (85.805 -> "85.81").
std::string format_2dp(double value);

}  // namespace clir
