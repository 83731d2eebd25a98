#include "clir/core.hpp"

#include <cmath>
#include <cstdio>

namespace clir {

std::string_view to_string(Language lang) {
    return lang == Language::ko ? "ko" : "en";
}

Language parse_language(std::string_view code) {
    if (code == "ko") return Language::ko;
    if (code == "en") return Language::en;
    throw ParseError("unknown language code '" + std::string(code) + "' (expected ko or en)");
}

std::string LangCombo::render() const {
    std::string out;
    out.reserve(6);
    out += to_string(query_lang);
    out += to_string(positive_lang);
    out += to_string(negative_lang);
    return out;
}

LangCombo parse_combo(std::string_view text) {
    if (text.size() != 6) {
        throw ParseError("language combination '" + std::string(text) +
                         "' must be 6 characters (three 2-letter codes), got " +
                         std::to_string(text.size()));
    }
    static constexpr std::array<const char*, 3> kSlots{"query", "positive", "negative"};
    std::array<Language, 3> langs{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto segment = text.substr(i * 2, 2);
        try {
            langs[i] = parse_language(segment);
        } catch (const ParseError&) {
            throw ParseError("language combination '" + std::string(text) + "': " + kSlots[i] +
                             " segment '" + std::string(segment) + "' is not ko or en");
        }
    }
    return LangCombo{langs[0], langs[1], langs[2]};
}

const std::vector<LangCombo>& all_combos() {
    using L = Language;
    static const std::vector<LangCombo> combos{
        {L::ko, L::ko, L::ko}, {L::ko, L::ko, L::en}, {L::ko, L::en, L::ko}, {L::ko, L::en, L::en},
        {L::en, L::en, L::en}, {L::en, L::en, L::ko}, {L::en, L::ko, L::en}, {L::en, L::ko, L::ko},
    };
    return combos;
}

ComboClass classify_combo(const LangCombo& c) {
    if (c.query_lang == c.positive_lang) {
        return c.positive_lang == c.negative_lang ? ComboClass::mono : ComboClass::same_query_positive;
    }
    return c.positive_lang == c.negative_lang ? ComboClass::positive_negatives_match
                                              : ComboClass::query_negatives_match;
}

std::string_view to_string(ComboClass cls) {
    switch (cls) {
        case ComboClass::mono: return "mono";
        case ComboClass::positive_negatives_match: return "positive_negatives_match";
        case ComboClass::query_negatives_match: return "query_negatives_match";
        case ComboClass::same_query_positive: return "same_query_positive";
    }
    return "?";
}

std::string TaskDirection::render() const {
    std::string out(to_string(query_lang));
    out += '-';
    out += to_string(doc_lang);
    return out;
}

TaskDirection parse_direction(std::string_view text) {
    if (text.size() != 5 || text[2] != '-') {
        throw ParseError("task direction '" + std::string(text) + "' must look like en-ko");
    }
    return TaskDirection{parse_language(text.substr(0, 2)), parse_language(text.substr(3, 2))};
}

const std::vector<TaskDirection>& all_directions() {
    using L = Language;
    static const std::vector<TaskDirection> directions{
        {L::en, L::ko}, {L::ko, L::en}, {L::ko, L::ko}, {L::en, L::en}};
    return directions;
}

void validate_triple(const Triple& t) {
    const std::array<std::pair<const char*, const TextByLang*>, 3> fields{
        {{"query", &t.query}, {"positive", &t.positive}, {"synthetic_negative", &t.synthetic_negative}}};
    for (const auto& [name, texts] : fields) {
        for (const auto lang : kLanguages) {
            if ((*texts)[lang].empty()) {
                throw PreconditionError("triple '" + t.id + "': " + name + "." +
                                        std::string(to_string(lang)) + " is empty");
            }
        }
    }
}

Score::Score(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 100.0)) {
        throw PreconditionError("score " + std::to_string(value) + " outside [0, 100]");
    }
}

std::string Score::display() const { return format_2dp(value_); }

std::string format_2dp(double value) {
    const double magnitude = std::floor(std::fabs(value) * 100.0 + 0.5 + 1e-7);
    const bool negative = value < 0.0 && magnitude > 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.0f.%02d", negative ? "-" : "",
                  std::floor(magnitude / 100.0), static_cast<int>(std::fmod(magnitude, 100.0)));
    return buf;
}

}  // namespace clir
