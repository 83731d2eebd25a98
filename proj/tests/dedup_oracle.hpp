#pragma once

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <string>
#include <vector>

// Brute-force references for min-hash dedup over ASCII text.
namespace oracle {

inline std::set<std::string> ascii_shingles(const std::string& text, std::size_t width) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.size() < width) return {lower};
    std::set<std::string> out;
    for (std::size_t i = 0; i + width <= lower.size(); ++i) out.insert(lower.substr(i, width));
    return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    for (const auto& s : a) inter += b.count(s);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// First-wins scan: text i is a duplicate of the earliest kept text whose Jaccard reaches the threshold.
inline std::vector<bool> exact_keep(const std::vector<std::set<std::string>>& sets, double threshold) {
    std::vector<bool> kept(sets.size(), true);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (kept[j] && jaccard(sets[i], sets[j]) >= threshold) {
                kept[i] = false;
                break;
            }
        }
    }
    return kept;
}

inline const std::vector<std::string>& vocab() {
    static const std::vector<std::string> words{
        "french", "pronunciation", "rules", "grammar", "history", "election", "president", "system",
        "river", "mountain", "climate", "economy", "market", "energy", "solar", "battery",
        "museum", "painting", "music", "opera", "football", "league", "coach", "season",
        "protein", "enzyme", "cell", "virus", "vaccine", "doctor", "hospital", "law",
        "court", "judge", "contract", "tax", "budget", "school", "student", "teacher",
        "novel", "poem", "author", "library", "bridge", "tunnel", "railway", "airport"};
    return words;
}

inline std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> pick(0, vocab().size() - 1);
    std::vector<std::string> out(n);
    for (auto& w : out) w = vocab()[pick(rng)];
    return out;
}

inline std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
    return s;
}

/// Replaces `edits` random word positions.
inline std::vector<std::string> perturb(std::mt19937_64& rng, std::vector<std::string> words, std::size_t edits) {
    std::uniform_int_distribution<std::size_t> pos(0, words.size() - 1), pick(0, vocab().size() - 1);
    for (std::size_t e = 0; e < edits; ++e) words[pos(rng)] = vocab()[pick(rng)];
    return words;
}

}  // namespace oracle
