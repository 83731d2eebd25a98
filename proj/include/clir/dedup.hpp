#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clir/core.hpp"

namespace clir {

struct DedupConfig {
    std::size_t num_perms = 128;
    std::size_t shingle = 5;   // character n-gram width, in code points
    double threshold = 0.8;    // estimated Jaccard at or above which a triple is a duplicate
    std::uint64_t seed = 42;
    std::size_t band_rows = 4; // LSH rows per band; 128 perms -> 32 bands

    void validate() const;
};

struct MinHashSignature {
    std::vector<std::uint64_t> values;
    bool operator==(const MinHashSignature&) const = default;
};

/// NFC-normalized, lowercased code points.
std::u32string normalize_text(std::string_view utf8);

/// Distinct character n-grams of the normalized text. Texts shorter than the
/// width yield a single shingle holding the whole text.
std::vector<std::u32string> shingle_set(std::string_view utf8, std::size_t width);

class MinHasher {
public:
    explicit MinHasher(const DedupConfig& cfg);

    MinHashSignature signature(std::string_view text) const;
    const DedupConfig& config() const { return cfg_; }

private:
    DedupConfig cfg_;
    std::vector<std::uint64_t> mul_;
    std::vector<std::uint64_t> add_;
};

MinHashSignature signature(std::string_view text, const DedupConfig& cfg);

/// Fraction of positions where the two signatures agree.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Per-text outcome of a first-wins scan: kept, or duplicate of an earlier kept index.
struct DedupDecision {
    bool kept = true;
    std::size_t duplicate_of = 0;
    double estimate = 0.0;
};

/// Sequential first-wins dedup over precomputed signatures.
std::vector<DedupDecision> dedup_signatures(const std::vector<MinHashSignature>& sigs, const DedupConfig& cfg);

struct DroppedTriple {
    std::string id;
    std::string duplicate_of;
    double estimate = 0.0;
};

struct DedupResult {
    std::vector<Triple> kept;
    std::vector<DroppedTriple> dropped;
};

/// Min-hash dedup keyed on each triple's English query.
DedupResult dedup_triples(const std::vector<Triple>& triples, const DedupConfig& cfg,
                          std::size_t parallelism = 1);

}  // namespace clir
