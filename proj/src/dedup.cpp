#include "clir/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <unicode/normalizer2.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "clir/parallel.hpp"

namespace clir {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t hash_shingle(std::u32string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char32_t c : s) {
        for (int shift = 0; shift < 32; shift += 8) {
            h ^= (static_cast<std::uint32_t>(c) >> shift) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    return mix64(h);
}

std::uint64_t mod_mersenne61(unsigned __int128 x) {
    std::uint64_t r = static_cast<std::uint64_t>(x & kMersenne61) + static_cast<std::uint64_t>(x >> 61);
    r = (r & kMersenne61) + (r >> 61);
    return r >= kMersenne61 ? r - kMersenne61 : r;
}

template <typename Visit>
void for_each_shingle(const std::u32string& text, std::size_t width, Visit&& visit) {
    if (text.size() <= width) {
        visit(std::u32string_view(text));
        return;
    }
    for (std::size_t i = 0; i + width <= text.size(); ++i) visit(std::u32string_view(text).substr(i, width));
}

}  // namespace

void DedupConfig::validate() const {
    if (num_perms < 16) throw PreconditionError("dedup: num_perms must be at least 16");
    if (shingle < 1) throw PreconditionError("dedup: shingle width must be positive");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw PreconditionError("dedup: threshold must lie in (0, 1]");
    if (band_rows < 1 || band_rows > num_perms) throw PreconditionError("dedup: band_rows must lie in [1, num_perms]");
}

std::u32string normalize_text(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    text = nfc->normalize(text, status);
    text.toLower(icu::Locale::getRoot());
    text = nfc->normalize(text, status);
    if (U_FAILURE(status)) throw PreconditionError("text could not be NFC-normalized");

    std::u32string out;
    out.reserve(static_cast<std::size_t>(text.length()));
    for (int32_t i = 0; i < text.length(); i = text.moveIndex32(i, 1)) {
        out.push_back(static_cast<char32_t>(text.char32At(i)));
    }
    return out;
}

std::vector<std::u32string> shingle_set(std::string_view utf8, std::size_t width) {
    const auto text = normalize_text(utf8);
    std::vector<std::u32string> out;
    for_each_shingle(text, width, [&](std::u32string_view s) { out.emplace_back(s); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MinHasher::MinHasher(const DedupConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    // Raw engine draws (not std distributions) keep signatures identical across standard libraries.
    std::mt19937_64 gen(cfg_.seed);
    mul_.resize(cfg_.num_perms);
    add_.resize(cfg_.num_perms);
    for (std::size_t i = 0; i < cfg_.num_perms; ++i) {
        mul_[i] = 1 + gen() % (kMersenne61 - 1);
        add_[i] = gen() % kMersenne61;
    }
}

MinHashSignature MinHasher::signature(std::string_view text) const {
    const auto normalized = normalize_text(text);
    if (normalized.empty()) throw PreconditionError("min-hash signature of empty text");
    std::unordered_set<std::uint64_t> hashes;
    for_each_shingle(normalized, cfg_.shingle,
                     [&](std::u32string_view s) { hashes.insert(mod_mersenne61(hash_shingle(s))); });

    MinHashSignature sig{std::vector<std::uint64_t>(cfg_.num_perms, kMersenne61)};
    for (const auto h : hashes) {
        for (std::size_t i = 0; i < cfg_.num_perms; ++i) {
            const auto v = mod_mersenne61(static_cast<unsigned __int128>(mul_[i]) * h + add_[i]);
            sig.values[i] = std::min(sig.values[i], v);
        }
    }
    return sig;
}

MinHashSignature signature(std::string_view text, const DedupConfig& cfg) { return MinHasher(cfg).signature(text); }

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.values.empty()) {
        throw PreconditionError("signatures differ in length");
    }
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) same += a.values[i] == b.values[i];
    return static_cast<double>(same) / static_cast<double>(a.values.size());
}

std::vector<DedupDecision> dedup_signatures(const std::vector<MinHashSignature>& sigs, const DedupConfig& cfg) {
    cfg.validate();
    const std::size_t perms = cfg.num_perms;
    const std::size_t bands = perms / cfg.band_rows;
    // A pair at or above the threshold differs in at most this many positions. While that is
    // fewer than the band count some band matches in full, so banding cannot miss it.
    const auto max_mismatch = static_cast<std::size_t>(std::floor((1.0 - cfg.threshold) * static_cast<double>(perms) + 1e-9));
    const bool banding_is_exact = max_mismatch < bands;

    std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets(bands);
    std::vector<std::size_t> kept_indices;
    std::vector<DedupDecision> decisions(sigs.size());
    std::vector<std::size_t> candidates;

    const auto band_key = [&](const MinHashSignature& s, std::size_t band) {
        std::uint64_t h = band;
        for (std::size_t r = 0; r < cfg.band_rows; ++r) h = mix64(h ^ s.values[band * cfg.band_rows + r]);
        return h;
    };

    for (std::size_t i = 0; i < sigs.size(); ++i) {
        if (sigs[i].values.size() != perms) throw PreconditionError("signature length differs from num_perms");
        candidates.clear();
        if (banding_is_exact) {
            for (std::size_t b = 0; b < bands; ++b) {
                const auto it = buckets[b].find(band_key(sigs[i], b));
                if (it != buckets[b].end()) candidates.insert(candidates.end(), it->second.begin(), it->second.end());
            }
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        } else {
            candidates = kept_indices;
        }

        auto& d = decisions[i];
        for (const auto c : candidates) {
            const double est = estimate_jaccard(sigs[i], sigs[c]);
            if (est >= cfg.threshold) {
                d = {false, c, est};
                break;
            }
        }
        if (d.kept) {
            kept_indices.push_back(i);
            if (banding_is_exact) {
                for (std::size_t b = 0; b < bands; ++b) buckets[b][band_key(sigs[i], b)].push_back(i);
            }
        }
    }
    return decisions;
}

DedupResult dedup_triples(const std::vector<Triple>& triples, const DedupConfig& cfg, std::size_t parallelism) {
    const MinHasher hasher(cfg);
    std::vector<MinHashSignature> sigs(triples.size());
    parallel_for(triples.size(), parallelism,
                 [&](std::size_t i) { sigs[i] = hasher.signature(triples[i].query[Language::en]); });

    const auto decisions = dedup_signatures(sigs, cfg);
    DedupResult out;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (decisions[i].kept) {
            out.kept.push_back(triples[i]);
        } else {
            out.dropped.push_back({triples[i].id, triples[decisions[i].duplicate_of].id, decisions[i].estimate});
        }
    }
    return out;
}

}  // namespace clir
