#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clir/dedup.hpp"
#include "dedup_oracle.hpp"
#include "support.hpp"

using namespace clir;

TEST_CASE("identical texts estimate Jaccard 1.0") {
    const DedupConfig cfg;
    const auto a = signature("What are the pronunciation rules in French?", cfg);
    CHECK(estimate_jaccard(a, a) == 1.0);
    CHECK(a.values.size() == 128);
}

TEST_CASE("normalization folds case and canonical equivalence") {
    CHECK(normalize_text("ABC") == U"abc");
    CHECK(normalize_text("café") == normalize_text("café"));
    CHECK(normalize_text("한국어") == U"한국어");
    const DedupConfig cfg;
    CHECK(signature("Café Society", cfg) == signature("café society", cfg));
}

TEST_CASE("shingles are counted in code points") {
    const auto s = shingle_set("프랑스어의 발음", 5);
    CHECK(s.size() == 4);  // 8 code points -> 4 windows of 5
    const auto short_text = shingle_set("abc", 5);
    REQUIRE(short_text.size() == 1);
    CHECK(short_text[0] == U"abc");
    CHECK(shingle_set("aaaaaaa", 5).size() == 1);
}

TEST_CASE("config validation") {
    DedupConfig cfg;
    cfg.num_perms = 8;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg = {};
    cfg.threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg = {};
    cfg.shingle = 0;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg = {};
    cfg.band_rows = 0;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("estimate tracks exact shingle Jaccard within 0.15 for at least 99% of pairs") {
    std::mt19937_64 rng(2024);
    const DedupConfig cfg;
    const MinHasher hasher(cfg);
    std::size_t within = 0;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto words = oracle::random_words(rng, 12);
        const auto other = oracle::perturb(rng, words, t % 13);
        const auto a = oracle::join(words), b = oracle::join(other);
        const double exact = oracle::jaccard(oracle::ascii_shingles(a, 5), oracle::ascii_shingles(b, 5));
        const double est = estimate_jaccard(hasher.signature(a), hasher.signature(b));
        within += std::fabs(est - exact) <= 0.15;
    }
    CHECK(static_cast<double>(within) / trials >= 0.99);
}

TEST_CASE("banded scan agrees with an exhaustive first-wins scan") {
    std::mt19937_64 rng(5);
    for (const double threshold : {0.5, 0.8, 0.95}) {
        DedupConfig cfg;
        cfg.threshold = threshold;
        const MinHasher hasher(cfg);
        std::vector<MinHashSignature> sigs;
        for (int i = 0; i < 150; ++i) {
            auto words = oracle::random_words(rng, 10);
            if (i > 0 && i % 3 == 0) words = oracle::perturb(rng, oracle::random_words(rng, 10), 0);
            sigs.push_back(hasher.signature(oracle::join(words)));
            if (i % 5 == 0) sigs.push_back(sigs.back());
        }
        const auto decisions = dedup_signatures(sigs, cfg);
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < sigs.size(); ++i) {
            std::optional<std::size_t> dup;
            for (const auto k : kept) {
                if (estimate_jaccard(sigs[i], sigs[k]) >= threshold) {
                    dup = k;
                    break;
                }
            }
            CHECK(decisions[i].kept == !dup.has_value());
            if (dup) CHECK(decisions[i].duplicate_of == *dup);
            if (!dup) kept.push_back(i);
        }
    }
}

TEST_CASE("byte-identical English queries: the second is dropped") {
    auto a = testing::make_triple("t1", "alpha");
    auto b = testing::make_triple("t2", "beta");
    b.query[Language::en] = a.query[Language::en];
    const auto result = dedup_triples({a, b}, DedupConfig{});
    REQUIRE(result.kept.size() == 1);
    CHECK(result.kept[0].id == "t1");
    REQUIRE(result.dropped.size() == 1);
    CHECK(result.dropped[0].id == "t2");
    CHECK(result.dropped[0].duplicate_of == "t1");
    CHECK(result.dropped[0].estimate == 1.0);
}

TEST_CASE("disjoint vocabulary queries are both kept") {
    auto a = testing::make_triple("t1", "x");
    auto b = testing::make_triple("t2", "y");
    a.query[Language::en] = "How do volcanoes erupt underground?";
    b.query[Language::en] = "Which football league pays coaches best?";
    CHECK(dedup_triples({a, b}, DedupConfig{}).kept.size() == 2);
}

TEST_CASE("dedup is idempotent, deterministic and independent of parallelism") {
    std::mt19937_64 rng(99);
    std::vector<Triple> triples;
    for (int i = 0; i < 120; ++i) {
        auto t = testing::make_triple("t" + std::to_string(i), std::to_string(i));
        const auto words = oracle::random_words(rng, 9);
        t.query[Language::en] = oracle::join(i % 4 == 3 ? oracle::perturb(rng, words, 1) : words);
        triples.push_back(t);
        if (i % 7 == 0) {
            auto copy = t;
            copy.id += "-copy";
            triples.push_back(copy);
        }
    }
    const DedupConfig cfg;
    const auto once = dedup_triples(triples, cfg, 1);
    const auto twice = dedup_triples(once.kept, cfg, 1);
    CHECK(twice.kept == once.kept);
    CHECK(twice.dropped.empty());
    const auto parallel = dedup_triples(triples, cfg, 4);
    CHECK(parallel.kept == once.kept);
    CHECK(parallel.dropped.size() == once.dropped.size());
    for (const auto& d : once.dropped) {
        if (d.id.ends_with("-copy")) CHECK(d.estimate == 1.0);
    }
}
