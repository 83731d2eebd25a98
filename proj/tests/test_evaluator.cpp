#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clir/evaluator.hpp"
#include "ndcg_oracle.hpp"
#include "support.hpp"

using namespace clir;

namespace {

std::vector<std::string> ranking_with_gold_at(std::size_t rank) {
    std::vector<std::string> r;
    for (std::size_t i = 1; i <= 12; ++i) r.push_back(i == rank ? "gold" : "x" + std::to_string(i));
    return r;
}

const Qrels::Judgments kGold{{"gold", 1}};

}  // namespace

TEST_CASE("ndcg@10 hand-computed values") {
    CHECK(ndcg_at_k(ranking_with_gold_at(1), kGold, 10) == 1.0);
    CHECK(ndcg_at_k(ranking_with_gold_at(2), kGold, 10) == doctest::Approx(1.0 / std::log2(3.0)));
    CHECK(ndcg_at_k(ranking_with_gold_at(2), kGold, 10) == doctest::Approx(0.63093).epsilon(1e-5));
    CHECK(ndcg_at_k(ranking_with_gold_at(11), kGold, 10) == 0.0);
    CHECK(ndcg_at_k({}, kGold, 10) == 0.0);
    CHECK_THROWS_AS(ndcg_at_k({"a"}, {{"a", 0}}, 10), PreconditionError);
}

TEST_CASE("graded relevance uses gain 2^rel - 1") {
    const Qrels::Judgments j{{"a", 3}, {"b", 1}};
    // Reversed order: (1/1 + 7/log2 3) / (7/1 + 1/log2 3).
    const double want = (1.0 + 7.0 / std::log2(3.0)) / (7.0 + 1.0 / std::log2(3.0));
    CHECK(ndcg_at_k({"b", "a"}, j, 10) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ndcg is invariant to scaling the document vectors") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = oracle::random_ndcg_instance(rng);
        const auto base = run_task(inst.task, inst.queries, inst.docs);
        std::vector<float> scaled = inst.docs.values();
        for (auto& v : scaled) v *= 3.5f;
        const EmbeddingMatrix docs2(inst.docs.ids(), scaled, inst.docs.dim(), false);
        const auto again = run_task(inst.task, inst.queries, docs2);
        for (std::size_t q = 0; q < base.per_query_ndcg.size(); ++q) {
            CHECK(again.per_query_ndcg[q].second == doctest::Approx(base.per_query_ndcg[q].second).epsilon(1e-12));
        }
    }
}

TEST_CASE("planted identity: each query's gold vector equals the query gives NDCG 1") {
    std::mt19937_64 rng(9);
    std::vector<std::string> ids;
    std::vector<float> values;
    std::vector<QueryRecord> queries;
    std::vector<CorpusDoc> docs;
    for (int i = 0; i < 15; ++i) {
        const auto id = "d" + std::to_string(i);
        ids.push_back(id);
        const auto v = testing::gaussian_vector(rng, 12);
        values.insert(values.end(), v.begin(), v.end());
        queries.push_back({id, {"질문", "question"}, id});
        docs.push_back({id, {"문서", "document"}});
    }
    const EmbeddingMatrix m(ids, values, 12, false);
    const auto task = make_task("planted", parse_direction("en-ko"), queries, ParallelCorpus(docs),
                                Qrels::from_gold(queries));
    const auto r = run_task(task, m, m, 10, 3);
    CHECK(r.mean_ndcg == 1.0);
}

TEST_CASE("run_task matches the brute-force reference on random instances") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = oracle::random_ndcg_instance(rng);
        const auto got = run_task(inst.task, inst.queries, inst.docs, 10, 1 + trial % 3);
        const auto want = oracle::reference_ndcg(inst, 10);
        REQUIRE(got.per_query_ndcg.size() == want.size());
        double mean = 0.0;
        for (std::size_t q = 0; q < want.size(); ++q) {
            CHECK(std::fabs(got.per_query_ndcg[q].second - want[q]) <= 1e-9);
            mean += want[q];
        }
        CHECK(got.mean_ndcg == doctest::Approx(mean / static_cast<double>(want.size())));
    }
}

TEST_CASE("make_task requires an answerable pool") {
    const std::vector<QueryRecord> queries{{"q1", {"질문", "question"}, "missing"}};
    const ParallelCorpus corpus({{"d1", {"문서", "document"}}});
    CHECK_THROWS_WITH_AS(make_task("x", parse_direction("ko-en"), queries, corpus, Qrels::from_gold(queries)),
                         doctest::Contains("q1"), PreconditionError);
}

TEST_CASE("missing embeddings are named") {
    std::mt19937_64 rng(12);
    auto inst = oracle::random_ndcg_instance(rng);
    inst.task.queries.push_back({"ghost", ""});
    inst.task.qrels.add("ghost", inst.task.pool_doc_ids[0], 1);
    CHECK_THROWS_WITH_AS(run_task(inst.task, inst.queries, inst.docs), doctest::Contains("ghost"), PreconditionError);
}

TEST_CASE("eval results round-trip through JSON") {
    EvalResult r;
    r.dataset_name = "belebele";
    r.direction = parse_direction("ko-en");
    r.per_query_ndcg = {{"a", 1.0}, {"b", 0.5}};
    r.mean_ndcg = 0.75;
    r.model = "base";
    const auto back = eval_result_from_json(eval_result_to_json(r));
    CHECK(back.dataset_name == r.dataset_name);
    CHECK(back.direction == r.direction);
    CHECK(back.mean_ndcg == r.mean_ndcg);
    CHECK(back.model == "base");
    CHECK(back.per_query_ndcg == r.per_query_ndcg);
}
