#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clir/ingest.hpp"
#include "support.hpp"

using namespace clir;

namespace {

json french_record() {
    return {
        {"id", "fr-001"},
        {"user_query (kor)", "프랑스어의 발음 규칙은 어떻게 되나요?"},
        {"user_query (eng)", "What are the pronunciation rules in French?"},
        {"positive_document (kor)", "프랑스어의 발음 규칙은 비교적 명확하고 체계적입니다."},
        {"positive_document (eng)", "The pronunciation rules of French are relatively clear and systematic."},
        {"hard_negative_document (kor)", "프랑스어는 다양한 지역에서 사용되며 각 지역마다 고유한 방언이 존재합니다."},
        {"hard_negative_document (eng)", "French verb conjugation has a complex structure."},
        {"kdc", "700"},
    };
}

}  // namespace

TEST_CASE("triple reader parses the French pronunciation record") {
    testing::TempDir dir;
    write_file(dir / "t.jsonl", french_record().dump() + "\n");
    const auto triples = read_triples(dir / "t.jsonl");
    REQUIRE(triples.size() == 1);
    CHECK(triples[0].id == "fr-001");
    CHECK(triples[0].query[Language::ko].starts_with("프랑스어의 발음"));
    CHECK(triples[0].positive[Language::en].starts_with("The pronunciation rules of French"));
    CHECK(triples[0].metadata.at("kdc") == "700");
}

TEST_CASE("triple reader names a missing field and its line") {
    testing::TempDir dir;
    auto bad = french_record();
    bad.erase("positive_document (eng)");
    write_file(dir / "t.jsonl", french_record().dump() + "\n" + bad.dump() + "\n");
    try {
        read_triples(dir / "t.jsonl");
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("positive_document (eng)") != std::string::npos);
        CHECK(msg.find(":2:") != std::string::npos);
    }
}

TEST_CASE("empty triple file yields no triples") {
    testing::TempDir dir;
    write_file(dir / "t.jsonl", "");
    CHECK(read_triples(dir / "t.jsonl").empty());
    write_file(dir / "blank.jsonl", "\n\n");
    CHECK(read_triples(dir / "blank.jsonl").empty());
}

TEST_CASE("triples without ids get their line number; duplicate ids are rejected") {
    testing::TempDir dir;
    auto a = french_record();
    a.erase("id");
    write_file(dir / "t.jsonl", a.dump() + "\n" + a.dump() + "\n");
    const auto triples = read_triples(dir / "t.jsonl");
    REQUIRE(triples.size() == 2);
    CHECK(triples[0].id == "1");
    CHECK(triples[1].id == "2");

    const auto b = french_record();
    write_file(dir / "dup.jsonl", b.dump() + "\n" + b.dump() + "\n");
    CHECK_THROWS_AS(read_triples(dir / "dup.jsonl"), DataError);
}

TEST_CASE("invalid JSON reports path and line") {
    testing::TempDir dir;
    write_file(dir / "t.jsonl", french_record().dump() + "\n{not json\n");
    CHECK_THROWS_WITH_AS(read_triples(dir / "t.jsonl"), doctest::Contains(":2:"), FormatError);
}

TEST_CASE("triples round-trip through JSONL") {
    testing::TempDir dir;
    std::vector<Triple> triples{testing::make_triple("a", "alpha"), testing::make_triple("b", "beta")};
    triples[1].metadata["source"] = "synthetic";
    write_triples(dir / "t.jsonl", triples);
    CHECK(read_triples(dir / "t.jsonl") == triples);
}

TEST_CASE("corpus and queries") {
    testing::TempDir dir;
    const std::vector<Triple> triples{testing::make_triple("a", "alpha"), testing::make_triple("b", "beta")};
    const auto corpus = corpus_from_triples(triples);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.find("b")->texts[Language::en] == "answer document on beta");
    CHECK(corpus.find("zzz") == nullptr);
    CHECK(corpus.texts(Language::ko).at("a") == "alpha 정답 문서");

    write_corpus(dir / "c.jsonl", corpus);
    const auto back = read_corpus(dir / "c.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back.docs()[1].texts == corpus.docs()[1].texts);

    write_file(dir / "q.jsonl",
               R"({"query_id":"q1","text_ko":"질문","text_en":"question","gold_doc_id":"a"})"
               "\n");
    const auto queries = read_queries(dir / "q.jsonl");
    REQUIRE(queries.size() == 1);
    CHECK(queries[0].gold_doc_id == "a");
    CHECK(Qrels::from_gold(queries).find("q1")->at("a") == 1);
}

TEST_CASE("qrels read, write and validate") {
    testing::TempDir dir;
    write_file(dir / "q.tsv", "q1 0 d1 2\nq1 0 d2 0\nq2\t0\td3\t1\n");
    const auto qrels = read_qrels(dir / "q.tsv");
    CHECK(qrels.find("q1")->at("d1") == 2);
    CHECK(qrels.find("q2")->at("d3") == 1);
    CHECK_NOTHROW(qrels.validate());

    write_qrels(dir / "out.tsv", qrels);
    CHECK(read_qrels(dir / "out.tsv").entries() == qrels.entries());

    write_file(dir / "zero.tsv", "q1 0 d1 0\n");
    CHECK_THROWS_AS(read_qrels(dir / "zero.tsv"), FormatError);
    write_file(dir / "bad.tsv", "q1 0 d1 x\n");
    CHECK_THROWS_AS(read_qrels(dir / "bad.tsv"), FormatError);
}
