#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clir/core.hpp"
#include "clir/ingest.hpp"

namespace clir {

struct EvalQuery {
    std::string query_id;
    std::string text;
};

/// One dataset evaluated in one direction: queries in direction.query_lang
/// against the whole pool in direction.doc_lang.
struct EvalTask {
    std::string dataset_name;
    TaskDirection direction;
    std::vector<EvalQuery> queries;
    std::vector<std::string> pool_doc_ids;
    Qrels qrels;
};

/// Every query must have a relevant document (relevance >= 1) inside the pool.
EvalTask make_task(std::string dataset_name, TaskDirection direction, const std::vector<QueryRecord>& queries,
                   const ParallelCorpus& corpus, const Qrels& qrels);

/// Graded NDCG@k with gain 2^rel - 1 and discount log2(rank + 1).
/// Documents missing from `judgments` have relevance 0.
double ndcg_at_k(const std::vector<std::string>& ranked, const Qrels::Judgments& judgments, std::size_t k);

struct EvalResult {
    std::string dataset_name;
    TaskDirection direction;
    std::size_t k = 10;
    std::vector<std::pair<std::string, double>> per_query_ndcg;  // in task query order
    double mean_ndcg = 0.0;
    std::string model;  // optional label carried into reports
};

EvalResult run_task(const EvalTask& task, const EmbeddingMatrix& query_embs, const EmbeddingMatrix& doc_embs,
                    std::size_t k = 10, std::size_t parallelism = 1);

json eval_result_to_json(const EvalResult& r);
EvalResult eval_result_from_json(const json& j);

}  // namespace clir
