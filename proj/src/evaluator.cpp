#include "clir/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "clir/miner.hpp"
#include "clir/parallel.hpp"

namespace clir {

EvalTask make_task(std::string dataset_name, TaskDirection direction, const std::vector<QueryRecord>& queries,
                   const ParallelCorpus& corpus, const Qrels& qrels) {
    EvalTask task;
    task.dataset_name = std::move(dataset_name);
    task.direction = direction;
    task.qrels = qrels;
    task.pool_doc_ids.reserve(corpus.size());
    for (const auto& d : corpus.docs()) task.pool_doc_ids.push_back(d.doc_id);

    for (const auto& q : queries) {
        const auto* judgments = qrels.find(q.query_id);
        const bool answerable = judgments && std::any_of(judgments->begin(), judgments->end(), [&](const auto& kv) {
                                    return kv.second >= 1 && corpus.find(kv.first) != nullptr;
                                });
        if (!answerable) {
            throw PreconditionError(task.dataset_name + " " + direction.render() + ": query '" + q.query_id +
                                    "' has no relevant document in the pool");
        }
        task.queries.push_back({q.query_id, q.texts[direction.query_lang]});
    }
    return task;
}

double ndcg_at_k(const std::vector<std::string>& ranked, const Qrels::Judgments& judgments, std::size_t k) {
    if (k < 1) throw PreconditionError("ndcg_at_k: k must be at least 1");
    std::vector<int> ideal;
    for (const auto& [_, rel] : judgments) {
        if (rel > 0) ideal.push_back(rel);
    }
    if (ideal.empty()) throw PreconditionError("ndcg_at_k: no judgment with positive relevance");
    if (ranked.empty()) return 0.0;

    const auto gain = [](int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; };
    const auto discount = [](std::size_t rank) { return std::log2(static_cast<double>(rank) + 1.0); };

    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        const auto it = judgments.find(ranked[i]);
        if (it != judgments.end() && it->second > 0) dcg += gain(it->second) / discount(i + 1);
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) idcg += gain(ideal[i]) / discount(i + 1);
    return dcg / idcg;
}

EvalResult run_task(const EvalTask& task, const EmbeddingMatrix& query_embs, const EmbeddingMatrix& doc_embs,
                    std::size_t k, std::size_t parallelism) {
    if (task.queries.empty()) throw PreconditionError(task.dataset_name + ": task has no queries");
    if (query_embs.dim() != doc_embs.dim()) {
        throw PreconditionError("query embeddings have dimension " + std::to_string(query_embs.dim()) +
                                ", document embeddings " + std::to_string(doc_embs.dim()));
    }

    // Restrict the document matrix to the pool, in pool order.
    std::vector<float> pool_values;
    pool_values.reserve(task.pool_doc_ids.size() * doc_embs.dim());
    for (const auto& id : task.pool_doc_ids) {
        const auto idx = doc_embs.index_of(id);
        if (!idx) throw PreconditionError("no document embedding for pool doc '" + id + "'");
        const auto row = doc_embs.row(*idx);
        pool_values.insert(pool_values.end(), row.begin(), row.end());
    }
    const EmbeddingMatrix pool(task.pool_doc_ids, std::move(pool_values), doc_embs.dim(), false);
    for (const auto& q : task.queries) {
        if (!query_embs.index_of(q.query_id)) throw PreconditionError("no query embedding for '" + q.query_id + "'");
    }

    EvalResult result;
    result.dataset_name = task.dataset_name;
    result.direction = task.direction;
    result.k = k;
    result.per_query_ndcg.resize(task.queries.size());
    parallel_for(task.queries.size(), parallelism, [&](std::size_t i) {
        const auto& q = task.queries[i];
        const auto ranking = rank_documents(query_embs.row(q.query_id), pool);
        std::vector<std::string> ids;
        ids.reserve(std::min(k, ranking.size()));
        for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) ids.push_back(ranking[r].doc_id);
        result.per_query_ndcg[i] = {q.query_id, ndcg_at_k(ids, *task.qrels.find(q.query_id), k)};
    });

    double sum = 0.0;
    for (const auto& [_, v] : result.per_query_ndcg) sum += v;
    result.mean_ndcg = sum / static_cast<double>(result.per_query_ndcg.size());
    return result;
}

json eval_result_to_json(const EvalResult& r) {
    json per_query = json::object();
    for (const auto& [qid, v] : r.per_query_ndcg) per_query[qid] = v;
    json j = {{"dataset", r.dataset_name},
              {"direction", r.direction.render()},
              {"k", r.k},
              {"mean_ndcg", r.mean_ndcg},
              {"mean_ndcg_pct", r.mean_ndcg * 100.0},
              {"per_query", per_query}};
    if (!r.model.empty()) j["model"] = r.model;
    return j;
}

EvalResult eval_result_from_json(const json& j) {
    EvalResult r;
    r.dataset_name = j.at("dataset").get<std::string>();
    r.direction = parse_direction(j.at("direction").get<std::string>());
    r.k = j.value("k", std::size_t{10});
    r.mean_ndcg = j.at("mean_ndcg").get<double>();
    r.model = j.value("model", std::string{});
    if (const auto it = j.find("per_query"); it != j.end()) {
        for (const auto& [qid, v] : it->items()) r.per_query_ndcg.emplace_back(qid, v.get<double>());
    }
    return r;
}

}  // namespace clir
