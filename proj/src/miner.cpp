#include "clir/miner.hpp"

#include <algorithm>
#include <cmath>

#include "clir/parallel.hpp"

namespace clir {

namespace {

double norm(std::span<const float> v) {
    double s = 0.0;
    for (const float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

std::vector<double> row_norms(const EmbeddingMatrix& docs) {
    std::vector<double> out(docs.rows());
    for (std::size_t i = 0; i < docs.rows(); ++i) {
        out[i] = norm(docs.row(i));
        if (out[i] == 0.0) throw PreconditionError("document '" + docs.ids()[i] + "' has a zero-norm embedding");
    }
    return out;
}

std::vector<RankedDoc> rank_with_norms(std::span<const float> query, const EmbeddingMatrix& docs,
                                       const std::vector<double>& doc_norms) {
    if (query.size() != docs.dim()) {
        throw PreconditionError("query dimension " + std::to_string(query.size()) + " != document dimension " +
                                std::to_string(docs.dim()));
    }
    const double qn = norm(query);
    if (qn == 0.0) throw PreconditionError("query has a zero-norm embedding");

    std::vector<RankedDoc> out(docs.rows());
    for (std::size_t i = 0; i < docs.rows(); ++i) {
        const auto row = docs.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) dot += static_cast<double>(query[j]) * row[j];
        out[i] = {docs.ids()[i], dot / (qn * doc_norms[i])};
    }
    std::sort(out.begin(), out.end(), [](const RankedDoc& a, const RankedDoc& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.doc_id < b.doc_id;
    });
    return out;
}

}  // namespace

void MiningConfig::validate() const {
    if (rank_lo < 1 || rank_lo > rank_hi) throw PreconditionError("mining: need 1 <= rank_lo <= rank_hi");
    if (!(rel_margin > 0.0 && rel_margin <= 1.0)) throw PreconditionError("mining: rel_margin must lie in (0, 1]");
    if (count < 1) throw PreconditionError("mining: count must be at least 1");
}

std::vector<RankedDoc> rank_documents(std::span<const float> query, const EmbeddingMatrix& docs) {
    return rank_with_norms(query, docs, row_norms(docs));
}

MiningResult mine_from_ranking(const std::string& query_id, const std::vector<RankedDoc>& ranking,
                               const std::string& positive_doc_id, const MiningConfig& cfg) {
    cfg.validate();
    const auto pos_it = std::find_if(ranking.begin(), ranking.end(),
                                     [&](const RankedDoc& d) { return d.doc_id == positive_doc_id; });
    if (pos_it == ranking.end()) {
        throw PreconditionError("query '" + query_id + "': positive document '" + positive_doc_id +
                                "' is not in the document matrix");
    }
    const double bound = cfg.rel_margin * pos_it->similarity;

    MiningResult r;
    r.query_id = query_id;
    std::size_t rank = 0;
    for (const auto& doc : ranking) {
        const bool is_positive = doc.doc_id == positive_doc_id;
        if (is_positive && !cfg.include_own_positive) continue;
        ++rank;
        if (is_positive) continue;  // occupies its rank but is never a negative
        if (rank < cfg.rank_lo || rank > cfg.rank_hi) {
            ++r.rejected.out_of_window;
        } else if (!(doc.similarity <= cfg.abs_cap)) {
            ++r.rejected.abs_cap;
        } else if (!(doc.similarity < bound)) {
            ++r.rejected.rel_margin;
        } else if (r.mined_doc_ids.size() < cfg.count) {
            r.mined_doc_ids.push_back(doc.doc_id);
            r.similarities.push_back(doc.similarity);
        }
    }
    r.corpus_below_window = rank < cfg.rank_lo;
    r.shortfall = cfg.count - r.mined_doc_ids.size();
    return r;
}

MiningResult mine_negatives(const std::string& query_id, std::span<const float> query_vec,
                            const std::string& positive_doc_id, const EmbeddingMatrix& docs,
                            const MiningConfig& cfg) {
    return mine_from_ranking(query_id, rank_documents(query_vec, docs), positive_doc_id, cfg);
}

std::vector<MiningResult> mine_all(const std::vector<MiningJob>& jobs, const EmbeddingMatrix& query_embs,
                                   const EmbeddingMatrix& docs, const MiningConfig& cfg, std::size_t parallelism) {
    cfg.validate();
    const auto norms = row_norms(docs);
    std::vector<MiningResult> out(jobs.size());
    parallel_for(jobs.size(), parallelism, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto ranking = rank_with_norms(query_embs.row(job.query_id), docs, norms);
        out[i] = mine_from_ranking(job.query_id, ranking, job.positive_doc_id, cfg);
    });
    return out;
}

json mining_result_to_json(const MiningResult& r) {
    return {{"query_id", r.query_id},
            {"mined", r.mined_doc_ids},
            {"similarities", r.similarities},
            {"shortfall", r.shortfall},
            {"rejected",
             {{"out_of_window", r.rejected.out_of_window},
              {"abs_cap", r.rejected.abs_cap},
              {"rel_margin", r.rejected.rel_margin}}},
            {"corpus_below_window", r.corpus_below_window}};
}

MiningResult mining_result_from_json(const json& j) {
    MiningResult r;
    r.query_id = j.at("query_id").get<std::string>();
    r.mined_doc_ids = j.at("mined").get<std::vector<std::string>>();
    r.similarities = j.value("similarities", std::vector<double>{});
    r.shortfall = j.at("shortfall").get<std::size_t>();
    if (const auto it = j.find("rejected"); it != j.end()) {
        r.rejected.out_of_window = it->value("out_of_window", std::size_t{0});
        r.rejected.abs_cap = it->value("abs_cap", std::size_t{0});
        r.rejected.rel_margin = it->value("rel_margin", std::size_t{0});
    }
    r.corpus_below_window = j.value("corpus_below_window", false);
    return r;
}

std::vector<MiningResult> read_mining_results(const fs::path& path) {
    std::vector<MiningResult> out;
    for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(mining_result_from_json(j)); });
    return out;
}

AssembledNegatives assemble_negatives(const Triple& triple, const MiningResult& mined,
                                      const std::unordered_map<std::string, std::string>& corpus_texts,
                                      Language lang) {
    AssembledNegatives out;
    out.texts.push_back(triple.synthetic_negative[lang]);
    const auto& positive = triple.positive[lang];
    for (const auto& doc_id : mined.mined_doc_ids) {
        const auto it = corpus_texts.find(doc_id);
        if (it == corpus_texts.end()) {
            throw PreconditionError("triple '" + triple.id + "': mined document '" + doc_id +
                                    "' has no " + std::string(to_string(lang)) + " text in the corpus");
        }
        if (it->second == positive) {
            out.warnings.push_back("triple '" + triple.id + "': mined document '" + doc_id +
                                   "' duplicates the positive text; dropped");
            continue;
        }
        if (out.texts.size() == kTargetNegatives) {
            out.warnings.push_back("triple '" + triple.id + "': more than " + std::to_string(kTargetNegatives) +
                                   " negatives available; extra mined documents ignored");
            break;
        }
        out.texts.push_back(it->second);
    }
    out.shortfall = out.texts.size() < kTargetNegatives ? kTargetNegatives - out.texts.size() : 0;
    return out;
}

}  // namespace clir
