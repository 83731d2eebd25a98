#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "clir/core.hpp"
#include "clir/ingest.hpp"

namespace clir {

struct MiningConfig {
    std::size_t rank_lo = 50;    // 1-indexed, inclusive
    std::size_t rank_hi = 300;   // 1-indexed, inclusive
    double abs_cap = 0.8;        // keep sim <= abs_cap
    double rel_margin = 0.95;    // keep sim < rel_margin * sim(query, positive)
    std::size_t count = 5;
    bool include_own_positive = false;  // rank the positive too (it is still never mined)

    void validate() const;
};

struct RankedDoc {
    std::string doc_id;
    double similarity = 0.0;
    bool operator==(const RankedDoc&) const = default;
};

/// Cosine similarity of `query` against every row, highest first, ties by ascending doc_id.
std::vector<RankedDoc> rank_documents(std::span<const float> query, const EmbeddingMatrix& docs);

struct RejectionCounts {
    std::size_t out_of_window = 0;
    std::size_t abs_cap = 0;
    std::size_t rel_margin = 0;
    bool operator==(const RejectionCounts&) const = default;
};

struct MiningResult {
    std::string query_id;
    std::vector<std::string> mined_doc_ids;
    std::vector<double> similarities;  // parallel to mined_doc_ids
    std::size_t shortfall = 0;
    RejectionCounts rejected;
    bool corpus_below_window = false;  // fewer ranked docs than rank_lo

    bool operator==(const MiningResult&) const = default;
};

/// Applies the rank window, then the absolute cap, then the relative margin.
/// A candidate failing both similarity filters is counted under abs_cap.
MiningResult mine_negatives(const std::string& query_id, std::span<const float> query_vec,
                            const std::string& positive_doc_id, const EmbeddingMatrix& docs,
                            const MiningConfig& cfg);

/// Same, over a ranking that was already computed for the query.
MiningResult mine_from_ranking(const std::string& query_id, const std::vector<RankedDoc>& ranking,
                               const std::string& positive_doc_id, const MiningConfig& cfg);

struct MiningJob {
    std::string query_id;
    std::string positive_doc_id;
};

/// Mines every job against one shared document matrix; results follow job order.
std::vector<MiningResult> mine_all(const std::vector<MiningJob>& jobs, const EmbeddingMatrix& query_embs,
                                   const EmbeddingMatrix& docs, const MiningConfig& cfg, std::size_t parallelism = 1);

json mining_result_to_json(const MiningResult& r);
MiningResult mining_result_from_json(const json& j);
std::vector<MiningResult> read_mining_results(const fs::path& path);

struct AssembledNegatives {
    std::vector<std::string> texts;  // synthetic first, then mined in similarity order
    std::size_t shortfall = 0;       // relative to kTargetNegatives
    std::vector<std::string> warnings;
};

/// Builds the negatives list for one language slot of a triple.
AssembledNegatives assemble_negatives(const Triple& triple, const MiningResult& mined,
                                      const std::unordered_map<std::string, std::string>& corpus_texts,
                                      Language lang);

}  // namespace clir
