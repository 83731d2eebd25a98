#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clir/core.hpp"
#include "clir/evaluator.hpp"
#include "clir/ingest.hpp"

namespace clir {

struct MergeSpec {
    fs::path anchor;
    fs::path pair;
    double alpha = 0.5;  // weight on the anchor
};

/// Throws StructuralError listing every name, shape or dtype disagreement.
void check_mergeable(const TensorArchive& anchor, const TensorArchive& pair);

/// out = alpha * anchor + (1 - alpha) * pair for every tensor, written as F32.
/// The combination is evaluated in double and rounded once, so alpha = 0.5 gives the
/// correctly rounded midpoint and alpha in {0, 1} returns a parent exactly.
TensorArchive merge(const TensorArchive& anchor, const TensorArchive& pair, double alpha,
                    const std::string& anchor_label = "anchor", const std::string& pair_label = "pair",
                    std::size_t parallelism = 1);

TensorArchive merge(const MergeSpec& spec, std::size_t parallelism = 1);

// ---------------------------------------------------------------------------
// All-pairs sweep

struct ModelRef {
    std::string label;
    fs::path path;
};

struct SweepPlan {
    std::vector<ModelRef> models;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (anchor index, pair index)
};

/// Unordered pairs i < j when alpha is 0.5 (the merge is symmetric), both orientations otherwise.
SweepPlan make_sweep_plan(std::vector<ModelRef> models, double alpha = 0.5);

/// One model per line: "label path" or just "path" (label = file stem). '#' starts a comment.
/// Relative paths resolve against the list file's directory.
std::vector<ModelRef> read_model_list(const fs::path& path);

/// Percent NDCG per direction, averaged over datasets.
using DirectionScores = std::map<TaskDirection, double>;

double cross_average(const DirectionScores& s);
double mono_average(const DirectionScores& s);

/// Scores a merged archive. Embedding the merged model happens outside this toolkit,
/// so evaluators typically look up precomputed embeddings by label.
using CellEvaluator = std::function<DirectionScores(const std::string& merged_label, const fs::path& merged_path)>;

struct SweepCell {
    std::string anchor;
    std::string pair;
    std::string label;  // "anchor+pair"
    fs::path merged_path;
    std::optional<DirectionScores> scores;
    std::string error;
};

struct SweepOptions {
    double alpha = 0.5;
    fs::path out_dir;  // merged archives are written here, one file per cell
    std::size_t parallelism = 1;
};

/// Failures are recorded per cell; the sweep itself keeps going.
std::vector<SweepCell> sweep(const SweepPlan& plan, const SweepOptions& options, const CellEvaluator& evaluate);

/// The model with the best mean mono-lingual score; ties go to the earlier entry.
std::string select_anchor(const std::vector<std::pair<std::string, DirectionScores>>& model_scores);

json sweep_to_json(const SweepPlan& plan, const std::vector<SweepCell>& cells, double alpha,
                   const std::optional<std::string>& anchor_model = std::nullopt);

// ---------------------------------------------------------------------------
// Evaluation manifest: datasets plus per-model embedding files.
//
// {
//   "k": 10,
//   "datasets": [{"name": "belebele", "queries": "q.jsonl", "corpus": "c.jsonl", "qrels": "qrels.tsv"}],
//   "models": {
//     "base+koenen": {"belebele": {"ko": {"queries": "q_ko.emb1", "docs": "d_ko.emb1"},
//                                  "en": {"queries": "q_en.emb1", "docs": "d_en.emb1"}}}
//   }
// }

struct EmbeddingFiles {
    fs::path queries;
    fs::path docs;
};

struct ManifestDataset {
    std::string name;
    fs::path queries;
    fs::path corpus;
    std::optional<fs::path> qrels;
};

struct EvalManifest {
    std::size_t k = 10;
    std::vector<ManifestDataset> datasets;
    std::map<std::string, std::map<std::string, std::map<Language, EmbeddingFiles>>> models;
};

EvalManifest read_eval_manifest(const fs::path& path);

/// Evaluates one labelled model on every dataset and direction in the manifest.
/// Individual results are appended to `details` when given.
DirectionScores evaluate_model(const EvalManifest& manifest, const std::string& label, std::size_t parallelism = 1,
                               std::vector<EvalResult>* details = nullptr);

CellEvaluator manifest_evaluator(EvalManifest manifest, std::size_t parallelism = 1);

}  // namespace clir
