#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "clir/core.hpp"
#include "clir/ingest.hpp"
#include "clir/miner.hpp"

namespace clir {

struct PermutationPlan {
    std::vector<LangCombo> combos;
    std::set<Language> negatives_available_langs;
};

/// Rejects combos whose negative language has no texts available.
PermutationPlan make_plan(std::vector<LangCombo> combos, std::set<Language> negatives_available_langs);

/// "all" or a comma-separated list such as "koenen,enkoko".
std::vector<LangCombo> parse_combo_list(std::string_view text);

using NegativesByLang = std::map<Language, std::vector<std::string>>;

/// One example per planned combo, in plan order.
std::vector<TrainingExample> expand(const Triple& triple, const NegativesByLang& negatives,
                                    const PermutationPlan& plan);

std::string dataset_file_name(const LangCombo& combo);
json training_example_to_json(const TrainingExample& ex);

struct PermutedDatasets {
    std::map<LangCombo, std::vector<TrainingExample>> by_combo;
    std::vector<std::string> warnings;
};

/// Assembles negatives for every triple in both languages from a parallel corpus
/// and expands them across the plan. Output order is triple order within each combo.
PermutedDatasets permute_dataset(const std::vector<Triple>& triples, const std::vector<MiningResult>& mined,
                                 const ParallelCorpus& corpus, const PermutationPlan& plan,
                                 std::size_t parallelism = 1);

}  // namespace clir
