#include "clir/permute.hpp"

#include <unordered_map>

#include "clir/parallel.hpp"

namespace clir {

PermutationPlan make_plan(std::vector<LangCombo> combos, std::set<Language> negatives_available_langs) {
    for (const auto& c : combos) {
        if (!negatives_available_langs.contains(c.negative_lang)) {
            throw PreconditionError("combination " + c.render() + " needs " +
                                    std::string(to_string(c.negative_lang)) + " negatives, which are not available");
        }
    }
    return PermutationPlan{std::move(combos), std::move(negatives_available_langs)};
}

std::vector<LangCombo> parse_combo_list(std::string_view text) {
    if (text == "all") return all_combos();
    std::vector<LangCombo> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        const auto c = parse_combo(item);
        if (std::find(out.begin(), out.end(), c) != out.end()) {
            throw ParseError("combination " + c.render() + " listed twice");
        }
        out.push_back(c);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<TrainingExample> expand(const Triple& triple, const NegativesByLang& negatives,
                                    const PermutationPlan& plan) {
    std::vector<TrainingExample> out;
    out.reserve(plan.combos.size());
    for (const auto& combo : plan.combos) {
        const auto it = negatives.find(combo.negative_lang);
        if (it == negatives.end()) {
            throw PreconditionError("triple '" + triple.id + "', combination " + combo.render() +
                                    ": no negatives for the " + std::string(to_string(combo.negative_lang)) +
                                    " negative slot");
        }
        TrainingExample ex;
        ex.anchor = triple.query[combo.query_lang];
        ex.positive = triple.positive[combo.positive_lang];
        ex.negatives = it->second;
        ex.combo = combo;
        ex.source_triple_id = triple.id;
        ex.shortfall = ex.negatives.size() < kTargetNegatives ? kTargetNegatives - ex.negatives.size() : 0;
        out.push_back(std::move(ex));
    }
    return out;
}

std::string dataset_file_name(const LangCombo& combo) { return "train_" + combo.render() + ".jsonl"; }

json training_example_to_json(const TrainingExample& ex) {
    return {{"anchor", ex.anchor},
            {"positive", ex.positive},
            {"negatives", ex.negatives},
            {"combo", ex.combo.render()},
            {"source_triple_id", ex.source_triple_id},
            {"shortfall", ex.shortfall}};
}

PermutedDatasets permute_dataset(const std::vector<Triple>& triples, const std::vector<MiningResult>& mined,
                                 const ParallelCorpus& corpus, const PermutationPlan& plan,
                                 std::size_t parallelism) {
    std::unordered_map<std::string, const MiningResult*> by_query;
    for (const auto& m : mined) by_query.emplace(m.query_id, &m);
    std::map<Language, std::unordered_map<std::string, std::string>> texts;
    for (const auto lang : plan.negatives_available_langs) texts[lang] = corpus.texts(lang);

    struct PerTriple {
        std::vector<TrainingExample> examples;
        std::vector<std::string> warnings;
    };
    std::vector<PerTriple> results(triples.size());
    parallel_for(triples.size(), parallelism, [&](std::size_t i) {
        const auto& t = triples[i];
        const auto it = by_query.find(t.id);
        if (it == by_query.end()) throw PreconditionError("triple '" + t.id + "' has no mining result");
        NegativesByLang negatives;
        for (const auto lang : plan.negatives_available_langs) {
            auto assembled = assemble_negatives(t, *it->second, texts[lang], lang);
            negatives[lang] = std::move(assembled.texts);
            for (auto& w : assembled.warnings) results[i].warnings.push_back(std::move(w));
        }
        results[i].examples = expand(t, negatives, plan);
    });

    PermutedDatasets out;
    for (const auto& combo : plan.combos) out.by_combo[combo];
    for (auto& r : results) {
        for (auto& ex : r.examples) out.by_combo[ex.combo].push_back(std::move(ex));
        for (auto& w : r.warnings) out.warnings.push_back(std::move(w));
    }
    return out;
}

}  // namespace clir
