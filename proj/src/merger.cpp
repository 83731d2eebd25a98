#include "clir/merger.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "clir/parallel.hpp"

namespace clir {

namespace {

std::string shape_string(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void check_mergeable(const TensorArchive& anchor, const TensorArchive& pair) {
    std::vector<std::string> problems;
    for (const auto& [name, t] : anchor.tensors) {
        const auto it = pair.tensors.find(name);
        if (it == pair.tensors.end()) {
            problems.push_back("'" + name + "' only in anchor");
            continue;
        }
        if (t.shape != it->second.shape) {
            problems.push_back("'" + name + "' shape " + shape_string(t.shape) + " vs " + shape_string(it->second.shape));
        }
        if (t.dtype != it->second.dtype) {
            problems.push_back("'" + name + "' dtype " + std::string(to_string(t.dtype)) + " vs " +
                               std::string(to_string(it->second.dtype)));
        }
    }
    for (const auto& [name, _] : pair.tensors) {
        if (!anchor.tensors.contains(name)) problems.push_back("'" + name + "' only in pair");
    }
    if (!problems.empty()) {
        std::string msg = "archives are not structurally identical: ";
        for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
        throw StructuralError(msg);
    }
}

TensorArchive merge(const TensorArchive& anchor, const TensorArchive& pair, double alpha,
                    const std::string& anchor_label, const std::string& pair_label, std::size_t parallelism) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("merge: alpha must lie in [0, 1]");
    check_mergeable(anchor, pair);

    std::vector<const std::string*> names;
    for (const auto& [name, _] : anchor.tensors) names.push_back(&name);
    std::vector<Tensor> merged(names.size());

    parallel_for(names.size(), parallelism, [&](std::size_t i) {
        const auto& a = anchor.tensors.at(*names[i]);
        const auto& b = pair.tensors.at(*names[i]);
        const auto av = a.to_f32();
        if (alpha == 1.0) {
            merged[i] = Tensor::from_f32(a.shape, av);
            return;
        }
        const auto bv = b.to_f32();
        if (alpha == 0.0) {
            merged[i] = Tensor::from_f32(b.shape, bv);
            return;
        }
        std::vector<float> out(av.size());
        const double beta = 1.0 - alpha;
        for (std::size_t j = 0; j < av.size(); ++j) {
            out[j] = static_cast<float>(alpha * static_cast<double>(av[j]) + beta * static_cast<double>(bv[j]));
        }
        merged[i] = Tensor::from_f32(a.shape, out);
    });

    TensorArchive result;
    result.metadata = anchor.metadata;
    result.metadata["merge_anchor"] = anchor_label;
    result.metadata["merge_pair"] = pair_label;
    result.metadata["merge_alpha"] = shortest(alpha);
    for (std::size_t i = 0; i < names.size(); ++i) result.tensors.emplace(*names[i], std::move(merged[i]));
    return result;
}

TensorArchive merge(const MergeSpec& spec, std::size_t parallelism) {
    const auto anchor = read_tensor_archive(spec.anchor);
    const auto pair = read_tensor_archive(spec.pair);
    return merge(anchor, pair, spec.alpha, spec.anchor.string(), spec.pair.string(), parallelism);
}

// ---------------------------------------------------------------------------

SweepPlan make_sweep_plan(std::vector<ModelRef> models, double alpha) {
    if (models.size() < 2) throw PreconditionError("sweep needs at least two models");
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (models[i].label == models[j].label) {
                throw PreconditionError("sweep: duplicate model label '" + models[i].label + "'");
            }
        }
    }
    SweepPlan plan{std::move(models), {}};
    const std::size_t n = plan.models.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (alpha == 0.5 && j < i) continue;
            plan.pairs.emplace_back(i, j);
        }
    }
    return plan;
}

std::vector<ModelRef> read_model_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    std::vector<ModelRef> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string first, second, extra;
        if (!(ss >> first)) continue;
        ModelRef ref;
        if (ss >> second) {
            if (ss >> extra) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'label path'");
            ref = {first, second};
        } else {
            ref = {fs::path(first).stem().string(), first};
        }
        if (ref.path.is_relative()) ref.path = path.parent_path() / ref.path;
        out.push_back(std::move(ref));
    }
    return out;
}

double cross_average(const DirectionScores& s) {
    using L = Language;
    return (s.at({L::en, L::ko}) + s.at({L::ko, L::en})) / 2.0;
}

double mono_average(const DirectionScores& s) {
    using L = Language;
    return (s.at({L::ko, L::ko}) + s.at({L::en, L::en})) / 2.0;
}

std::vector<SweepCell> sweep(const SweepPlan& plan, const SweepOptions& options, const CellEvaluator& evaluate) {
    std::vector<SweepCell> cells(plan.pairs.size());
    if (!options.out_dir.empty()) fs::create_directories(options.out_dir);
    for (std::size_t c = 0; c < plan.pairs.size(); ++c) {
        const auto& a = plan.models[plan.pairs[c].first];
        const auto& b = plan.models[plan.pairs[c].second];
        cells[c].anchor = a.label;
        cells[c].pair = b.label;
        cells[c].label = a.label + "+" + b.label;
        cells[c].merged_path = options.out_dir / (cells[c].label + ".tensors");
    }
    parallel_for(cells.size(), options.parallelism, [&](std::size_t c) {
        auto& cell = cells[c];
        try {
            const auto& a = plan.models[plan.pairs[c].first];
            const auto& b = plan.models[plan.pairs[c].second];
            const auto merged = merge(read_tensor_archive(a.path), read_tensor_archive(b.path), options.alpha,
                                      a.label, b.label);
            write_tensor_archive(merged, cell.merged_path);
            cell.scores = evaluate(cell.label, cell.merged_path);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

std::string select_anchor(const std::vector<std::pair<std::string, DirectionScores>>& model_scores) {
    if (model_scores.empty()) throw PreconditionError("select_anchor: no models");
    std::size_t best = 0;
    for (std::size_t i = 1; i < model_scores.size(); ++i) {
        if (mono_average(model_scores[i].second) > mono_average(model_scores[best].second)) best = i;
    }
    return model_scores[best].first;
}

json sweep_to_json(const SweepPlan& plan, const std::vector<SweepCell>& cells, double alpha,
                   const std::optional<std::string>& anchor_model) {
    const auto scores_json = [](const DirectionScores& s) {
        json j = json::object();
        for (const auto& d : all_directions()) {
            if (const auto it = s.find(d); it != s.end()) j[d.render()] = it->second;
        }
        return j;
    };
    json models = json::array();
    for (const auto& m : plan.models) models.push_back(m.label);
    json cell_list = json::array();
    json grid = json::object();
    for (const auto& cell : cells) {
        json c = {{"anchor", cell.anchor}, {"pair", cell.pair}, {"label", cell.label},
                  {"merged_path", cell.merged_path.filename().string()}};
        if (cell.scores) {
            c["scores"] = scores_json(*cell.scores);
            c["cross_avg"] = cross_average(*cell.scores);
            c["mono_avg"] = mono_average(*cell.scores);
            grid[cell.anchor][cell.pair] = c["scores"];
            if (alpha == 0.5) grid[cell.pair][cell.anchor] = c["scores"];
        } else {
            c["error"] = cell.error;
        }
        cell_list.push_back(std::move(c));
    }
    json out = {{"alpha", alpha}, {"models", models}, {"cells", cell_list}, {"grid", grid}};
    if (anchor_model) out["anchor_model"] = *anchor_model;
    return out;
}

// ---------------------------------------------------------------------------

EvalManifest read_eval_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
    const auto base = path.parent_path();
    const auto resolve = [&](const std::string& p) { return fs::path(p).is_relative() ? base / p : fs::path(p); };
    EvalManifest m;
    try {
        m.k = j.value("k", std::size_t{10});
        for (const auto& d : j.at("datasets")) {
            ManifestDataset ds{d.at("name").get<std::string>(), resolve(d.at("queries").get<std::string>()),
                               resolve(d.at("corpus").get<std::string>()), std::nullopt};
            if (d.contains("qrels")) ds.qrels = resolve(d.at("qrels").get<std::string>());
            m.datasets.push_back(std::move(ds));
        }
        for (const auto& [label, per_dataset] : j.at("models").items()) {
            for (const auto& [dataset, per_lang] : per_dataset.items()) {
                for (const auto& [lang, files] : per_lang.items()) {
                    m.models[label][dataset][parse_language(lang)] = {resolve(files.at("queries").get<std::string>()),
                                                                      resolve(files.at("docs").get<std::string>())};
                }
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (m.datasets.empty()) throw FormatError(path.string() + ": manifest lists no datasets");
    return m;
}

namespace {

struct LoadedDataset {
    std::string name;
    std::vector<QueryRecord> queries;
    ParallelCorpus corpus;
    Qrels qrels;
};

std::vector<LoadedDataset> load_datasets(const EvalManifest& manifest) {
    std::vector<LoadedDataset> out;
    for (const auto& d : manifest.datasets) {
        LoadedDataset ld{d.name, read_queries(d.queries), read_corpus(d.corpus), {}};
        ld.qrels = d.qrels ? read_qrels(*d.qrels) : Qrels::from_gold(ld.queries);
        out.push_back(std::move(ld));
    }
    return out;
}

DirectionScores evaluate_loaded(const EvalManifest& manifest, const std::vector<LoadedDataset>& datasets,
                                const std::string& label, std::size_t parallelism, std::vector<EvalResult>* details) {
    const auto model_it = manifest.models.find(label);
    if (model_it == manifest.models.end()) throw PreconditionError("manifest has no embeddings for model '" + label + "'");
    DirectionScores sums;
    for (const auto& ds : datasets) {
        const auto ds_it = model_it->second.find(ds.name);
        if (ds_it == model_it->second.end()) {
            throw PreconditionError("manifest: model '" + label + "' has no embeddings for dataset '" + ds.name + "'");
        }
        std::map<Language, std::pair<EmbeddingMatrix, EmbeddingMatrix>> embs;
        for (const auto lang : kLanguages) {
            const auto f = ds_it->second.find(lang);
            if (f == ds_it->second.end()) {
                throw PreconditionError("manifest: model '" + label + "', dataset '" + ds.name + "' lacks " +
                                        std::string(to_string(lang)) + " embeddings");
            }
            embs[lang] = {read_embeddings(f->second.queries), read_embeddings(f->second.docs)};
        }
        for (const auto& dir : all_directions()) {
            const auto task = make_task(ds.name, dir, ds.queries, ds.corpus, ds.qrels);
            auto r = run_task(task, embs[dir.query_lang].first, embs[dir.doc_lang].second, manifest.k, parallelism);
            r.model = label;
            sums[dir] += r.mean_ndcg * 100.0;
            if (details) details->push_back(std::move(r));
        }
    }
    for (auto& [_, v] : sums) v /= static_cast<double>(datasets.size());
    return sums;
}

}  // namespace

DirectionScores evaluate_model(const EvalManifest& manifest, const std::string& label, std::size_t parallelism,
                               std::vector<EvalResult>* details) {
    return evaluate_loaded(manifest, load_datasets(manifest), label, parallelism, details);
}

CellEvaluator manifest_evaluator(EvalManifest manifest, std::size_t parallelism) {
    auto shared = std::make_shared<const std::pair<EvalManifest, std::vector<LoadedDataset>>>(
        manifest, load_datasets(manifest));
    return [shared, parallelism](const std::string& label, const fs::path&) {
        return evaluate_loaded(shared->first, shared->second, label, parallelism, nullptr);
    };
}

}  // namespace clir
