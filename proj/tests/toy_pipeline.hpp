#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clir/cli.hpp"
#include "clir/core.hpp"

namespace toy {

namespace fs = std::filesystem;

inline int run(std::vector<std::string> args) {
    args.insert(args.begin(), "clir-lab");
    return clir::cli::run(args);
}

/// dedup -> mine -> permute -> eval (two embedding sets, four directions) -> merge -> report.
/// Returns the first non-zero exit code, or 0.
inline int run_pipeline(const fs::path& fx, const fs::path& out, std::size_t parallelism) {
    const auto p = [](const fs::path& path) { return path.string(); };
    const std::string par = std::to_string(parallelism);
    fs::create_directories(out / "results");
    const std::vector<std::vector<std::string>> steps = [&] {
        std::vector<std::vector<std::string>> s{
            {"dedup", "--input", p(fx / "triples.jsonl"), "--output", p(out / "kept.jsonl"), "--report",
             p(out / "dropped.jsonl")},
            {"mine", "--triples", p(out / "kept.jsonl"), "--doc-embeddings", p(fx / "emb/docs.emb1"),
             "--query-embeddings", p(fx / "emb/queries.emb1"), "--rank-window", "1:20", "--output",
             p(out / "mined.jsonl")},
            {"permute", "--triples", p(out / "kept.jsonl"), "--negatives", p(out / "mined.jsonl"), "--corpus",
             p(fx / "corpus.jsonl"), "--out-dir", p(out / "train")},
        };
        for (const auto& [model, queries] : {std::pair{"base", "emb/queries.emb1"},
                                             std::pair{"noisy", "emb/queries_noisy.emb1"}}) {
            for (const auto& d : clir::all_directions()) {
                s.push_back({"eval", "--dataset", "toy", "--direction", d.render(), "--queries",
                             p(fx / "queries.jsonl"), "--corpus", p(fx / "corpus.jsonl"), "--query-embeddings",
                             p(fx / queries), "--doc-embeddings", p(fx / "emb/docs.emb1"), "--model", model,
                             "--output", p(out / "results" / (std::string(model) + "_" + d.render() + ".json"))});
            }
        }
        s.push_back({"merge", "--anchor", p(fx / "models/a.tensors"), "--pair", p(fx / "models/b.tensors"),
                     "--alpha", "0.5", "--out", p(out / "merged.tensors")});
        s.push_back({"report", "--results", p(out / "results"), "--baseline", "base", "--format", "markdown",
                     "--out", p(out / "report.md")});
        return s;
    }();
    fs::create_directories(out / "train");
    for (auto args : steps) {
        args.insert(args.end(), {"--parallelism", par, "--log-level", "warn"});
        if (const int code = run(args); code != 0) return code;
    }
    return 0;
}

/// Every regular file under `root`, as sorted relative paths.
inline std::vector<fs::path> files_under(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace toy
