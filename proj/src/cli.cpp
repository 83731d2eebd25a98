#include "clir/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "clir/dedup.hpp"
#include "clir/evaluator.hpp"
#include "clir/ingest.hpp"
#include "clir/merger.hpp"
#include "clir/miner.hpp"
#include "clir/permute.hpp"
#include "clir/report.hpp"

namespace clir::cli {

namespace {

struct Common {
    std::uint64_t seed = 42;
    std::size_t parallelism = 1;
    std::string log_level;
};

void add_common(CLI::App* sub, Common& common) {
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--parallelism", common.parallelism, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--log-level", common.log_level, "trace|debug|info|warn|error|off (default: $CLIR_LOG or info)");
}

std::shared_ptr<spdlog::logger> make_logger(const std::string& level_flag) {
    auto logger = spdlog::get("clir-lab");
    if (!logger) logger = spdlog::stderr_color_st("clir-lab");
    logger->set_pattern("[%l] %v");
    std::string level = level_flag;
    if (level.empty()) {
        const char* env = std::getenv("CLIR_LOG");
        level = env && *env ? env : "info";
    }
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && level != "off") throw UsageError("unknown log level '" + level + "'");
    logger->set_level(parsed);
    return logger;
}

std::pair<std::size_t, std::size_t> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("--rank-window must look like 50:300");
    try {
        const auto lo = std::stoul(text.substr(0, colon));
        const auto hi = std::stoul(text.substr(colon + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw UsageError("--rank-window must look like 50:300, got '" + text + "'");
    }
}

DeltaBins parse_bins(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError("--bins must look like 0.5,1.5");
    try {
        DeltaBins b{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
        b.validate();
        return b;
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    } catch (const std::exception&) {
        throw UsageError("--bins must look like 0.5,1.5, got '" + text + "'");
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Cross-lingual retrieval data and evaluation toolkit", "clir-lab"};
    app.require_subcommand(1);
    Common common;

    // dedup
    auto* dedup = app.add_subcommand("dedup", "Min-hash deduplication of triples on the English query");
    fs::path dedup_in, dedup_out, dedup_report;
    DedupConfig dedup_cfg;
    dedup->add_option("--input", dedup_in, "Triples JSONL")->required();
    dedup->add_option("--output", dedup_out, "Kept triples JSONL")->required();
    dedup->add_option("--report", dedup_report, "Dropped triples JSONL");
    dedup->add_option("--threshold", dedup_cfg.threshold, "Estimated Jaccard duplicate threshold")->capture_default_str();
    dedup->add_option("--num-perms", dedup_cfg.num_perms, "Min-hash permutations")->capture_default_str();
    dedup->add_option("--shingle", dedup_cfg.shingle, "Character shingle width")->capture_default_str();
    dedup->add_option("--band-rows", dedup_cfg.band_rows, "LSH rows per band")->capture_default_str();
    add_common(dedup, common);

    // mine
    auto* mine = app.add_subcommand("mine", "Hard-negative mining over precomputed embeddings");
    fs::path mine_triples, mine_docs, mine_queries, mine_out;
    std::string window = "50:300";
    MiningConfig mining;
    mine->add_option("--triples", mine_triples, "Triples JSONL (query ids and positive doc ids are triple ids)")->required();
    mine->add_option("--doc-embeddings", mine_docs, "EMB1 matrix of documents")->required();
    mine->add_option("--query-embeddings", mine_queries, "EMB1 matrix of queries")->required();
    mine->add_option("--rank-window", window, "Inclusive 1-indexed rank window lo:hi")->capture_default_str();
    mine->add_option("--abs-cap", mining.abs_cap, "Maximum query-negative similarity")->capture_default_str();
    mine->add_option("--rel-margin", mining.rel_margin, "Negatives must stay below margin x positive similarity")
        ->capture_default_str();
    mine->add_option("--count", mining.count, "Negatives to mine per query")->capture_default_str();
    mine->add_flag("--include-own-positive", mining.include_own_positive,
                   "Let the query's own positive occupy a rank in the window");
    mine->add_option("--output", mine_out, "Mining results JSONL")->required();
    add_common(mine, common);

    // permute
    auto* permute = app.add_subcommand("permute", "Expand triples into the language-combination datasets");
    fs::path perm_triples, perm_negatives, perm_corpus, perm_out_dir;
    std::string perm_combos = "all";
    permute->add_option("--triples", perm_triples, "Triples JSONL")->required();
    permute->add_option("--negatives", perm_negatives, "Mining results JSONL")->required();
    permute->add_option("--corpus", perm_corpus, "Parallel corpus JSONL (default: the triples' positives)");
    permute->add_option("--combos", perm_combos, "all or a comma list such as koenen,enkoko")->capture_default_str();
    permute->add_option("--out-dir", perm_out_dir, "Directory for train_{combo}.jsonl")->required();
    add_common(permute, common);

    // eval
    auto* eval = app.add_subcommand("eval", "NDCG@k of one dataset in one task direction");
    std::string eval_dataset, eval_direction, eval_model;
    fs::path eval_queries, eval_corpus, eval_qrels, eval_qemb, eval_demb, eval_out;
    std::size_t eval_k = 10;
    eval->add_option("--dataset", eval_dataset, "Dataset name")->required();
    eval->add_option("--direction", eval_direction, "Task direction, e.g. en-ko")->required();
    eval->add_option("--queries", eval_queries, "Queries JSONL")->required();
    eval->add_option("--corpus", eval_corpus, "Parallel corpus JSONL (document pool)")->required();
    eval->add_option("--qrels", eval_qrels, "TREC qrels (default: gold_doc_id of each query)");
    eval->add_option("--query-embeddings", eval_qemb, "EMB1 query embeddings in the query language")->required();
    eval->add_option("--doc-embeddings", eval_demb, "EMB1 document embeddings in the document language")->required();
    eval->add_option("--k", eval_k, "Rank cutoff")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--model", eval_model, "Model label recorded in the result");
    eval->add_option("--output", eval_out, "Result JSON")->required();
    add_common(eval, common);

    // merge
    auto* merge_cmd = app.add_subcommand("merge", "Weight-average two tensor archives");
    MergeSpec merge_spec;
    fs::path merge_out;
    merge_cmd->add_option("--anchor", merge_spec.anchor, "Anchor archive")->required();
    merge_cmd->add_option("--pair", merge_spec.pair, "Pair archive")->required();
    merge_cmd->add_option("--alpha", merge_spec.alpha, "Weight on the anchor")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    merge_cmd->add_option("--out", merge_out, "Merged archive")->required();
    add_common(merge_cmd, common);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Merge and evaluate every pair of models");
    fs::path sweep_models, sweep_manifest, sweep_out, sweep_merged_dir;
    double sweep_alpha = 0.5;
    sweep_cmd->add_option("--models", sweep_models, "Model list, one 'label path' per line")->required();
    sweep_cmd->add_option("--alpha", sweep_alpha, "Weight on the anchor")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    sweep_cmd->add_option("--eval-manifest", sweep_manifest, "Evaluation manifest JSON")->required();
    sweep_cmd->add_option("--merged-dir", sweep_merged_dir, "Where merged archives go (default: next to --out)");
    sweep_cmd->add_option("--out", sweep_out, "Sweep result JSON")->required();
    add_common(sweep_cmd, common);

    // report
    auto* report_cmd = app.add_subcommand("report", "Aggregate eval results into AVG/OVR tables");
    fs::path report_results, report_out;
    std::string report_baseline, report_format = "markdown", report_bins = "0.5,1.5";
    bool no_deltas = false;
    report_cmd->add_option("--results", report_results, "Directory of eval result JSON files")->required();
    report_cmd->add_option("--baseline", report_baseline, "Baseline model label, or an eval result file naming it");
    report_cmd->add_option("--format", report_format, "markdown|csv|json")->capture_default_str();
    report_cmd->add_option("--bins", report_bins, "Delta bin edges light,medium")->capture_default_str();
    report_cmd->add_flag("--no-deltas", no_deltas, "Omit deltas against the baseline");
    report_cmd->add_option("--out", report_out, "Output file (default: stdout)");
    add_common(report_cmd, common);

    // embed
    auto* embed = app.add_subcommand("embed", "Embed JSONL texts through the remote embedding service");
    fs::path embed_in, embed_out;
    std::string embed_field = "text_en", embed_id_field = "doc_id", embed_endpoint;
    std::size_t embed_batch = 0;
    long embed_timeout_ms = 30000;
    bool embed_normalize = false;
    embed->add_option("--input", embed_in, "JSONL with one text per record")->required();
    embed->add_option("--field", embed_field, "Text field")->capture_default_str();
    embed->add_option("--id-field", embed_id_field, "Id field")->capture_default_str();
    embed->add_option("--endpoint", embed_endpoint, "Service base URL (default: $CLIR_EMBED_ENDPOINT)");
    embed->add_option("--batch-size", embed_batch, "Texts per request (default: $CLIR_EMBED_BATCH or 32)");
    embed->add_option("--timeout-ms", embed_timeout_ms, "Per-request timeout")->capture_default_str();
    embed->add_flag("--normalize", embed_normalize, "L2-normalize returned vectors");
    embed->add_option("--output", embed_out, "EMB1 output")->required();
    add_common(embed, common);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        const auto log = make_logger(common.log_level);
        const auto* sub = app.get_subcommands().front();
        log->info("{} {}", sub->get_name(), sub->config_to_str(true, false));
        log->debug("seed={} parallelism={}", common.seed, common.parallelism);

        if (app.got_subcommand(dedup)) {
            dedup_cfg.seed = common.seed;
            const auto triples = read_triples(dedup_in);
            const auto result = dedup_triples(triples, dedup_cfg, common.parallelism);
            write_triples(dedup_out, result.kept);
            if (!dedup_report.empty()) {
                std::vector<json> dropped;
                for (const auto& d : result.dropped) {
                    dropped.push_back({{"id", d.id}, {"duplicate_of", d.duplicate_of}, {"estimate", d.estimate}});
                }
                write_jsonl(dedup_report, dropped);
            }
            log->info("dedup: kept {} of {}, dropped {}", result.kept.size(), triples.size(), result.dropped.size());
        } else if (app.got_subcommand(mine)) {
            std::tie(mining.rank_lo, mining.rank_hi) = parse_window(window);
            try {
                mining.validate();
            } catch (const PreconditionError& e) {
                throw UsageError(e.what());
            }
            const auto triples = read_triples(mine_triples);
            const auto docs = read_embeddings(mine_docs);
            const auto queries = read_embeddings(mine_queries);
            std::vector<MiningJob> jobs;
            for (const auto& t : triples) jobs.push_back({t.id, t.id});
            const auto results = mine_all(jobs, queries, docs, mining, common.parallelism);
            std::vector<json> out;
            std::size_t short_queries = 0, below = 0;
            for (const auto& r : results) {
                out.push_back(mining_result_to_json(r));
                short_queries += r.shortfall > 0;
                below += r.corpus_below_window;
            }
            write_jsonl(mine_out, out);
            if (below > 0) log->warn("mine: {} queries ranked fewer documents than rank_lo={}", below, mining.rank_lo);
            log->info("mine: {} queries, {} with shortfall", results.size(), short_queries);
        } else if (app.got_subcommand(permute)) {
            std::vector<LangCombo> combos;
            try {
                combos = parse_combo_list(perm_combos);
            } catch (const ParseError& e) {
                throw UsageError(e.what());
            }
            const auto triples = read_triples(perm_triples);
            const auto mined = read_mining_results(perm_negatives);
            const auto corpus = perm_corpus.empty() ? corpus_from_triples(triples) : read_corpus(perm_corpus);
            const auto plan = make_plan(combos, {Language::ko, Language::en});
            const auto datasets = permute_dataset(triples, mined, corpus, plan, common.parallelism);
            for (const auto& w : datasets.warnings) log->warn("{}", w);
            for (const auto& [combo, examples] : datasets.by_combo) {
                std::vector<json> out;
                for (const auto& ex : examples) out.push_back(training_example_to_json(ex));
                write_jsonl(perm_out_dir / dataset_file_name(combo), out);
            }
            log->info("permute: {} triples x {} combos", triples.size(), plan.combos.size());
        } else if (app.got_subcommand(eval)) {
            TaskDirection direction;
            try {
                direction = parse_direction(eval_direction);
            } catch (const ParseError& e) {
                throw UsageError(e.what());
            }
            const auto queries = read_queries(eval_queries);
            const auto corpus = read_corpus(eval_corpus);
            const auto qrels = eval_qrels.empty() ? Qrels::from_gold(queries) : read_qrels(eval_qrels);
            const auto task = make_task(eval_dataset, direction, queries, corpus, qrels);
            auto result = run_task(task, read_embeddings(eval_qemb), read_embeddings(eval_demb), eval_k,
                                   common.parallelism);
            result.model = eval_model;
            write_file(eval_out, eval_result_to_json(result).dump(2) + "\n");
            log->info("eval: {} {} NDCG@{} = {:.4f} ({})", eval_dataset, direction.render(), eval_k,
                      result.mean_ndcg, format_2dp(result.mean_ndcg * 100.0));
        } else if (app.got_subcommand(merge_cmd)) {
            const auto merged = merge(merge_spec, common.parallelism);
            write_tensor_archive(merged, merge_out);
            log->info("merge: {} tensors, {} parameters", merged.tensors.size(), merged.parameter_count());
        } else if (app.got_subcommand(sweep_cmd)) {
            const auto models = read_model_list(sweep_models);
            const auto plan = make_sweep_plan(models, sweep_alpha);
            const auto manifest = read_eval_manifest(sweep_manifest);
            SweepOptions options{sweep_alpha,
                                 sweep_merged_dir.empty() ? sweep_out.parent_path() / "merged" : sweep_merged_dir,
                                 common.parallelism};
            const auto cells = sweep(plan, options, manifest_evaluator(manifest, 1));

            // Anchor rule: the unmerged model with the best mono-lingual score, when the manifest scores them.
            std::optional<std::string> anchor;
            std::vector<std::pair<std::string, DirectionScores>> singles;
            for (const auto& m : plan.models) {
                if (manifest.models.contains(m.label)) singles.emplace_back(m.label, evaluate_model(manifest, m.label));
            }
            if (singles.size() == plan.models.size()) anchor = select_anchor(singles);

            write_file(sweep_out, sweep_to_json(plan, cells, sweep_alpha, anchor).dump(2) + "\n");
            const auto failed = std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.scores; });
            for (const auto& c : cells) {
                if (!c.scores) log->warn("sweep: cell {} failed: {}", c.label, c.error);
            }
            log->info("sweep: {} cells, {} failed", cells.size(), failed);
        } else if (app.got_subcommand(report_cmd)) {
            std::vector<fs::path> files;
            if (!fs::is_directory(report_results)) throw FormatError(report_results.string() + ": not a directory");
            for (const auto& entry : fs::directory_iterator(report_results)) {
                if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            std::vector<EvalResult> results;
            for (const auto& f : files) {
                try {
                    results.push_back(eval_result_from_json(json::parse(read_file(f))));
                } catch (const json::exception& e) {
                    throw FormatError(f.string() + ": " + e.what());
                }
            }
            std::optional<std::string> baseline;
            if (!report_baseline.empty()) {
                baseline = report_baseline;
                if (fs::is_regular_file(report_baseline)) {
                    baseline = eval_result_from_json(json::parse(read_file(report_baseline))).model;
                }
            }
            const auto table = table_from_results(results, baseline);
            ReportOptions options{!no_deltas && baseline.has_value(), parse_bins(report_bins)};
            const auto text = render_table(table, parse_report_format(report_format), options);
            if (report_out.empty()) {
                std::cout << text;
            } else {
                write_file(report_out, text);
            }
        } else if (app.got_subcommand(embed)) {
            EmbedClientConfig cfg = EmbedClientConfig::from_env();
            if (!embed_endpoint.empty()) cfg.endpoint = embed_endpoint;
            if (embed_batch > 0) cfg.batch_size = embed_batch;
            if (cfg.endpoint.empty()) throw UsageError("no endpoint: pass --endpoint or set CLIR_EMBED_ENDPOINT");
            cfg.timeout = std::chrono::milliseconds(embed_timeout_ms);
            cfg.max_concurrency = common.parallelism;
            std::vector<std::string> ids, texts;
            for_each_jsonl(embed_in, [&](const json& r, std::size_t) {
                ids.push_back(r.at(embed_id_field).get<std::string>());
                texts.push_back(r.at(embed_field).get<std::string>());
            });
            auto m = embed_remote(texts, cfg, ids);
            if (embed_normalize) m = normalize_rows(m);
            write_embeddings(embed_out, m);
            log->info("embed: {} vectors of dimension {}", m.rows(), m.dim());
        }
        return kSuccess;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kTransport;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}

}  // namespace clir::cli
