#include <cctype>
#include <algorithm>
#include <fstream>
#include <sstream>

#include "clir/ingest.hpp"

namespace clir {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(path.string() + ": write failed");
}

void for_each_jsonl(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON (" +
                              e.what() + ")");
        }
        try {
            fn(record, line_no);
        } catch (const DataError& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void write_jsonl(const fs::path& path, const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    write_file(path, out);
}

namespace {

std::string require_string(const json& record, const char* key) {
    const auto it = record.find(key);
    if (it == record.end()) throw FormatError(std::string("missing required field \"") + key + "\"");
    if (!it->is_string()) throw FormatError(std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
}

std::string stringify(const json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

}  // namespace

Triple triple_from_json(const json& record, const std::string& fallback_id) {
    if (!record.is_object()) throw FormatError("triple record must be a JSON object");
    Triple t;
    t.query = {require_string(record, kQueryKo), require_string(record, kQueryEn)};
    t.positive = {require_string(record, kPositiveKo), require_string(record, kPositiveEn)};
    t.synthetic_negative = {require_string(record, kNegativeKo), require_string(record, kNegativeEn)};
    t.id = record.contains("id") ? stringify(record["id"]) : fallback_id;

    static const std::array<std::string_view, 8> kKnown{kQueryKo,    kQueryEn,    kPositiveKo, kPositiveEn,
                                                        kNegativeKo, kNegativeEn, "id",        "metadata"};
    for (const auto& [key, value] : record.items()) {
        if (key == "metadata") {
            if (!value.is_object()) throw FormatError("field \"metadata\" must be an object");
            for (const auto& [mk, mv] : value.items()) t.metadata[mk] = stringify(mv);
        } else if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
            t.metadata[key] = stringify(value);
        }
    }
    validate_triple(t);
    return t;
}

json triple_to_json(const Triple& t) {
    json j = json::object();
    j["id"] = t.id;
    j[kQueryKo] = t.query[Language::ko];
    j[kQueryEn] = t.query[Language::en];
    j[kPositiveKo] = t.positive[Language::ko];
    j[kPositiveEn] = t.positive[Language::en];
    j[kNegativeKo] = t.synthetic_negative[Language::ko];
    j[kNegativeEn] = t.synthetic_negative[Language::en];
    if (!t.metadata.empty()) j["metadata"] = t.metadata;
    return j;
}

std::vector<Triple> read_triples(const fs::path& path) {
    std::vector<Triple> out;
    std::unordered_map<std::string, std::size_t> seen;
    for_each_jsonl(path, [&](const json& record, std::size_t line_no) {
        auto t = triple_from_json(record, std::to_string(line_no));
        if (const auto [it, fresh] = seen.emplace(t.id, line_no); !fresh) {
            throw FormatError("duplicate triple id '" + t.id + "' (first seen on line " +
                              std::to_string(it->second) + ")");
        }
        out.push_back(std::move(t));
    });
    return out;
}

void write_triples(const fs::path& path, const std::vector<Triple>& triples) {
    std::vector<json> records;
    records.reserve(triples.size());
    for (const auto& t : triples) records.push_back(triple_to_json(t));
    write_jsonl(path, records);
}

// ---------------------------------------------------------------------------

ParallelCorpus::ParallelCorpus(std::vector<CorpusDoc> docs) : docs_(std::move(docs)) {
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const auto& d = docs_[i];
        if (!index_.emplace(d.doc_id, i).second) {
            throw PreconditionError("duplicate doc_id '" + d.doc_id + "'");
        }
        for (const auto lang : kLanguages) {
            if (d.texts[lang].empty()) {
                throw PreconditionError("doc '" + d.doc_id + "' has empty " +
                                        std::string(to_string(lang)) + " text");
            }
        }
    }
}

const CorpusDoc* ParallelCorpus::find(const std::string& doc_id) const {
    const auto it = index_.find(doc_id);
    return it == index_.end() ? nullptr : &docs_[it->second];
}

std::unordered_map<std::string, std::string> ParallelCorpus::texts(Language lang) const {
    std::unordered_map<std::string, std::string> out;
    out.reserve(docs_.size());
    for (const auto& d : docs_) out.emplace(d.doc_id, d.texts[lang]);
    return out;
}

ParallelCorpus read_corpus(const fs::path& path) {
    std::vector<CorpusDoc> docs;
    for_each_jsonl(path, [&](const json& r, std::size_t) {
        docs.push_back({require_string(r, "doc_id"), {require_string(r, "text_ko"), require_string(r, "text_en")}});
    });
    try {
        return ParallelCorpus(std::move(docs));
    } catch (const PreconditionError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_corpus(const fs::path& path, const ParallelCorpus& corpus) {
    std::vector<json> records;
    for (const auto& d : corpus.docs()) {
        records.push_back({{"doc_id", d.doc_id},
                           {"text_ko", d.texts[Language::ko]},
                           {"text_en", d.texts[Language::en]}});
    }
    write_jsonl(path, records);
}

ParallelCorpus corpus_from_triples(const std::vector<Triple>& triples) {
    std::vector<CorpusDoc> docs;
    docs.reserve(triples.size());
    for (const auto& t : triples) docs.push_back({t.id, t.positive});
    return ParallelCorpus(std::move(docs));
}

std::vector<QueryRecord> read_queries(const fs::path& path) {
    std::vector<QueryRecord> out;
    std::unordered_map<std::string, std::size_t> seen;
    for_each_jsonl(path, [&](const json& r, std::size_t line_no) {
        QueryRecord q{require_string(r, "query_id"),
                      {require_string(r, "text_ko"), require_string(r, "text_en")},
                      r.contains("gold_doc_id") ? require_string(r, "gold_doc_id") : std::string{}};
        if (!seen.emplace(q.query_id, line_no).second) {
            throw FormatError("duplicate query_id '" + q.query_id + "'");
        }
        out.push_back(std::move(q));
    });
    return out;
}

// ---------------------------------------------------------------------------

void Qrels::add(const std::string& query_id, const std::string& doc_id, int relevance) {
    if (relevance < 0) {
        throw PreconditionError("negative relevance for (" + query_id + ", " + doc_id + ")");
    }
    entries_[query_id][doc_id] = relevance;
}

const Qrels::Judgments* Qrels::find(const std::string& query_id) const {
    const auto it = entries_.find(query_id);
    return it == entries_.end() ? nullptr : &it->second;
}

void Qrels::validate() const {
    for (const auto& [qid, judgments] : entries_) {
        const bool any = std::any_of(judgments.begin(), judgments.end(),
                                     [](const auto& kv) { return kv.second >= 1; });
        if (!any) throw PreconditionError("query '" + qid + "' has no judgment with relevance >= 1");
    }
}

Qrels Qrels::from_gold(const std::vector<QueryRecord>& queries) {
    Qrels q;
    for (const auto& rec : queries) {
        if (rec.gold_doc_id.empty()) {
            throw PreconditionError("query '" + rec.query_id + "' has no gold_doc_id and no qrels were given");
        }
        q.add(rec.query_id, rec.gold_doc_id, 1);
    }
    return q;
}

Qrels read_qrels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string qid, iter, doc, rel_text, extra;
        if (!(ss >> qid)) continue;
        if (!(ss >> iter >> doc >> rel_text) || (ss >> extra)) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'query_id 0 doc_id relevance'");
        }
        int rel = 0;
        try {
            std::size_t used = 0;
            rel = std::stoi(rel_text, &used);
            if (used != rel_text.size()) throw std::invalid_argument(rel_text);
        } catch (const std::exception&) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": relevance '" + rel_text +
                              "' is not an integer");
        }
        if (rel < 0) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": negative relevance");
        }
        qrels.add(qid, doc, rel);
    }
    try {
        qrels.validate();
    } catch (const PreconditionError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return qrels;
}

void write_qrels(const fs::path& path, const Qrels& qrels) {
    std::string out;
    for (const auto& [qid, judgments] : qrels.entries()) {
        for (const auto& [doc, rel] : judgments) {
            out += qid + " 0 " + doc + " " + std::to_string(rel) + "\n";
        }
    }
    write_file(path, out);
}

}  // namespace clir
