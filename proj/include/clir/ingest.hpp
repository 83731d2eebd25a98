#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "clir/core.hpp"

namespace clir {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSONL plumbing

/// Calls fn(record, line_number) for every non-blank line. Line numbers are 1-based.
void for_each_jsonl(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn);
void write_jsonl(const fs::path& path, const std::vector<json>& records);
std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view bytes);

// ---------------------------------------------------------------------------
// Triples

inline constexpr const char* kQueryKo = "user_query (kor)";
inline constexpr const char* kQueryEn = "user_query (eng)";
inline constexpr const char* kPositiveKo = "positive_document (kor)";
inline constexpr const char* kPositiveEn = "positive_document (eng)";
inline constexpr const char* kNegativeKo = "hard_negative_document (kor)";
inline constexpr const char* kNegativeEn = "hard_negative_document (eng)";

/// Parses one triple record. Records without "id" get `fallback_id`.
/// Unknown top-level keys land in metadata (non-strings as compact JSON).
Triple triple_from_json(const json& record, const std::string& fallback_id);
json triple_to_json(const Triple& triple);

std::vector<Triple> read_triples(const fs::path& path);
void write_triples(const fs::path& path, const std::vector<Triple>& triples);

// ---------------------------------------------------------------------------
// Corpora, queries, qrels

struct CorpusDoc {
    std::string doc_id;
    TextByLang texts;
};

class ParallelCorpus {
public:
    ParallelCorpus() = default;
    explicit ParallelCorpus(std::vector<CorpusDoc> docs);

    const std::vector<CorpusDoc>& docs() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    const CorpusDoc* find(const std::string& doc_id) const;

    /// doc_id -> text in one language.
    std::unordered_map<std::string, std::string> texts(Language lang) const;

private:
    std::vector<CorpusDoc> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

ParallelCorpus read_corpus(const fs::path& path);
void write_corpus(const fs::path& path, const ParallelCorpus& corpus);

/// The English (and Korean) positives of a triple set, keyed by triple id.
ParallelCorpus corpus_from_triples(const std::vector<Triple>& triples);

struct QueryRecord {
    std::string query_id;
    TextByLang texts;
    std::string gold_doc_id;
};

std::vector<QueryRecord> read_queries(const fs::path& path);

/// query_id -> (doc_id -> graded relevance).
class Qrels {
public:
    using Judgments = std::map<std::string, int>;

    void add(const std::string& query_id, const std::string& doc_id, int relevance);
    const Judgments* find(const std::string& query_id) const;
    const std::map<std::string, Judgments>& entries() const { return entries_; }

    /// Every listed query must have at least one judgment with relevance >= 1.
    void validate() const;

    /// Single-gold binary qrels derived from QueryRecord::gold_doc_id.
    static Qrels from_gold(const std::vector<QueryRecord>& queries);

private:
    std::map<std::string, Judgments> entries_;
};

/// TREC format: "query_id 0 doc_id relevance", whitespace separated.
Qrels read_qrels(const fs::path& path);
void write_qrels(const fs::path& path, const Qrels& qrels);

// ---------------------------------------------------------------------------
// EMB1 embedding matrices

class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::vector<std::string> ids, std::vector<float> values, std::size_t dim,
                    bool normalized);

    std::size_t rows() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    bool normalized() const { return normalized_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& values() const { return values_; }

    std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::optional<std::size_t> index_of(const std::string& id) const;
    /// Throws PreconditionError naming the id when absent.
    std::span<const float> row(const std::string& id) const;

    bool operator==(const EmbeddingMatrix& other) const {
        return ids_ == other.ids_ && values_ == other.values_ && dim_ == other.dim_ &&
               normalized_ == other.normalized_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<float> values_;
    std::size_t dim_ = 0;
    bool normalized_ = false;
    std::unordered_map<std::string, std::size_t> index_;
};

/// L2-normalizes every row and sets the normalized flag. Zero rows are an error.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

std::string encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::string_view bytes, const std::string& source = "<memory>");
EmbeddingMatrix read_embeddings(const fs::path& path);
void write_embeddings(const fs::path& path, const EmbeddingMatrix& m);

// ---------------------------------------------------------------------------
// Tensor archives (JSON header + contiguous payload)

enum class DType { F32, F16 };

std::string_view to_string(DType dtype);
std::size_t dtype_size(DType dtype);

float f16_to_f32(std::uint16_t bits);
std::uint16_t f32_to_f16(float value);

struct Tensor {
    DType dtype = DType::F32;
    std::vector<std::int64_t> shape;
    std::vector<std::uint8_t> data;

    std::size_t numel() const;
    /// Values widened to f32.
    std::vector<float> to_f32() const;
    static Tensor from_f32(std::vector<std::int64_t> shape, std::span<const float> values);
    static Tensor from_f16_bits(std::vector<std::int64_t> shape, std::span<const std::uint16_t> bits);

    bool operator==(const Tensor&) const = default;
};

struct TensorArchive {
    std::map<std::string, Tensor> tensors;
    std::map<std::string, std::string> metadata;

    std::size_t parameter_count() const;
    bool operator==(const TensorArchive&) const = default;
};

std::string encode_tensor_archive(const TensorArchive& archive);
TensorArchive decode_tensor_archive(std::string_view bytes, const std::string& source = "<memory>");
TensorArchive read_tensor_archive(const fs::path& path);
void write_tensor_archive(const TensorArchive& archive, const fs::path& path);

// ---------------------------------------------------------------------------
// Remote embedding service: POST {endpoint}/embed {"texts": [...]} -> {"vectors": [[...]]}

struct EmbedClientConfig {
    std::string endpoint;
    std::size_t batch_size = 32;
    std::size_t max_concurrency = 1;
    std::chrono::milliseconds timeout{30000};
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};

    /// Reads CLIR_EMBED_ENDPOINT and CLIR_EMBED_BATCH over the given defaults.
    static EmbedClientConfig from_env(EmbedClientConfig defaults);
    static EmbedClientConfig from_env();
};

/// One vector per text, in input order. `ids` defaults to "0".."n-1".
EmbeddingMatrix embed_remote(const std::vector<std::string>& texts, const EmbedClientConfig& config,
                             std::vector<std::string> ids = {});

}  // namespace clir
