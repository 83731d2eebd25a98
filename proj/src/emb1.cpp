// EMB1 layout (little-endian):
//   0  "EMB1"
//   4  u8 version (1), u8 normalized, u16 reserved (0)
//   8  u32 rows, u32 dim
//   16 rows*dim f32
//   .. JSON array of row ids
//   .. u32 byte length of the JSON array

#include <cmath>

#include "bytes.hpp"
#include "clir/ingest.hpp"

namespace clir {

namespace {

constexpr std::size_t kHeaderBytes = 16;
constexpr double kNormTolerance = 1e-4;

double row_norm(std::span<const float> row) {
    double sum = 0.0;
    for (const float v : row) sum += static_cast<double>(v) * v;
    return std::sqrt(sum);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::vector<float> values, std::size_t dim,
                                 bool normalized)
    : ids_(std::move(ids)), values_(std::move(values)), dim_(dim), normalized_(normalized) {
    if (values_.size() != ids_.size() * dim_) {
        throw PreconditionError("embedding matrix: " + std::to_string(values_.size()) + " values for " +
                                std::to_string(ids_.size()) + " rows of dimension " + std::to_string(dim_));
    }
    if (!ids_.empty() && dim_ == 0) throw PreconditionError("embedding matrix: dimension must be positive");
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) {
            throw PreconditionError("embedding matrix: duplicate id '" + ids_[i] + "'");
        }
    }
    if (normalized_) {
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            const double n = row_norm(row(i));
            if (std::fabs(n - 1.0) > kNormTolerance) {
                throw PreconditionError("embedding matrix flagged normalized but row '" + ids_[i] +
                                        "' has norm " + std::to_string(n));
            }
        }
    }
}

std::optional<std::size_t> EmbeddingMatrix::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingMatrix::row(const std::string& id) const {
    const auto i = index_of(id);
    if (!i) throw PreconditionError("no embedding for id '" + id + "'");
    return row(*i);
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
    std::vector<float> values(m.values().size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        const double n = row_norm(r);
        if (n == 0.0) throw PreconditionError("cannot normalize zero-norm row '" + m.ids()[i] + "'");
        for (std::size_t j = 0; j < m.dim(); ++j) {
            values[i * m.dim() + j] = static_cast<float>(r[j] / n);
        }
    }
    return EmbeddingMatrix(m.ids(), std::move(values), m.dim(), true);
}

std::string encode_embeddings(const EmbeddingMatrix& m) {
    const std::string ids = json(m.ids()).dump();
    std::string out;
    out.reserve(kHeaderBytes + m.values().size() * 4 + ids.size() + 4);
    out += "EMB1";
    detail::put_le<std::uint8_t>(out, 1);
    detail::put_le<std::uint8_t>(out, m.normalized() ? 1 : 0);
    detail::put_le<std::uint16_t>(out, 0);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
    for (const float v : m.values()) detail::put_le<float>(out, v);
    out += ids;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
    return out;
}

EmbeddingMatrix decode_embeddings(std::string_view bytes, const std::string& source) {
    const auto fail = [&](const std::string& what) -> FormatError {
        return FormatError(source + ": EMB1 " + what);
    };
    if (bytes.size() < kHeaderBytes) throw fail("truncated header (" + std::to_string(bytes.size()) + " bytes)");
    if (bytes.substr(0, 4) != "EMB1") throw fail("magic mismatch");
    const auto version = detail::get_le<std::uint8_t>(bytes, 4);
    const auto normalized = detail::get_le<std::uint8_t>(bytes, 5);
    const auto reserved = detail::get_le<std::uint16_t>(bytes, 6);
    if (version != 1) throw fail("unsupported version " + std::to_string(version));
    if (normalized > 1) throw fail("normalized flag must be 0 or 1");
    if (reserved != 0) throw fail("reserved field must be zero");
    const std::uint64_t rows = detail::get_le<std::uint32_t>(bytes, 8);
    const std::uint64_t dim = detail::get_le<std::uint32_t>(bytes, 12);
    const std::uint64_t payload = rows * dim * 4;

    if (bytes.size() < kHeaderBytes + payload + 4) {
        throw fail("truncated payload: " + std::to_string(rows) + "x" + std::to_string(dim) + " needs " +
                   std::to_string(payload) + " bytes plus trailer, file has " + std::to_string(bytes.size()));
    }
    const std::uint64_t ids_len = detail::get_le<std::uint32_t>(bytes, bytes.size() - 4);
    const std::uint64_t expected = kHeaderBytes + payload + ids_len + 4;
    if (bytes.size() < expected) {
        throw fail("truncated payload: expected " + std::to_string(expected) + " bytes, file has " +
                   std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw fail("size mismatch: expected " + std::to_string(expected) + " bytes, file has " +
                   std::to_string(bytes.size()));
    }

    std::vector<float> values(rows * dim);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = detail::get_le<float>(bytes, kHeaderBytes + i * 4);
    }

    json ids_json;
    try {
        ids_json = json::parse(bytes.substr(kHeaderBytes + payload, ids_len));
    } catch (const json::parse_error& e) {
        throw fail(std::string("id list is not valid JSON: ") + e.what());
    }
    if (!ids_json.is_array()) throw fail("id list must be a JSON array");
    if (ids_json.size() != rows) {
        throw fail("id-count mismatch: header says " + std::to_string(rows) + " rows, id list has " +
                   std::to_string(ids_json.size()));
    }
    std::vector<std::string> ids;
    ids.reserve(rows);
    for (const auto& id : ids_json) {
        if (!id.is_string()) throw fail("ids must be strings");
        ids.push_back(id.get<std::string>());
    }
    try {
        return EmbeddingMatrix(std::move(ids), std::move(values), dim, normalized == 1);
    } catch (const PreconditionError& e) {
        throw fail(e.what());
    }
}

EmbeddingMatrix read_embeddings(const fs::path& path) {
    return decode_embeddings(read_file(path), path.string());
}

void write_embeddings(const fs::path& path, const EmbeddingMatrix& m) {
    write_file(path, encode_embeddings(m));
}

}  // namespace clir
