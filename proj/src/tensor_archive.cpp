#include <algorithm>
#include <bit>
#include <numeric>

#include "bytes.hpp"
#include "clir/ingest.hpp"

namespace clir {

std::string_view to_string(DType dtype) { return dtype == DType::F32 ? "F32" : "F16"; }

std::size_t dtype_size(DType dtype) { return dtype == DType::F32 ? 4 : 2; }

float f16_to_f32(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    std::uint32_t exponent = (h >> 10) & 0x1fu;
    std::uint32_t mantissa = h & 0x3ffu;
    std::uint32_t bits = 0;
    if (exponent == 0x1f) {
        bits = sign | 0x7f800000u | (mantissa << 13);
    } else if (exponent != 0) {
        bits = sign | ((exponent + 112) << 23) | (mantissa << 13);
    } else if (mantissa != 0) {
        // subnormal half: renormalize
        exponent = 113;
        while ((mantissa & 0x400u) == 0) {
            mantissa <<= 1;
            --exponent;
        }
        bits = sign | (exponent << 23) | ((mantissa & 0x3ffu) << 13);
    } else {
        bits = sign;
    }
    return std::bit_cast<float>(bits);
}

std::uint16_t f32_to_f16(float value) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    const std::uint16_t sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
    const std::uint32_t abs = bits & 0x7fffffffu;
    if (abs >= 0x7f800000u) {
        // inf stays inf, NaN keeps a quiet payload bit
        return sign | 0x7c00u | (abs > 0x7f800000u ? 0x200u | ((abs >> 13) & 0x3ffu) : 0u);
    }
    if (abs >= 0x477ff000u) return sign | 0x7c00u;  // rounds past the largest half
    if (abs < 0x33000001u) return sign;               // below half the smallest subnormal
    std::uint32_t exponent = abs >> 23;
    std::uint32_t mantissa = (abs & 0x7fffffu) | 0x800000u;
    std::uint32_t shift;
    std::uint32_t half_exp;
    if (exponent < 113) {
        shift = 126 - exponent;
        half_exp = 0;
    } else {
        shift = 13;
        half_exp = exponent - 112;
        mantissa &= 0x7fffffu;
    }
    std::uint32_t result = (half_exp << 10) | (mantissa >> shift);
    const std::uint32_t rem = mantissa & ((1u << shift) - 1);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (result & 1u))) ++result;
    return sign | static_cast<std::uint16_t>(result);
}

std::size_t Tensor::numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t acc, std::int64_t d) { return acc * static_cast<std::size_t>(d); });
}

std::vector<float> Tensor::to_f32() const {
    const std::size_t n = numel();
    std::vector<float> out(n);
    const std::string_view raw(reinterpret_cast<const char*>(data.data()), data.size());
    if (dtype == DType::F32) {
        for (std::size_t i = 0; i < n; ++i) out[i] = detail::get_le<float>(raw, i * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = f16_to_f32(detail::get_le<std::uint16_t>(raw, i * 2));
    }
    return out;
}

Tensor Tensor::from_f32(std::vector<std::int64_t> shape, std::span<const float> values) {
    Tensor t{DType::F32, std::move(shape), {}};
    if (t.numel() != values.size()) {
        throw PreconditionError("tensor shape holds " + std::to_string(t.numel()) + " values, got " +
                                std::to_string(values.size()));
    }
    std::string buf;
    buf.reserve(values.size() * 4);
    for (const float v : values) detail::put_le<float>(buf, v);
    t.data.assign(buf.begin(), buf.end());
    return t;
}

Tensor Tensor::from_f16_bits(std::vector<std::int64_t> shape, std::span<const std::uint16_t> bits) {
    Tensor t{DType::F16, std::move(shape), {}};
    if (t.numel() != bits.size()) {
        throw PreconditionError("tensor shape holds " + std::to_string(t.numel()) + " values, got " +
                                std::to_string(bits.size()));
    }
    std::string buf;
    buf.reserve(bits.size() * 2);
    for (const auto b : bits) detail::put_le<std::uint16_t>(buf, b);
    t.data.assign(buf.begin(), buf.end());
    return t;
}

std::size_t TensorArchive::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tensors) n += t.numel();
    return n;
}

std::string encode_tensor_archive(const TensorArchive& archive) {
    json header = json::object();
    std::size_t offset = 0;
    for (const auto& [name, t] : archive.tensors) {
        if (t.data.size() != t.numel() * dtype_size(t.dtype)) {
            throw PreconditionError("tensor '" + name + "': data length does not match dtype and shape");
        }
        header[name] = {{"dtype", to_string(t.dtype)},
                        {"shape", t.shape},
                        {"data_offsets", {offset, offset + t.data.size()}}};
        offset += t.data.size();
    }
    if (!archive.metadata.empty()) header["__metadata__"] = archive.metadata;

    std::string header_text = header.dump();
    header_text.append((8 - header_text.size() % 8) % 8, ' ');

    std::string out;
    out.reserve(8 + header_text.size() + offset);
    detail::put_le<std::uint64_t>(out, header_text.size());
    out += header_text;
    for (const auto& [_, t] : archive.tensors) {
        out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size());
    }
    return out;
}

TensorArchive decode_tensor_archive(std::string_view bytes, const std::string& source) {
    const auto fail = [&](const std::string& what) -> FormatError {
        return FormatError(source + ": tensor archive " + what);
    };
    if (bytes.size() < 8) throw fail("truncated: missing header length");
    const std::uint64_t header_len = detail::get_le<std::uint64_t>(bytes, 0);
    if (header_len > bytes.size() - 8) throw fail("header length exceeds file size");
    const std::string_view payload = bytes.substr(8 + header_len);

    json header;
    try {
        header = json::parse(bytes.substr(8, header_len));
    } catch (const json::parse_error& e) {
        throw fail(std::string("header is not valid JSON: ") + e.what());
    }
    if (!header.is_object()) throw fail("header must be a JSON object");

    struct Span {
        std::string name;
        std::uint64_t start;
        std::uint64_t end;
    };
    std::vector<Span> spans;
    TensorArchive archive;
    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            if (!entry.is_object()) throw fail("__metadata__ must be an object");
            for (const auto& [k, v] : entry.items()) {
                if (!v.is_string()) throw fail("__metadata__ values must be strings");
                archive.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        const auto where = "tensor '" + name + "': ";
        if (!entry.is_object()) throw fail(where + "entry must be an object");
        const auto dtype_it = entry.find("dtype");
        if (dtype_it == entry.end() || !dtype_it->is_string()) throw fail(where + "missing dtype");
        Tensor t;
        const auto dtype_name = dtype_it->get<std::string>();
        if (dtype_name == "F32") {
            t.dtype = DType::F32;
        } else if (dtype_name == "F16") {
            t.dtype = DType::F16;
        } else {
            throw fail(where + "unknown dtype " + dtype_name);
        }
        const auto shape_it = entry.find("shape");
        if (shape_it == entry.end() || !shape_it->is_array()) throw fail(where + "missing shape");
        for (const auto& dim : *shape_it) {
            if (!dim.is_number_unsigned()) throw fail(where + "shape dimensions must be non-negative integers");
            t.shape.push_back(dim.get<std::int64_t>());
        }
        const auto off_it = entry.find("data_offsets");
        if (off_it == entry.end() || !off_it->is_array() || off_it->size() != 2 ||
            !(*off_it)[0].is_number_unsigned() || !(*off_it)[1].is_number_unsigned()) {
            throw fail(where + "data_offsets must be [start, end]");
        }
        const auto start = (*off_it)[0].get<std::uint64_t>();
        const auto end = (*off_it)[1].get<std::uint64_t>();
        if (end < start) throw fail(where + "data_offsets end precedes start");
        if (end > payload.size()) {
            throw fail(where + "data_offsets [" + std::to_string(start) + ", " + std::to_string(end) +
                       "] out of bounds (payload is " + std::to_string(payload.size()) + " bytes)");
        }
        if (end - start != t.numel() * dtype_size(t.dtype)) {
            throw fail(where + "shape/offset mismatch: " + std::to_string(end - start) + " bytes for " +
                       std::to_string(t.numel()) + " " + dtype_name + " values");
        }
        t.data.assign(payload.begin() + static_cast<std::ptrdiff_t>(start),
                      payload.begin() + static_cast<std::ptrdiff_t>(end));
        spans.push_back({name, start, end});
        archive.tensors.emplace(name, std::move(t));
    }

    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) { return std::tie(a.start, a.end) < std::tie(b.start, b.end); });
    std::uint64_t cursor = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (i > 0 && spans[i].start < spans[i - 1].end) {
            throw fail("overlapping data_offsets: '" + spans[i - 1].name + "' [" +
                       std::to_string(spans[i - 1].start) + ", " + std::to_string(spans[i - 1].end) + "] and '" +
                       spans[i].name + "' [" + std::to_string(spans[i].start) + ", " +
                       std::to_string(spans[i].end) + "]");
        }
        if (spans[i].start != cursor) {
            throw fail("gap in payload before tensor '" + spans[i].name + "' at byte " + std::to_string(cursor));
        }
        cursor = spans[i].end;
    }
    if (cursor != payload.size()) {
        throw fail(std::to_string(payload.size() - cursor) + " trailing payload bytes not owned by any tensor");
    }
    return archive;
}

TensorArchive read_tensor_archive(const fs::path& path) {
    return decode_tensor_archive(read_file(path), path.string());
}

void write_tensor_archive(const TensorArchive& archive, const fs::path& path) {
    write_file(path, encode_tensor_archive(archive));
}

}  // namespace clir
