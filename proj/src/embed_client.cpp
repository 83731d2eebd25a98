#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include <httplib.h>

#include "clir/ingest.hpp"

namespace clir {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // prefix + "/embed"
};

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw PreconditionError("embedding endpoint '" + url + "' must start with http://");
    }
    if (url.substr(0, scheme_end) != "http") {
        throw PreconditionError("embedding endpoint '" + url + "': only http is supported");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    ep.path = prefix + "/embed";
    return ep;
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

struct Batch {
    std::size_t begin;
    std::size_t end;
};

std::vector<std::vector<float>> post_batch(const Endpoint& ep, const EmbedClientConfig& cfg,
                                           const std::vector<std::string>& texts, Batch batch) {
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const json body = {{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(batch.begin),
                                                          texts.begin() + static_cast<std::ptrdiff_t>(batch.end))}};
    const std::string payload = body.dump();
    const std::string where = ep.origin + ep.path + " (texts " + std::to_string(batch.begin) + ".." +
                              std::to_string(batch.end - 1) + ")";

    std::string last_error;
    auto backoff = cfg.initial_backoff;
    for (int attempt = 1; attempt <= cfg.attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const auto res = client.Post(ep.path, payload, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status);
            if (transient_status(res->status)) continue;
            break;
        }
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::parse_error&) {
            throw ProtocolError(where + ": response is not JSON");
        }
        const auto vit = reply.find("vectors");
        if (vit == reply.end() || !vit->is_array()) {
            throw ProtocolError(where + ": response lacks a \"vectors\" array");
        }
        if (vit->size() != batch.end - batch.begin) {
            throw ProtocolError(where + ": expected " + std::to_string(batch.end - batch.begin) +
                                " vectors, got " + std::to_string(vit->size()));
        }
        std::vector<std::vector<float>> vectors;
        vectors.reserve(vit->size());
        for (const auto& v : *vit) {
            if (!v.is_array()) throw ProtocolError(where + ": vector entries must be arrays");
            std::vector<float> row;
            row.reserve(v.size());
            for (const auto& x : v) {
                if (!x.is_number()) throw ProtocolError(where + ": vector components must be numbers");
                row.push_back(x.get<float>());
            }
            vectors.push_back(std::move(row));
        }
        return vectors;
    }
    throw TransportError(where + ": " + last_error + " after " + std::to_string(cfg.attempts) + " attempt(s)");
}

}  // namespace

EmbedClientConfig EmbedClientConfig::from_env(EmbedClientConfig defaults) {
    if (const char* ep = std::getenv("CLIR_EMBED_ENDPOINT"); ep && *ep) defaults.endpoint = ep;
    if (const char* batch = std::getenv("CLIR_EMBED_BATCH"); batch && *batch) {
        try {
            const long v = std::stol(batch);
            if (v <= 0) throw std::invalid_argument(batch);
            defaults.batch_size = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw UsageError(std::string("CLIR_EMBED_BATCH must be a positive integer, got '") + batch + "'");
        }
    }
    return defaults;
}

EmbedClientConfig EmbedClientConfig::from_env() { return from_env(EmbedClientConfig{}); }

EmbeddingMatrix embed_remote(const std::vector<std::string>& texts, const EmbedClientConfig& config,
                             std::vector<std::string> ids) {
    if (texts.empty()) throw PreconditionError("embed_remote: text list is empty");
    if (config.batch_size == 0) throw PreconditionError("embed_remote: batch_size must be positive");
    if (config.attempts < 1) throw PreconditionError("embed_remote: attempts must be at least 1");
    if (ids.empty()) {
        ids.reserve(texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) ids.push_back(std::to_string(i));
    }
    if (ids.size() != texts.size()) throw PreconditionError("embed_remote: ids and texts differ in length");
    const Endpoint ep = parse_endpoint(config.endpoint);

    std::vector<Batch> batches;
    for (std::size_t b = 0; b < texts.size(); b += config.batch_size) {
        batches.push_back({b, std::min(texts.size(), b + config.batch_size)});
    }

    std::vector<std::vector<std::vector<float>>> results(batches.size());
    std::vector<std::exception_ptr> errors(batches.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < batches.size(); i = next++) {
            try {
                results[i] = post_batch(ep, config, texts, batches[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(config.max_concurrency, 1, batches.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::optional<std::size_t> dim;
    std::vector<float> values;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        for (const auto& row : results[b]) {
            if (!dim) dim = row.size();
            if (row.size() != *dim || row.empty()) {
                throw ProtocolError("embedding service returned dimension " + std::to_string(row.size()) +
                                    " in batch " + std::to_string(b) + ", expected " + std::to_string(*dim));
            }
            values.insert(values.end(), row.begin(), row.end());
        }
    }
    return EmbeddingMatrix(std::move(ids), std::move(values), *dim, false);
}

}  // namespace clir
