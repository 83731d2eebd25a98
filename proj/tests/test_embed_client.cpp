#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

#include <httplib.h>

#include "clir/ingest.hpp"

using namespace clir;

namespace {

/// Local embedding service. `reply` maps (request number, texts) to a status and body.
class FakeService {
public:
    using Reply = std::function<std::pair<int, json>(int request, const std::vector<std::string>& texts)>;

    explicit FakeService(Reply reply) : reply_(std::move(reply)) {
        server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = ++requests_;
            const auto texts = json::parse(req.body).at("texts").get<std::vector<std::string>>();
            const auto [status, body] = reply_(n, texts);
            res.status = status;
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeService() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int requests() const { return requests_; }

private:
    Reply reply_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
};

/// Vector [value of text, 1, 0, ...] of the given dimension.
json vectors_for(const std::vector<std::string>& texts, std::size_t dim) {
    json out = json::array();
    for (const auto& t : texts) {
        std::vector<float> v(dim, 0.0f);
        v[0] = std::stof(t);
        v[1] = 1.0f;
        out.push_back(v);
    }
    return {{"vectors", out}};
}

EmbedClientConfig config(const FakeService& svc, std::size_t batch) {
    EmbedClientConfig cfg;
    cfg.endpoint = svc.endpoint();
    cfg.batch_size = batch;
    cfg.initial_backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::milliseconds(5000);
    return cfg;
}

const std::vector<std::string> kFive{"0", "1", "2", "3", "4"};

}  // namespace

TEST_CASE("5 texts at batch size 2 take 3 requests and keep input order") {
    for (const std::size_t concurrency : {1u, 3u}) {
        FakeService svc([](int, const auto& texts) { return std::pair{200, vectors_for(texts, 4)}; });
        auto cfg = config(svc, 2);
        cfg.max_concurrency = concurrency;
        const auto m = embed_remote(kFive, cfg);
        CHECK(svc.requests() == 3);
        REQUIRE(m.rows() == 5);
        CHECK(m.dim() == 4);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(m.ids()[i] == std::to_string(i));
            CHECK(m.row(i)[0] == static_cast<float>(i));
        }
    }
}

TEST_CASE("caller-provided ids are attached in order") {
    FakeService svc([](int, const auto& texts) { return std::pair{200, vectors_for(texts, 2)}; });
    const auto m = embed_remote({"7", "8"}, config(svc, 1), {"x", "y"});
    CHECK(m.row("y")[0] == 8.0f);
}

TEST_CASE("dimension disagreement across batches is a protocol error") {
    FakeService svc([](int n, const auto& texts) { return std::pair{200, vectors_for(texts, n == 1 ? 4 : 5)}; });
    CHECK_THROWS_AS(embed_remote(kFive, config(svc, 2)), ProtocolError);
}

TEST_CASE("wrong vector count and malformed replies are protocol errors") {
    FakeService short_reply([](int, const auto&) { return std::pair{200, vectors_for({"1"}, 3)}; });
    CHECK_THROWS_AS(embed_remote({"1", "2"}, config(short_reply, 2)), ProtocolError);
    FakeService no_vectors([](int, const auto&) { return std::pair{200, json{{"oops", 1}}}; });
    CHECK_THROWS_AS(embed_remote({"1"}, config(no_vectors, 2)), ProtocolError);
}

TEST_CASE("empty text list is a precondition error") {
    EmbedClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:9";
    CHECK_THROWS_AS(embed_remote({}, cfg), PreconditionError);
}

TEST_CASE("transient failures are retried with backoff") {
    FakeService svc([](int n, const auto& texts) {
        if (n <= 2) return std::pair{503, json{{"error", "busy"}}};
        return std::pair{200, vectors_for(texts, 3)};
    });
    const auto m = embed_remote({"1", "2"}, config(svc, 4));
    CHECK(svc.requests() == 3);
    CHECK(m.rows() == 2);
}

TEST_CASE("exhausted retries raise a transport error") {
    FakeService svc([](int, const auto&) { return std::pair{500, json{}}; });
    auto cfg = config(svc, 4);
    cfg.attempts = 2;
    CHECK_THROWS_AS(embed_remote({"1"}, cfg), TransportError);
    CHECK(svc.requests() == 2);
}

TEST_CASE("client errors are not retried") {
    FakeService svc([](int, const auto&) { return std::pair{400, json{}}; });
    CHECK_THROWS_WITH_AS(embed_remote({"1"}, config(svc, 4)), doctest::Contains("HTTP 400"), TransportError);
    CHECK(svc.requests() == 1);
}

TEST_CASE("unreachable endpoint is a transport error") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    EmbedClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.attempts = 2;
    cfg.initial_backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::milliseconds(500);
    CHECK_THROWS_AS(embed_remote({"1"}, cfg), TransportError);
}

TEST_CASE("config from environment") {
    ::setenv("CLIR_EMBED_ENDPOINT", "http://example.invalid:1234", 1);
    ::setenv("CLIR_EMBED_BATCH", "7", 1);
    const auto cfg = EmbedClientConfig::from_env();
    CHECK(cfg.endpoint == "http://example.invalid:1234");
    CHECK(cfg.batch_size == 7);
    ::setenv("CLIR_EMBED_BATCH", "zero", 1);
    CHECK_THROWS_AS(EmbedClientConfig::from_env(), UsageError);
    ::unsetenv("CLIR_EMBED_ENDPOINT");
    ::unsetenv("CLIR_EMBED_BATCH");
}
