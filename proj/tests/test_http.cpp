#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "narramap/embedder.hpp"
#include "narramap/openai_client.hpp"
#include "support.hpp"

using namespace narramap;

namespace {

// Local OpenAI-compatible endpoint for exercising the HTTP clients.
class TestServer {
public:
    TestServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            chat_requests.fetch_add(1);
            last_chat_body = req.body;
            if (chat_failures_remaining.load() > 0) {
                chat_failures_remaining.fetch_sub(1);
                res.status = 500;
                res.set_content("simulated outage", "text/plain");
                return;
            }
            nlohmann::json reply;
            reply["choices"] = nlohmann::json::array(
                {{{"message", {{"role", "assistant"}, {"content", chat_content}}}}});
            res.set_content(reply.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            embed_requests.fetch_add(1);
            const auto payload = nlohmann::json::parse(req.body);
            nlohmann::json reply;
            reply["data"] = nlohmann::json::array();
            const auto& inputs = payload.at("input");
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                // reversed index order in the response; clients must realign
                const std::size_t idx = inputs.size() - 1 - i;
                reply["data"].push_back(
                    {{"index", idx},
                     {"embedding", hash_embedding(inputs[idx].get<std::string>(), embed_dim, 0)}});
            }
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> chat_requests{0};
    std::atomic<int> embed_requests{0};
    std::atomic<int> chat_failures_remaining{0};
    std::string chat_content =
        R"({"Subject":["Arcadia"],"Object":["Borealis"],"Sender":[],"Receiver":[],"Helper":[],"Opponent":[]})";
    std::size_t embed_dim = 16;
    std::string last_chat_body;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

EndpointConfig endpoint_for(const TestServer& server, const std::string& model) {
    EndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = model;
    cfg.max_retries = 3;
    cfg.retry_backoff_ms = 0;
    return cfg;
}

}  // namespace

TEST_CASE("chat backend sends greedy decoding parameters and parses the reply") {
    TestServer server;
    HttpChatBackend backend(endpoint_for(server, "test-model"));
    const auto result = backend.complete("What are the main actants?", "tag");
    REQUIRE(result.ok);
    CHECK(result.text.find("Arcadia") != std::string::npos);

    const auto payload = nlohmann::json::parse(server.last_chat_body);
    CHECK(payload.at("model") == "test-model");
    CHECK(payload.at("temperature").get<double>() == 0.0);
    CHECK(payload.at("messages").at(0).at("role") == "user");
    CHECK(payload.at("messages").at(0).at("content").get<std::string>().find("actants") !=
          std::string::npos);
}

TEST_CASE("transient 5xx responses are retried up to the bound") {
    TestServer server;
    server.chat_failures_remaining = 2;
    HttpChatBackend backend(endpoint_for(server, "m"));
    const auto ok = backend.complete("prompt", "t");
    CHECK(ok.ok);
    CHECK(ok.attempts == 3);
    CHECK(server.chat_requests.load() == 3);

    SUBCASE("persistent failure surfaces as an error after max retries") {
        server.chat_failures_remaining = 99;
        const auto fail = backend.complete("prompt", "t");
        CHECK_FALSE(fail.ok);
        CHECK(fail.attempts == 3);
    }
}

TEST_CASE("extract_corpus over HTTP caches responses across runs") {
    TestServer server;
    support::TempDir tmp("httpcache");
    FileCache cache(tmp.path() / "cache");
    HttpChatBackend backend(endpoint_for(server, "m"));

    Corpus corpus;
    for (int i = 0; i < 3; ++i) {
        Article a;
        a.id = "h" + std::to_string(i);
        a.source = "s";
        a.body = "Body " + std::to_string(i);
        corpus.articles.push_back(a);
    }
    const auto first = extract_corpus(corpus, backend, cache, {.concurrency = 2});
    CHECK(server.chat_requests.load() == 3);
    for (const auto& rec : first) CHECK(rec.status == ExtractionStatus::Ok);

    const auto second = extract_corpus(corpus, backend, cache, {.concurrency = 2});
    CHECK(server.chat_requests.load() == 3);  // zero new network calls
    for (const auto& rec : second) CHECK(rec.from_cache);
}

TEST_CASE("embeddings client realigns out-of-order responses") {
    TestServer server;
    support::TempDir tmp("embedhttp");
    FileCache cache(tmp.path() / "cache");
    HttpEmbeddingsBackend backend(endpoint_for(server, "embed-model"), 16);

    const std::vector<std::string> texts = {"alpha", "beta", "gamma"};
    const auto outcome = embed_texts(texts, backend, cache, {.batch_size = 3});
    REQUIRE(outcome.failures.empty());
    for (std::size_t i = 0; i < texts.size(); ++i)
        CHECK(outcome.vectors[i] == hash_embedding(texts[i], 16, 0));

    SUBCASE("second run is served from the cache") {
        const int before = server.embed_requests.load();
        const auto again = embed_texts(texts, backend, cache, {.batch_size = 3});
        CHECK(server.embed_requests.load() == before);
        CHECK(again.cache_hits == 3);
    }
}

TEST_CASE("embeddings dimension mismatch is a fatal configuration error") {
    TestServer server;
    server.embed_dim = 8;  // endpoint disagrees with the configured 16
    support::TempDir tmp("embedbad");
    FileCache cache(tmp.path() / "cache");
    HttpEmbeddingsBackend backend(endpoint_for(server, "embed-model"), 16);
    CHECK_THROWS_AS(embed_texts({"text"}, backend, cache), DimensionMismatchError);
}
