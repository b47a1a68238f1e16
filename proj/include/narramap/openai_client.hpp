#pragma once

// OpenAI-compatible HTTP backends for chat completions and embeddings.
// Requests carry greedy decoding parameters (temperature 0); retries are
// bounded and apply to transport failures and 5xx responses only.

#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "narramap/extraction.hpp"
#include "narramap/matrix.hpp"

namespace narramap {

struct EndpointConfig {
    std::string base_url;       // e.g. "http://localhost:8080"
    std::string model;
    std::string api_token;      // empty = no Authorization header
    int max_retries = 3;        // total attempts
    int retry_backoff_ms = 250; // multiplied by attempt number
    int timeout_seconds = 120;
};

namespace detail {

struct HttpResult {
    bool ok = false;
    std::string body;  // response body or error description
    int attempts = 0;
};

inline HttpResult post_json_with_retry(const EndpointConfig& cfg, const std::string& path,
                                       const nlohmann::json& payload) {
    const std::string body = payload.dump();
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, cfg.max_retries); ++attempt) {
        httplib::Client client(cfg.base_url);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        httplib::Headers headers;
        if (!cfg.api_token.empty())
            headers.emplace("Authorization", "Bearer " + cfg.api_token);
        auto res = client.Post(path, headers, body, "application/json");
        if (res && res->status >= 200 && res->status < 300)
            return {true, res->body, attempt};
        if (res && res->status >= 400 && res->status < 500)
            return {false, "HTTP " + std::to_string(res->status) + ": " + res->body, attempt};
        last_error = res ? ("HTTP " + std::to_string(res->status))
                         : ("transport error: " + httplib::to_string(res.error()));
        if (attempt < cfg.max_retries && cfg.retry_backoff_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.retry_backoff_ms * attempt));
    }
    return {false, last_error, std::max(1, cfg.max_retries)};
}

}  // namespace detail

class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(EndpointConfig config) : config_(std::move(config)) {}

    ChatCompletion complete(const std::string& prompt, const std::string&) override {
        nlohmann::json payload;
        payload["model"] = config_.model;
        payload["messages"] = nlohmann::json::array({
            nlohmann::json{{"role", "user"}, {"content", prompt}},
        });
        // greedy decoding: no sampling
        payload["temperature"] = 0.0;
        payload["top_p"] = 1.0;

        const auto res = detail::post_json_with_retry(config_, "/v1/chat/completions", payload);
        if (!res.ok) return {false, res.body, res.attempts};
        try {
            const auto obj = nlohmann::json::parse(res.body);
            const auto& content = obj.at("choices").at(0).at("message").at("content");
            return {true, content.get<std::string>(), res.attempts};
        } catch (const nlohmann::json::exception& e) {
            return {false, std::string("malformed chat response: ") + e.what(), res.attempts};
        }
    }

    std::string model_id() const override { return config_.model; }

private:
    EndpointConfig config_;
};

// Raised when the endpoint's vector dimension contradicts the configured one;
// always a configuration problem, never retried.
class DimensionMismatchError : public std::runtime_error {
public:
    DimensionMismatchError(std::size_t expected, std::size_t got)
        : std::runtime_error("embedding dimension mismatch: configured " +
                             std::to_string(expected) + ", endpoint returned " +
                             std::to_string(got)),
          expected(expected),
          got(got) {}
    std::size_t expected;
    std::size_t got;
};

struct EmbedBatchResult {
    bool ok = false;
    std::vector<Vec> vectors;  // aligned with the input batch on success
    std::string error;
    int attempts = 0;
};

// Transport for embeddings; thread safety as for ChatBackend.
class EmbeddingsBackend {
public:
    virtual ~EmbeddingsBackend() = default;
    virtual EmbedBatchResult embed_batch(const std::vector<std::string>& texts) = 0;
    virtual std::string model_id() const = 0;
    virtual std::size_t dimension() const = 0;
};

class HttpEmbeddingsBackend : public EmbeddingsBackend {
public:
    HttpEmbeddingsBackend(EndpointConfig config, std::size_t dimension)
        : config_(std::move(config)), dimension_(dimension) {}

    EmbedBatchResult embed_batch(const std::vector<std::string>& texts) override {
        nlohmann::json payload;
        payload["model"] = config_.model;
        payload["input"] = texts;
        const auto res = detail::post_json_with_retry(config_, "/v1/embeddings", payload);
        if (!res.ok) return {false, {}, res.body, res.attempts};

        EmbedBatchResult out;
        out.attempts = res.attempts;
        try {
            const auto obj = nlohmann::json::parse(res.body);
            const auto& data = obj.at("data");
            out.vectors.resize(texts.size());
            std::vector<bool> seen(texts.size(), false);
            for (const auto& item : data) {
                const std::size_t idx = item.at("index").get<std::size_t>();
                if (idx >= texts.size()) throw std::runtime_error("embedding index out of range");
                out.vectors[idx] = item.at("embedding").get<Vec>();
                seen[idx] = true;
            }
            for (std::size_t i = 0; i < texts.size(); ++i)
                if (!seen[i]) throw std::runtime_error("embedding missing for input " + std::to_string(i));
        } catch (const nlohmann::json::exception& e) {
            return {false, {}, std::string("malformed embeddings response: ") + e.what(), res.attempts};
        } catch (const std::runtime_error& e) {
            return {false, {}, e.what(), res.attempts};
        }
        for (const auto& v : out.vectors)
            if (v.size() != dimension_) throw DimensionMismatchError(dimension_, v.size());
        out.ok = true;
        return out;
    }

    std::string model_id() const override { return config_.model; }
    std::size_t dimension() const override { return dimension_; }

private:
    EndpointConfig config_;
    std::size_t dimension_;
};

}  // namespace narramap
