#pragma once

// Run configuration: a single JSON file drives every pipeline command.
// Validation collects every problem before failing so a bad config is fixed
// in one round trip. Endpoint tokens come from the environment, never from
// the file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "narramap/narrative.hpp"
#include "narramap/openai_client.hpp"
#include "narramap/umap.hpp"

namespace narramap {

struct ChatConfig {
    std::string mode = "stub";  // "http" | "stub"
    std::string base_url;
    std::string model = "stub-model";
    std::string token_env = "NARRAMAP_CHAT_TOKEN";
    std::string stub_dir;
    int max_retries = 3;
    int concurrency = 4;
    // bodies beyond this many characters are cut and the record flagged;
    // 0 disables. Default sized for an 8k-token context window.
    std::size_t truncate_chars = 24000;
    int retry_backoff_ms = 250;
};

struct EmbedConfig {
    std::string mode = "hash";  // "http" | "hash"
    std::string base_url;
    std::string model = "hash";
    std::string token_env = "NARRAMAP_EMBED_TOKEN";
    std::size_t dim = 1024;
    std::string prefix;  // e.g. "query: " for E5-style models
    int batch_size = 16;
    int concurrency = 4;
    int max_retries = 3;
    int retry_backoff_ms = 250;
};

struct RunConfig {
    std::string corpus_path;
    std::vector<std::string> keywords;  // empty = no filtering at ingest
    ChatConfig chat;
    EmbedConfig embed;
    std::size_t svd_dim = 34;
    FitScope fit_scope = FitScope::PerRole;
    UmapParams umap;
    std::size_t k_min = 2;
    std::size_t k_max = 40;
    double label_threshold = 0.20;
    double table_min_share = 0.05;
    std::size_t table_top_actors = 3;
    std::map<std::string, std::set<int>> components;  // named cluster-id sets
    std::vector<std::pair<int, int>> baseline_pairs;
    std::string out_dir = "out";
    std::string cache_dir = "cache";
    std::uint64_t seed = 0;

    std::string chat_token() const {
        const char* v = std::getenv(chat.token_env.c_str());
        return v ? v : "";
    }
    std::string embed_token() const {
        const char* v = std::getenv(embed.token_env.c_str());
        return v ? v : "";
    }
};

struct ConfigError {
    std::string field;
    std::string message;
};

inline RunConfig parse_config(const nlohmann::json& j, std::vector<ConfigError>& errors) {
    RunConfig cfg;
    auto err = [&errors](const std::string& field, const std::string& message) {
        errors.push_back({field, message});
    };

    if (j.contains("corpus")) cfg.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("keywords")) {
        for (const auto& k : j["keywords"]) {
            const auto s = k.get<std::string>();
            if (s.empty()) err("keywords", "keyword strings must be non-empty");
            cfg.keywords.push_back(s);
        }
    }

    if (j.contains("chat")) {
        const auto& c = j["chat"];
        cfg.chat.mode = c.value("mode", cfg.chat.mode);
        cfg.chat.base_url = c.value("base_url", cfg.chat.base_url);
        cfg.chat.model = c.value("model", cfg.chat.model);
        cfg.chat.token_env = c.value("token_env", cfg.chat.token_env);
        cfg.chat.stub_dir = c.value("stub_dir", cfg.chat.stub_dir);
        cfg.chat.max_retries = c.value("max_retries", cfg.chat.max_retries);
        cfg.chat.concurrency = c.value("concurrency", cfg.chat.concurrency);
        cfg.chat.truncate_chars = c.value("truncate_chars", cfg.chat.truncate_chars);
        cfg.chat.retry_backoff_ms = c.value("retry_backoff_ms", cfg.chat.retry_backoff_ms);
    }
    if (cfg.chat.mode != "http" && cfg.chat.mode != "stub")
        err("chat.mode", "must be \"http\" or \"stub\", got \"" + cfg.chat.mode + "\"");
    if (cfg.chat.mode == "http" && cfg.chat.base_url.empty())
        err("chat.base_url", "required for chat.mode=http");
    if (cfg.chat.mode == "stub" && cfg.chat.stub_dir.empty())
        err("chat.stub_dir", "required for chat.mode=stub");
    if (cfg.chat.max_retries < 1) err("chat.max_retries", "must be >= 1");
    if (cfg.chat.concurrency < 1) err("chat.concurrency", "must be >= 1");

    if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        cfg.embed.mode = e.value("mode", cfg.embed.mode);
        cfg.embed.base_url = e.value("base_url", cfg.embed.base_url);
        cfg.embed.model = e.value("model", cfg.embed.model);
        cfg.embed.token_env = e.value("token_env", cfg.embed.token_env);
        cfg.embed.dim = e.value("dim", cfg.embed.dim);
        cfg.embed.prefix = e.value("prefix", cfg.embed.prefix);
        cfg.embed.batch_size = e.value("batch_size", cfg.embed.batch_size);
        cfg.embed.concurrency = e.value("concurrency", cfg.embed.concurrency);
        cfg.embed.max_retries = e.value("max_retries", cfg.embed.max_retries);
        cfg.embed.retry_backoff_ms = e.value("retry_backoff_ms", cfg.embed.retry_backoff_ms);
    }
    if (cfg.embed.mode != "http" && cfg.embed.mode != "hash")
        err("embedder.mode", "must be \"http\" or \"hash\", got \"" + cfg.embed.mode + "\"");
    if (cfg.embed.mode == "http" && cfg.embed.base_url.empty())
        err("embedder.base_url", "required for embedder.mode=http");
    if (cfg.embed.dim == 0) err("embedder.dim", "must be > 0");
    if (cfg.embed.batch_size < 1) err("embedder.batch_size", "must be >= 1");

    if (j.contains("svd")) {
        const auto& s = j["svd"];
        cfg.svd_dim = s.value("dim", cfg.svd_dim);
        const std::string scope = s.value("fit_scope", std::string("per_role"));
        if (scope == "per_role") cfg.fit_scope = FitScope::PerRole;
        else if (scope == "pooled") cfg.fit_scope = FitScope::Pooled;
        else err("svd.fit_scope", "must be \"per_role\" or \"pooled\", got \"" + scope + "\"");
    }
    if (cfg.svd_dim == 0) err("svd.dim", "must be > 0");
    if (cfg.svd_dim > cfg.embed.dim)
        err("svd.dim", "must be <= embedder.dim (" + std::to_string(cfg.embed.dim) + ")");

    if (j.contains("umap")) {
        const auto& u = j["umap"];
        cfg.umap.n_neighbors = u.value("n_neighbors", cfg.umap.n_neighbors);
        cfg.umap.min_dist = u.value("min_dist", cfg.umap.min_dist);
        cfg.umap.n_components = u.value("n_components", cfg.umap.n_components);
        cfg.umap.n_epochs = u.value("n_epochs", cfg.umap.n_epochs);
        const std::string metric = u.value("metric", std::string("euclidean"));
        if (metric == "euclidean") cfg.umap.metric = Metric::Euclidean;
        else if (metric == "cosine") cfg.umap.metric = Metric::Cosine;
        else err("umap.metric", "must be \"euclidean\" or \"cosine\", got \"" + metric + "\"");
    }
    if (cfg.umap.n_neighbors < 2) err("umap.n_neighbors", "must be >= 2");
    if (cfg.umap.min_dist < 0) err("umap.min_dist", "must be >= 0");
    if (cfg.umap.min_dist >= cfg.umap.spread) err("umap.min_dist", "must be < spread (1.0)");
    if (cfg.umap.n_epochs < 1) err("umap.n_epochs", "must be >= 1");

    if (j.contains("cluster")) {
        const auto& c = j["cluster"];
        cfg.k_min = c.value("k_min", cfg.k_min);
        cfg.k_max = c.value("k_max", cfg.k_max);
    }
    if (cfg.k_min < 2) err("cluster.k_min", "must be >= 2");
    if (cfg.k_min > cfg.k_max) err("cluster.k_max", "must be >= k_min");

    if (j.contains("report")) {
        const auto& r = j["report"];
        cfg.label_threshold = r.value("label_threshold", cfg.label_threshold);
        cfg.table_min_share = r.value("table_min_share", cfg.table_min_share);
        cfg.table_top_actors = r.value("table_top_actors", cfg.table_top_actors);
        if (r.contains("components")) {
            for (const auto& [name, ids] : r["components"].items()) {
                std::set<int>& slot = cfg.components[name];
                for (const auto& id : ids) slot.insert(id.get<int>());
            }
        }
    }
    if (cfg.label_threshold < 0 || cfg.label_threshold > 1)
        err("report.label_threshold", "must be in [0,1]");
    if (cfg.table_min_share < 0 || cfg.table_min_share > 1)
        err("report.table_min_share", "must be in [0,1]");

    if (j.contains("baseline") && j["baseline"].contains("pairs")) {
        for (const auto& p : j["baseline"]["pairs"]) {
            if (!p.is_array() || p.size() != 2) {
                err("baseline.pairs", "each pair must be [cluster_a, cluster_b]");
                continue;
            }
            cfg.baseline_pairs.push_back({p[0].get<int>(), p[1].get<int>()});
        }
    }

    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.cache_dir = j.value("cache", cfg.cache_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.umap.seed = cfg.seed;

    if (cfg.corpus_path.empty()) err("corpus", "corpus path is required");
    return cfg;
}

inline RunConfig load_config(const std::string& path, std::vector<ConfigError>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back({"config", "cannot open config file: " + path});
        return {};
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        errors.push_back({"config", std::string("invalid JSON: ") + e.what()});
        return {};
    }
    return parse_config(j, errors);
}

}  // namespace narramap
