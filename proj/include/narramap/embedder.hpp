#pragma once

// Embedding layer: cosine similarity, a deterministic offline hash embedder,
// and the cached embed_texts loop over any EmbeddingsBackend. The hash
// embedder is a first-class component so the whole pipeline (and the
// acceptance suite) runs with no network access.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "narramap/cache.hpp"
#include "narramap/matrix.hpp"
#include "narramap/openai_client.hpp"
#include "narramap/rng.hpp"
#include "narramap/sha256.hpp"

namespace narramap {

// dot(a,b) / (‖a‖‖b‖), clamped to [-1,1]. A zero-norm input yields 0 and sets
// *zero_flag: missing actants become zero vectors downstream and must not
// poison similarity aggregates.
inline double cosine_similarity(const Vec& a, const Vec& b, bool* zero_flag = nullptr) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) {
        if (zero_flag) *zero_flag = true;
        return 0.0;
    }
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

// Deterministic unit-norm vector for a text: gaussian components from a PRNG
// seeded by hash(text ∥ seed). Identical texts map to identical vectors;
// distinct texts are near-orthogonal in high dimension.
inline Vec hash_embedding(const std::string& text, std::size_t dimension, std::uint64_t seed) {
    if (dimension == 0) throw std::invalid_argument("hash_embedding: dimension must be positive");
    Rng rng(sha256_seed(text + "\x1f" + std::to_string(seed)));
    Vec v(dimension);
    for (auto& x : v) x = rng.normal();
    const double n = norm(v);
    if (n == 0.0) {
        v.assign(dimension, 0.0);
        v[0] = 1.0;
        return v;
    }
    for (auto& x : v) x /= n;
    return v;
}

class HashEmbeddingsBackend : public EmbeddingsBackend {
public:
    HashEmbeddingsBackend(std::size_t dimension, std::uint64_t seed)
        : dimension_(dimension), seed_(seed) {}

    EmbedBatchResult embed_batch(const std::vector<std::string>& texts) override {
        EmbedBatchResult out;
        out.vectors.reserve(texts.size());
        for (const auto& t : texts) out.vectors.push_back(hash_embedding(t, dimension_, seed_));
        out.ok = true;
        out.attempts = 1;
        return out;
    }

    std::string model_id() const override {
        return "hash-v1/d" + std::to_string(dimension_) + "/s" + std::to_string(seed_);
    }
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

struct EmbedderOptions {
    std::string prefix;   // prepended before embedding (E5-style models)
    int batch_size = 16;
    int concurrency = 4;
};

struct EmbedFailure {
    std::size_t index = 0;
    std::string text;
    std::string error;
};

struct EmbedOutcome {
    std::vector<Vec> vectors;           // aligned with the input; failed slots empty
    std::vector<EmbedFailure> failures; // sorted by index
    std::size_t cache_hits = 0;
    std::size_t requested = 0;          // texts actually sent to the backend
};

inline std::string embed_cache_key(const std::string& prefix, const std::string& text,
                                   const std::string& model_id) {
    return sha256_hex(prefix + text + model_id);
}

// One vector per text, order-aligned. Duplicate texts are embedded once;
// results are cached by hash(prefix ∥ text ∥ model id). A dimension mismatch
// from the backend is a fatal configuration error and propagates.
inline EmbedOutcome embed_texts(const std::vector<std::string>& texts, EmbeddingsBackend& backend,
                                FileCache& cache, const EmbedderOptions& options = {}) {
    for (const auto& t : texts)
        if (t.empty()) throw std::invalid_argument("embed_texts: empty text (handled upstream)");
    if (options.batch_size < 1) throw std::invalid_argument("embed_texts: batch size must be >= 1");

    EmbedOutcome outcome;
    outcome.vectors.resize(texts.size());

    const std::string model_id = backend.model_id();
    const std::size_t dim = backend.dimension();

    // Unique texts in first-appearance order.
    std::vector<std::string> unique;
    std::map<std::string, std::size_t> slot_of_text;
    for (const auto& t : texts)
        if (slot_of_text.emplace(t, unique.size()).second) unique.push_back(t);

    std::vector<std::optional<Vec>> resolved(unique.size());
    std::vector<std::string> errors(unique.size());

    std::vector<std::size_t> pending;
    for (std::size_t u = 0; u < unique.size(); ++u) {
        const std::string key = embed_cache_key(options.prefix, unique[u], model_id);
        if (auto hit = cache.get(key)) {
            Vec v = nlohmann::json::parse(*hit).get<Vec>();
            if (v.size() != dim) throw DimensionMismatchError(dim, v.size());
            resolved[u] = std::move(v);
            ++outcome.cache_hits;
        } else {
            pending.push_back(u);
        }
    }
    outcome.requested = pending.size();

    // Batched requests with bounded concurrency; slots keep input order.
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < pending.size(); i += options.batch_size) {
        const std::size_t end = std::min(pending.size(), i + options.batch_size);
        batches.emplace_back(pending.begin() + i, pending.begin() + end);
    }

    std::atomic<std::size_t> next_batch{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto work = [&]() {
        for (;;) {
            const std::size_t b = next_batch.fetch_add(1);
            if (b >= batches.size()) return;
            const auto& batch = batches[b];
            std::vector<std::string> inputs;
            inputs.reserve(batch.size());
            for (std::size_t u : batch) inputs.push_back(options.prefix + unique[u]);
            try {
                EmbedBatchResult res = backend.embed_batch(inputs);
                if (!res.ok) {
                    for (std::size_t u : batch) errors[u] = res.error;
                    continue;
                }
                for (std::size_t k = 0; k < batch.size(); ++k) {
                    if (res.vectors[k].size() != dim)
                        throw DimensionMismatchError(dim, res.vectors[k].size());
                    const std::size_t u = batch[k];
                    cache.put(embed_cache_key(options.prefix, unique[u], model_id),
                              nlohmann::json(res.vectors[k]).dump(), model_id);
                    resolved[u] = std::move(res.vectors[k]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next_batch.store(batches.size());
                return;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(options.concurrency, static_cast<int>(batches.size())));
    if (!batches.empty()) {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    for (std::size_t i = 0; i < texts.size(); ++i) {
        const std::size_t u = slot_of_text[texts[i]];
        if (resolved[u]) {
            outcome.vectors[i] = *resolved[u];
        } else {
            outcome.failures.push_back({i, texts[i], errors[u]});
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Vector store file: JSONL, a header line with format/version/dim, then one
// row per vector: {"id": ..., "role": <actant role, omitted for whole-text>,
// "values": [...]}. Doubles round-trip exactly through the JSON encoding.

struct VectorStoreRow {
    std::string id;
    std::string role;  // empty = whole-text vector
    Vec values;
};

struct VectorStore {
    std::size_t dim = 0;
    std::string model_id;
    std::vector<VectorStoreRow> rows;

    const Vec* find(const std::string& id, const std::string& role) const {
        for (const auto& r : rows)
            if (r.id == id && r.role == role) return &r.values;
        return nullptr;
    }
};

inline void save_vector_store(const VectorStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vector store: " + path);
    nlohmann::json header;
    header["format"] = "narramap-vectors";
    header["version"] = 1;
    header["dim"] = store.dim;
    header["model"] = store.model_id;
    out << header.dump() << "\n";
    for (const auto& row : store.rows) {
        nlohmann::json obj;
        obj["id"] = row.id;
        if (!row.role.empty()) obj["role"] = row.role;
        obj["values"] = row.values;
        out << obj.dump() << "\n";
    }
}

inline VectorStore load_vector_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read vector store: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty vector store: " + path);
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", std::string()) != "narramap-vectors")
        throw std::runtime_error("not a narramap vector store: " + path);
    VectorStore store;
    store.dim = header.at("dim").get<std::size_t>();
    store.model_id = header.value("model", std::string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto obj = nlohmann::json::parse(line);
        VectorStoreRow row;
        row.id = obj.at("id").get<std::string>();
        row.role = obj.value("role", std::string());
        row.values = obj.at("values").get<Vec>();
        if (row.values.size() != store.dim)
            throw std::runtime_error("vector store row dimension mismatch for id " + row.id);
        store.rows.push_back(std::move(row));
    }
    return store;
}

}  // namespace narramap
