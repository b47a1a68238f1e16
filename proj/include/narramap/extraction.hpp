#pragma once

// Actant extraction: parse LLM answers into ActantialModels and run the
// extraction loop over a corpus with caching, bounded retries, and bounded
// concurrency. The chat transport is abstracted so the whole pipeline runs
// offline against canned responses.

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "narramap/actants.hpp"
#include "narramap/cache.hpp"
#include "narramap/corpus.hpp"
#include "narramap/prompt.hpp"
#include "narramap/sha256.hpp"

namespace narramap {

// Locates the first balanced {...} region in raw, honoring string literals
// and escapes. Returns nullopt when no balanced object exists.
inline std::optional<std::string> first_json_object(const std::string& raw) {
    const std::size_t start = raw.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
        const char c = raw[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) return raw.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

// Single repair pass for almost-JSON model output: drop code-fence markers
// and trailing commas. Anything beyond that risks inventing actants.
inline std::string repair_json_text(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
        if (raw.compare(i, 3, "```") == 0) {
            i += 3;
            // swallow an attached language tag like "json"
            while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i]))) ++i;
            continue;
        }
        s.push_back(raw[i]);
        ++i;
    }
    std::string t;
    t.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;  // trailing comma
        }
        t.push_back(s[i]);
    }
    return t;
}

namespace detail {

inline std::optional<ActantialModel> model_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) return std::nullopt;
    ActantialModel model;
    std::array<bool, kNumRoles> filled{};
    for (const auto& [key, value] : obj.items()) {
        const auto role = role_from_name(key);
        if (!role) continue;  // extra keys ignored
        const std::size_t idx = static_cast<std::size_t>(*role);
        if (filled[idx]) continue;
        filled[idx] = true;
        std::vector<std::string> actors;
        auto add = [&actors](const std::string& s) {
            std::string norm = normalize_actor_surface(s);
            if (!norm.empty()) actors.push_back(std::move(norm));
        };
        if (value.is_string()) {
            add(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& item : value)
                if (item.is_string()) add(item.get<std::string>());
        }
        // null, objects, numbers: treated as the empty-list sentinel
        model.actors[idx] = std::move(actors);
    }
    return model;
}

}  // namespace detail

// Total function from raw model output to an actantial model. A string value
// is promoted to a one-element list; missing keys and the empty-list sentinel
// yield empty actor sequences. Returns nullopt (parse error) when no JSON
// object can be recovered after one repair pass.
inline std::optional<ActantialModel> parse_actants(const std::string& raw) {
    for (int pass = 0; pass < 2; ++pass) {
        const std::string text = (pass == 0) ? raw : repair_json_text(raw);
        const auto region = first_json_object(text);
        if (!region) continue;
        nlohmann::json obj = nlohmann::json::parse(*region, nullptr, false);
        if (obj.is_discarded()) continue;
        if (auto model = detail::model_from_json(obj)) return model;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Extraction over a corpus

enum class ExtractionStatus { Ok, ParseError, EndpointError };

inline const char* to_string(ExtractionStatus s) {
    switch (s) {
        case ExtractionStatus::Ok: return "ok";
        case ExtractionStatus::ParseError: return "parse_error";
        case ExtractionStatus::EndpointError: return "endpoint_error";
    }
    return "";
}

inline std::optional<ExtractionStatus> extraction_status_from(const std::string& s) {
    if (s == "ok") return ExtractionStatus::Ok;
    if (s == "parse_error") return ExtractionStatus::ParseError;
    if (s == "endpoint_error") return ExtractionStatus::EndpointError;
    return std::nullopt;
}

struct ExtractionRecord {
    std::string article_id;
    std::string raw_response;
    std::optional<ActantialModel> model;  // present iff status == Ok
    ExtractionStatus status = ExtractionStatus::EndpointError;
    int attempts = 0;
    bool from_cache = false;
    bool truncated = false;  // body exceeded the character budget
};

struct ChatCompletion {
    bool ok = false;
    std::string text;   // assistant content on success, error description otherwise
    int attempts = 0;
};

// Transport for chat completions. Implementations must be safe to call from
// multiple threads.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatCompletion complete(const std::string& prompt, const std::string& request_tag) = 0;
    virtual std::string model_id() const = 0;
};

// Offline backend reading canned responses from a fixture directory:
// <dir>/<request_tag>.json (or .txt), falling back to <dir>/default.json.
class StubChatBackend : public ChatBackend {
public:
    StubChatBackend(std::filesystem::path dir, std::string model_id)
        : dir_(std::move(dir)), model_id_(std::move(model_id)) {}

    ChatCompletion complete(const std::string&, const std::string& request_tag) override {
        for (const auto& name : {request_tag + ".json", request_tag + ".txt",
                                 std::string("default.json"), std::string("default.txt")}) {
            std::ifstream in(dir_ / name, std::ios::binary);
            if (!in) continue;
            std::ostringstream body;
            body << in.rdbuf();
            return {true, body.str(), 1};
        }
        return {false, "no stub response for \"" + request_tag + "\" under " + dir_.string(), 1};
    }

    std::string model_id() const override { return model_id_; }

private:
    std::filesystem::path dir_;
    std::string model_id_;
};

struct ExtractOptions {
    int concurrency = 4;
    std::size_t truncate_chars = 0;  // 0 = no truncation
};

inline std::string chat_cache_key(const std::string& prompt, const std::string& model_id) {
    return sha256_hex(prompt + model_id);
}

// One record per article, in corpus order. Cached responses are never
// re-requested; endpoint failures are isolated per article.
inline std::vector<ExtractionRecord> extract_corpus(const Corpus& corpus, ChatBackend& backend,
                                                    FileCache& cache,
                                                    const ExtractOptions& options = {}) {
    const std::size_t n = corpus.size();
    std::vector<ExtractionRecord> records(n);
    if (n == 0) return records;

    const std::string model_id = backend.model_id();
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            const Article& article = corpus.articles[i];
            ExtractionRecord& rec = records[i];
            rec.article_id = article.id;

            std::string body = article.body;
            if (options.truncate_chars > 0 && body.size() > options.truncate_chars) {
                body.resize(options.truncate_chars);
                rec.truncated = true;
            }
            if (body.empty()) {
                rec.status = ExtractionStatus::EndpointError;
                rec.raw_response = "";
                continue;
            }
            const std::string prompt = render_prompt(body);
            const std::string key = chat_cache_key(prompt, model_id);

            if (auto cached = cache.get(key)) {
                rec.raw_response = *cached;
                rec.from_cache = true;
            } else {
                ChatCompletion result = backend.complete(prompt, article.id);
                rec.attempts = result.attempts;
                if (!result.ok) {
                    rec.status = ExtractionStatus::EndpointError;
                    rec.raw_response = result.text;
                    continue;
                }
                rec.raw_response = result.text;
                cache.put(key, result.text, model_id);
            }

            rec.model = parse_actants(rec.raw_response);
            rec.status = rec.model ? ExtractionStatus::Ok : ExtractionStatus::ParseError;
        }
    };

    const int workers = std::max(1, std::min<int>(options.concurrency, static_cast<int>(n)));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return records;
}

// ---------------------------------------------------------------------------
// JSONL persistence of extraction records

inline nlohmann::json extraction_record_to_json(const ExtractionRecord& rec) {
    nlohmann::json obj;
    obj["article_id"] = rec.article_id;
    obj["status"] = to_string(rec.status);
    obj["attempts"] = rec.attempts;
    obj["from_cache"] = rec.from_cache;
    obj["truncated"] = rec.truncated;
    obj["raw_response"] = rec.raw_response;
    if (rec.model) {
        nlohmann::json actants;
        for (ActantRole role : kRoleOrder)
            actants[role_name(role)] = rec.model->actors_for(role);
        obj["actants"] = actants;
    }
    return obj;
}

inline ExtractionRecord extraction_record_from_json(const nlohmann::json& obj) {
    ExtractionRecord rec;
    rec.article_id = obj.at("article_id").get<std::string>();
    const auto status = extraction_status_from(obj.at("status").get<std::string>());
    if (!status) throw std::runtime_error("unknown extraction status in record");
    rec.status = *status;
    rec.attempts = obj.value("attempts", 0);
    rec.from_cache = obj.value("from_cache", false);
    rec.truncated = obj.value("truncated", false);
    rec.raw_response = obj.value("raw_response", std::string());
    if (obj.contains("actants")) {
        ActantialModel model;
        for (ActantRole role : kRoleOrder) {
            const char* name = role_name(role);
            if (obj["actants"].contains(name))
                model.actors_for(role) = obj["actants"][name].get<std::vector<std::string>>();
        }
        rec.model = std::move(model);
    }
    if ((rec.status == ExtractionStatus::Ok) != rec.model.has_value())
        throw std::runtime_error("extraction record violates status/model invariant: " +
                                 rec.article_id);
    return rec;
}

inline void save_extraction_records(const std::vector<ExtractionRecord>& records,
                                    const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write extraction records: " + path);
    for (const auto& rec : records) out << extraction_record_to_json(rec).dump() << "\n";
}

inline std::vector<ExtractionRecord> load_extraction_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read extraction records: " + path);
    std::vector<ExtractionRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(extraction_record_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

}  // namespace narramap
