#pragma once

// Content-addressed response cache: one JSON file per request under the
// cache directory, named <hex sha-256 of key>.json. Used by both the chat
// and the embeddings clients so expensive endpoint calls never repeat.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace narramap {

class FileCache {
public:
    FileCache() = default;  // disabled cache
    explicit FileCache(std::filesystem::path dir) : dir_(std::move(dir)), enabled_(true) {
        std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return enabled_; }

    std::optional<std::string> get(const std::string& key_hex) const {
        if (!enabled_) return std::nullopt;
        const auto path = dir_ / (key_hex + ".json");
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        nlohmann::json obj;
        try {
            in >> obj;
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;  // corrupt entry; treat as miss
        }
        if (!obj.is_object() || !obj.contains("response") || !obj["response"].is_string())
            return std::nullopt;
        return obj["response"].get<std::string>();
    }

    void put(const std::string& key_hex, const std::string& response,
             const std::string& model_id) {
        if (!enabled_) return;
        std::lock_guard<std::mutex> lock(write_mutex_);
        nlohmann::json obj;
        obj["version"] = 1;
        obj["model"] = model_id;
        obj["response"] = response;
        const auto path = dir_ / (key_hex + ".json");
        const auto tmp = dir_ / (key_hex + ".json.tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cache write failed: " + tmp.string());
            out << obj.dump();
        }
        std::filesystem::rename(tmp, path);
    }

private:
    std::filesystem::path dir_;
    bool enabled_ = false;
    mutable std::mutex write_mutex_;
};

}  // namespace narramap
