#pragma once

// Shared test scaffolding: scratch directories and synthetic corpora with
// known ground truth.

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "narramap/actants.hpp"
#include "narramap/corpus.hpp"
#include "narramap/extraction.hpp"
#include "narramap/matrix.hpp"
#include "narramap/rng.hpp"

namespace support {

// Self-deleting scratch directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / ("narramap_" + tag + "_XXXXXX");
        std::string templ = base.string();
        char* made = mkdtemp(templ.data());
        if (!made) throw std::runtime_error("mkdtemp failed");
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline narramap::ActantialModel make_model(
    const std::array<std::vector<std::string>, narramap::kNumRoles>& actors) {
    narramap::ActantialModel model;
    model.actors = actors;
    return model;
}

// Convenience: model with one primary per role; empty string = missing role.
inline narramap::ActantialModel model_of(const std::string& subject, const std::string& object,
                                         const std::string& sender, const std::string& receiver,
                                         const std::string& helper, const std::string& opponent) {
    narramap::ActantialModel model;
    const std::array<std::string, 6> primaries = {subject, object, sender, receiver, helper, opponent};
    for (std::size_t r = 0; r < narramap::kNumRoles; ++r)
        if (!primaries[r].empty()) model.actors[r] = {primaries[r]};
    return model;
}

// Two groups with the same actor multiset but Subject/Object and
// Sender/Receiver exchanged; bodies are identical across every article so a
// whole-text embedding cannot tell the groups apart. Articles interleave the
// groups so positional cuts stay uninformative.
struct RoleSwapCorpus {
    narramap::Corpus corpus;
    std::vector<narramap::ExtractionRecord> records;
    std::vector<int> ground_truth;  // 0 or 1 per article
};

inline RoleSwapCorpus make_role_swap_corpus(std::size_t per_group) {
    RoleSwapCorpus out;
    const std::string body =
        "Arcadia and Borealis exchanged proposals over the river accord while the Northern "
        "League and the Harbor Front watched from the sidelines.";
    for (std::size_t i = 0; i < 2 * per_group; ++i) {
        const int group = static_cast<int>(i % 2);
        narramap::Article a;
        a.id = "rs-" + std::to_string(i);
        a.source = (i % 4 < 2) ? "harborpost" : "meridianwire";
        a.title = "River accord talks, day " + std::to_string(i);
        a.body = body;
        a.published_at = narramap::Date{2024, 1, static_cast<int>(1 + (i % 28))};
        a.word_count = narramap::count_words(a.body);
        out.corpus.articles.push_back(a);

        narramap::ExtractionRecord rec;
        rec.article_id = a.id;
        rec.status = narramap::ExtractionStatus::Ok;
        rec.attempts = 1;
        rec.model = (group == 0)
                        ? model_of("Arcadia", "Borealis", "Northern League", "Harbor Front",
                                   "River Commission", "Red Banner")
                        : model_of("Borealis", "Arcadia", "Harbor Front", "Northern League",
                                   "River Commission", "Red Banner");
        rec.raw_response = "(synthetic)";
        out.records.push_back(rec);
        out.ground_truth.push_back(group);
    }
    return out;
}

// Gaussian blobs with known assignment.
struct Blobs {
    narramap::Matrix points;
    std::vector<int> labels;
};

inline Blobs make_blobs(std::size_t per_blob, std::size_t n_blobs, std::size_t dim,
                        double center_scale, double noise, std::uint64_t seed) {
    narramap::Rng rng(seed);
    // centers sit on a ring in the first two coordinates: always separated,
    // regardless of seed
    std::vector<narramap::Vec> centers(n_blobs, narramap::Vec(dim, 0.0));
    for (std::size_t b = 0; b < n_blobs; ++b) {
        const double theta = 2.0 * 3.14159265358979323846 * static_cast<double>(b) /
                             static_cast<double>(n_blobs);
        centers[b][0] = center_scale * std::cos(theta);
        if (dim > 1) centers[b][1] = center_scale * std::sin(theta);
    }
    Blobs out;
    out.points = narramap::Matrix(per_blob * n_blobs, dim);
    std::size_t row = 0;
    for (std::size_t b = 0; b < n_blobs; ++b) {
        for (std::size_t i = 0; i < per_blob; ++i, ++row) {
            for (std::size_t c = 0; c < dim; ++c)
                out.points(row, c) = centers[b][c] + noise * rng.normal();
            out.labels.push_back(static_cast<int>(b));
        }
    }
    return out;
}

inline std::filesystem::path fixtures_dir() { return NARRAMAP_FIXTURES_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

}  // namespace support
