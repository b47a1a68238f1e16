#pragma once

// Glue between stages: embed primary actors from extraction records, fit the
// per-role reducers, and assemble the narrative embedding matrix. Shared by
// the CLI and the test suites so both drive the same code path.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "narramap/actants.hpp"
#include "narramap/embedder.hpp"
#include "narramap/extraction.hpp"
#include "narramap/matrix.hpp"
#include "narramap/narrative.hpp"
#include "narramap/svd.hpp"

namespace narramap {

struct ActantEmbeddings {
    std::vector<std::string> ids;       // ok-status article ids, corpus order
    std::vector<RoleVectors> vectors;   // aligned with ids; missing roles empty
    std::size_t dim = 0;
    std::string model_id;
    std::size_t cache_hits = 0;
    std::size_t requested = 0;
};

// Embeds each ok record's primary actor per role. Duplicate actor strings hit
// the embedding cache, so corpus-scale extraction embeds only distinct actors.
inline ActantEmbeddings embed_actants(const std::vector<ExtractionRecord>& records,
                                      EmbeddingsBackend& backend, FileCache& cache,
                                      const EmbedderOptions& options = {}) {
    ActantEmbeddings out;
    out.dim = backend.dimension();
    out.model_id = backend.model_id();

    std::vector<std::string> texts;
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (article idx, role idx)
    for (const auto& rec : records) {
        if (rec.status != ExtractionStatus::Ok) continue;
        const std::size_t article_idx = out.ids.size();
        out.ids.push_back(rec.article_id);
        out.vectors.emplace_back();
        for (std::size_t r = 0; r < kNumRoles; ++r) {
            if (auto primary = rec.model->primary(kRoleOrder[r])) {
                texts.push_back(*primary);
                slots.push_back({article_idx, r});
            }
        }
    }

    const EmbedOutcome embedded = embed_texts(texts, backend, cache, options);
    if (!embedded.failures.empty()) {
        const auto& f = embedded.failures.front();
        throw std::runtime_error("embed_actants: " + std::to_string(embedded.failures.size()) +
                                 " actant(s) failed to embed; first: \"" + f.text +
                                 "\": " + f.error);
    }
    for (std::size_t t = 0; t < texts.size(); ++t)
        out.vectors[slots[t].first][slots[t].second] = embedded.vectors[t];
    out.cache_hits = embedded.cache_hits;
    out.requested = embedded.requested;
    return out;
}

struct NarrativeMatrix {
    std::vector<std::string> ids;  // aligned with matrix rows
    Matrix matrix;                 // N × (6·d)
    RoleReducers reducers;
};

inline NarrativeMatrix build_narrative_matrix(const ActantEmbeddings& embeddings, std::size_t d,
                                              FitScope scope) {
    std::array<RoleMatrix, kNumRoles> role_vectors;
    for (const auto& rv : embeddings.vectors)
        for (std::size_t r = 0; r < kNumRoles; ++r)
            if (rv[r]) role_vectors[r].rows.push_back(*rv[r]);

    NarrativeMatrix out;
    out.ids = embeddings.ids;
    out.reducers = fit_role_reducers(role_vectors, d, scope);
    out.matrix = Matrix(embeddings.ids.size(), kNumRoles * d);
    for (std::size_t i = 0; i < embeddings.vectors.size(); ++i) {
        const NarrativeEmbedding emb = build_narrative_embedding(embeddings.vectors[i], out.reducers);
        for (std::size_t c = 0; c < emb.concat.size(); ++c) out.matrix(i, c) = emb.concat[c];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Narrative matrix persistence: raw little-endian doubles, row-major, with a
// JSON meta header and a one-id-per-line sidecar.

inline void save_narrative_matrix(const NarrativeMatrix& nm, const std::string& matrix_path,
                                  const std::string& ids_path, const std::string& meta_path) {
    {
        std::ofstream out(matrix_path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write matrix: " + matrix_path);
        out.write(reinterpret_cast<const char*>(nm.matrix.data.data()),
                  static_cast<std::streamsize>(nm.matrix.data.size() * sizeof(double)));
    }
    {
        std::ofstream out(ids_path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write id sidecar: " + ids_path);
        for (const auto& id : nm.ids) out << id << "\n";
    }
    {
        nlohmann::json meta;
        meta["format"] = "narramap-matrix";
        meta["version"] = 1;
        meta["rows"] = nm.matrix.rows;
        meta["cols"] = nm.matrix.cols;
        meta["encoding"] = "float64-le-row-major";
        std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write matrix meta: " + meta_path);
        out << meta.dump(2) << "\n";
    }
}

inline NarrativeMatrix load_narrative_matrix(const std::string& matrix_path,
                                             const std::string& ids_path,
                                             const std::string& meta_path) {
    NarrativeMatrix nm;
    nlohmann::json meta;
    {
        std::ifstream in(meta_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read matrix meta: " + meta_path);
        in >> meta;
    }
    if (meta.value("format", std::string()) != "narramap-matrix")
        throw std::runtime_error("not a narramap matrix meta file: " + meta_path);
    const auto rows = meta.at("rows").get<std::size_t>();
    const auto cols = meta.at("cols").get<std::size_t>();
    nm.matrix = Matrix(rows, cols);
    {
        std::ifstream in(matrix_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read matrix: " + matrix_path);
        in.read(reinterpret_cast<char*>(nm.matrix.data.data()),
                static_cast<std::streamsize>(rows * cols * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != rows * cols * sizeof(double))
            throw std::runtime_error("matrix file truncated: " + matrix_path);
    }
    {
        std::ifstream in(ids_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read id sidecar: " + ids_path);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) nm.ids.push_back(line);
    }
    if (nm.ids.size() != rows)
        throw std::runtime_error("id sidecar row count mismatch: " + ids_path);
    return nm;
}

}  // namespace narramap
