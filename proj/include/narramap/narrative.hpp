#pragma once

// Narrative-structured embeddings: six per-role reduced blocks concatenated
// in canonical role order. A missing actant contributes an all-zero block,
// so articles missing the same roles share identical block patterns.

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "narramap/actants.hpp"
#include "narramap/embedder.hpp"
#include "narramap/matrix.hpp"
#include "narramap/svd.hpp"
#include "narramap/umap.hpp"

namespace narramap {

struct NarrativeEmbedding {
    std::array<Vec, kNumRoles> blocks;  // canonical role order, each reduced_dim long
    Vec concat;                         // ordered concatenation, 6·d long
};

using RoleVectors = std::array<std::optional<Vec>, kNumRoles>;
using RoleReducers = std::array<SvdReducer, kNumRoles>;

inline NarrativeEmbedding build_narrative_embedding(const RoleVectors& actant_vectors,
                                                    const RoleReducers& reducers) {
    NarrativeEmbedding out;
    std::size_t total = 0;
    for (std::size_t r = 0; r < kNumRoles; ++r) total += reducers[r].reduced_dim;
    out.concat.reserve(total);
    for (std::size_t r = 0; r < kNumRoles; ++r) {
        const SvdReducer& reducer = reducers[r];
        if (reducer.reduced_dim == 0)
            throw std::invalid_argument("build_narrative_embedding: reducer missing for role " +
                                        std::string(role_name(kRoleOrder[r])));
        if (actant_vectors[r]) {
            out.blocks[r] = reducer.project(*actant_vectors[r]);
        } else {
            out.blocks[r].assign(reducer.reduced_dim, 0.0);
        }
        out.concat.insert(out.concat.end(), out.blocks[r].begin(), out.blocks[r].end());
    }
    return out;
}

// Mean cosine similarity over all pairs i > j. Zero-norm pairs contribute 0.
inline double average_subdiagonal_similarity(const std::vector<Vec>& vectors) {
    if (vectors.size() < 2)
        throw std::invalid_argument("average_subdiagonal_similarity: need at least 2 vectors");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            sum += cosine_similarity(vectors[i], vectors[j]);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Dimension-reduction study over the pooled (non-unique) actant vectors:
// how does the average pairwise similarity respond to the target dimension,
// per method? Every entry is computed fresh from the full-dimension vectors.

enum class DimStudyMethod { Svd, Pca, Umap };

inline const char* to_string(DimStudyMethod m) {
    switch (m) {
        case DimStudyMethod::Svd: return "svd";
        case DimStudyMethod::Pca: return "pca";
        case DimStudyMethod::Umap: return "umap";
    }
    return "";
}

struct DimStudyEntry {
    DimStudyMethod method;
    std::size_t dimension = 0;
    double average_similarity = 0.0;
    bool available = false;  // false when the dim is infeasible for the method
};

struct DimStudyResult {
    std::vector<DimStudyEntry> entries;  // one per (method, dimension) requested

    const DimStudyEntry* find(DimStudyMethod m, std::size_t dim) const {
        for (const auto& e : entries)
            if (e.method == m && e.dimension == dim) return &e;
        return nullptr;
    }
};

struct DimStudyOptions {
    UmapParams umap;  // n_components is overridden per requested dimension
};

inline DimStudyResult dim_study(const std::vector<Vec>& pooled,
                                const std::vector<std::size_t>& dims,
                                const std::vector<DimStudyMethod>& methods,
                                const DimStudyOptions& options = {}) {
    if (pooled.size() < 2) throw std::invalid_argument("dim_study: need at least 2 vectors");
    const std::size_t n = pooled.size();
    const std::size_t full_dim = pooled.front().size();
    const Matrix data = Matrix::from_rows(pooled);

    DimStudyResult result;
    for (DimStudyMethod method : methods) {
        for (std::size_t d : dims) {
            DimStudyEntry entry;
            entry.method = method;
            entry.dimension = d;

            const bool linear_ok = d >= 1 && d <= full_dim && d <= n;
            const bool umap_ok = d >= 1 && options.umap.n_neighbors < static_cast<int>(n);
            switch (method) {
                case DimStudyMethod::Svd: {
                    if (!linear_ok) break;
                    const SvdReducer reducer = fit_svd(data, d, "pooled");
                    std::vector<Vec> reduced(n);
                    for (std::size_t i = 0; i < n; ++i) reduced[i] = reducer.project(pooled[i]);
                    entry.average_similarity = average_subdiagonal_similarity(reduced);
                    entry.available = true;
                    break;
                }
                case DimStudyMethod::Pca: {
                    if (!linear_ok) break;
                    const PcaReducer reducer = fit_pca(data, d, "pooled");
                    std::vector<Vec> reduced(n);
                    for (std::size_t i = 0; i < n; ++i) reduced[i] = reducer.project(pooled[i]);
                    entry.average_similarity = average_subdiagonal_similarity(reduced);
                    entry.available = true;
                    break;
                }
                case DimStudyMethod::Umap: {
                    if (!umap_ok) break;
                    UmapParams params = options.umap;
                    params.n_components = static_cast<int>(d);
                    const Matrix layout = umap_project(data, params);
                    std::vector<Vec> reduced(n);
                    for (std::size_t i = 0; i < n; ++i)
                        reduced[i] = Vec(layout.row(i), layout.row(i) + layout.cols);
                    entry.average_similarity = average_subdiagonal_similarity(reduced);
                    entry.available = true;
                    break;
                }
            }
            result.entries.push_back(entry);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reducer fitting over extraction output

// Collects the hash/HTTP-embedded vector of each role's primary actor for
// every ok-status record; rows with missing roles are simply absent.
struct RoleMatrix {
    std::vector<Vec> rows;
};

// Fits one reducer per role on that role's present vectors, or a single
// pooled reducer applied to every role.
enum class FitScope { PerRole, Pooled };

inline const char* to_string(FitScope s) { return s == FitScope::PerRole ? "per_role" : "pooled"; }

inline RoleReducers fit_role_reducers(const std::array<RoleMatrix, kNumRoles>& role_vectors,
                                      std::size_t d, FitScope scope) {
    RoleReducers reducers;
    if (scope == FitScope::Pooled) {
        std::vector<Vec> pooled;
        for (const auto& rm : role_vectors)
            pooled.insert(pooled.end(), rm.rows.begin(), rm.rows.end());
        if (pooled.size() < d)
            throw std::invalid_argument("fit_role_reducers: not enough pooled vectors (" +
                                        std::to_string(pooled.size()) + ") for d=" +
                                        std::to_string(d));
        const SvdReducer pooled_reducer = fit_svd(Matrix::from_rows(pooled), d, "pooled");
        for (std::size_t r = 0; r < kNumRoles; ++r) reducers[r] = pooled_reducer;
        return reducers;
    }
    for (std::size_t r = 0; r < kNumRoles; ++r) {
        const auto& rows = role_vectors[r].rows;
        if (rows.size() < d)
            throw std::invalid_argument(
                std::string("fit_role_reducers: role ") + role_name(kRoleOrder[r]) + " has " +
                std::to_string(rows.size()) + " vectors, fewer than d=" + std::to_string(d) +
                "; choose a smaller svd dimension");
        reducers[r] = fit_svd(Matrix::from_rows(rows), d, role_name(kRoleOrder[r]));
    }
    return reducers;
}

}  // namespace narramap
