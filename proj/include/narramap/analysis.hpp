#pragma once

// Report surfaces over the clustered corpus: cluster labels, per-cluster
// actor tables, syncretism shares, missing-actant statistics, source shares,
// component timelines, and the whole-text baseline comparison.
//
// Counting convention used throughout: actors are counted under their
// normalized key (case fold, trim, collapse) but displayed as the most
// frequent raw surface form of that key, ties resolved lexicographically.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "narramap/actants.hpp"
#include "narramap/cluster.hpp"
#include "narramap/corpus.hpp"
#include "narramap/embedder.hpp"
#include "narramap/extraction.hpp"
#include "narramap/matrix.hpp"
#include "narramap/umap.hpp"

namespace narramap {

// One article in the analyzed set: ok-status extraction, not dropped.
struct AnalyzedArticle {
    std::string id;
    std::string source;
    std::optional<Date> published_at;
    ActantialModel model;
    int cluster = -1;
};

namespace detail {

struct ActorCount {
    std::size_t count = 0;
    std::map<std::string, std::size_t> surfaces;  // raw form → occurrences
};

using ActorCounts = std::map<std::string, ActorCount>;  // normalized key → counts

inline void count_actor(ActorCounts& counts, const std::string& surface) {
    const std::string key = normalize_actor_key(surface);
    auto& slot = counts[key];
    slot.count += 1;
    slot.surfaces[surface] += 1;
}

inline std::string display_surface(const ActorCount& ac) {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [surface, count] : ac.surfaces) {
        if (count > best_count || (count == best_count && (best.empty() || surface < best))) {
            best = surface;
            best_count = count;
        }
    }
    return best;
}

// (key, count) ordered by count desc, then key asc.
inline std::vector<std::pair<std::string, const ActorCount*>> ranked(const ActorCounts& counts) {
    std::vector<std::pair<std::string, const ActorCount*>> order;
    order.reserve(counts.size());
    for (const auto& [key, ac] : counts) order.push_back({key, &ac});
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        if (x.second->count != y.second->count) return x.second->count > y.second->count;
        return x.first < y.first;
    });
    return order;
}

inline std::vector<int> sorted_cluster_ids(const std::vector<AnalyzedArticle>& articles) {
    std::set<int> ids;
    for (const auto& a : articles)
        if (a.cluster >= 0) ids.insert(a.cluster);
    return {ids.begin(), ids.end()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cluster labels

struct LabelEntry {
    std::string actor;               // display surface form
    std::vector<ActantRole> roles;   // canonical order
    std::string codes;               // concatenated role codes, e.g. "SuSe"
};

struct ClusterLabelSpec {
    int cluster_id = -1;
    std::vector<LabelEntry> entries;
    std::string label;  // e.g. "Israel (SuSe), Gaza (ObRe)"; empty when no role passes
};

// Per cluster and role, the modal primary actor is kept when its share of the
// cluster's articles is at least label_threshold (a share of exactly the
// threshold is kept). Roles sharing one actor collapse into a single entry.
inline std::vector<ClusterLabelSpec> label_clusters(const std::vector<AnalyzedArticle>& articles,
                                                    double label_threshold = 0.20) {
    std::vector<ClusterLabelSpec> specs;
    for (int cluster : detail::sorted_cluster_ids(articles)) {
        std::size_t cluster_size = 0;
        std::array<detail::ActorCounts, kNumRoles> counts;
        for (const auto& a : articles) {
            if (a.cluster != cluster) continue;
            ++cluster_size;
            for (std::size_t r = 0; r < kNumRoles; ++r)
                if (auto primary = a.model.primary(kRoleOrder[r]))
                    detail::count_actor(counts[r], *primary);
        }

        ClusterLabelSpec spec;
        spec.cluster_id = cluster;
        // modal actor key per role, threshold applied against cluster size
        std::map<std::string, LabelEntry> entry_by_key;
        std::vector<std::string> key_order;
        for (std::size_t r = 0; r < kNumRoles; ++r) {
            const auto order = detail::ranked(counts[r]);
            if (order.empty()) continue;
            const auto& [key, ac] = order.front();
            const double share = static_cast<double>(ac->count) / static_cast<double>(cluster_size);
            if (share + 1e-12 < label_threshold) continue;
            auto [it, inserted] = entry_by_key.try_emplace(key);
            if (inserted) {
                it->second.actor = detail::display_surface(*ac);
                key_order.push_back(key);
            }
            it->second.roles.push_back(kRoleOrder[r]);
            it->second.codes += role_code(kRoleOrder[r]);
        }
        for (const auto& key : key_order) spec.entries.push_back(entry_by_key[key]);

        std::string label;
        for (const auto& entry : spec.entries) {
            if (!label.empty()) label += ", ";
            label += entry.actor + " (" + entry.codes + ")";
        }
        spec.label = std::move(label);
        specs.push_back(std::move(spec));
    }
    return specs;
}

// ---------------------------------------------------------------------------
// Actor frequency table

struct ActorTableRow {
    int cluster_id = -1;
    ActantRole role = ActantRole::Subject;
    std::string actor;   // display surface form
    double share = 0.0;  // against all articles in the cluster
    std::size_t count = 0;
};

inline std::vector<ActorTableRow> actor_table(const std::vector<AnalyzedArticle>& articles,
                                              double min_share = 0.05, std::size_t top = 3) {
    std::vector<ActorTableRow> rows;
    for (int cluster : detail::sorted_cluster_ids(articles)) {
        std::size_t cluster_size = 0;
        std::array<detail::ActorCounts, kNumRoles> counts;
        for (const auto& a : articles) {
            if (a.cluster != cluster) continue;
            ++cluster_size;
            for (std::size_t r = 0; r < kNumRoles; ++r)
                if (auto primary = a.model.primary(kRoleOrder[r]))
                    detail::count_actor(counts[r], *primary);
        }
        for (std::size_t r = 0; r < kNumRoles; ++r) {
            std::size_t taken = 0;
            for (const auto& [key, ac] : detail::ranked(counts[r])) {
                if (taken >= top) break;
                const double share =
                    static_cast<double>(ac->count) / static_cast<double>(cluster_size);
                if (share + 1e-12 < min_share) break;  // ranked by count: rest are smaller
                rows.push_back({cluster, kRoleOrder[r], detail::display_surface(*ac), share,
                                ac->count});
                ++taken;
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Syncretism report

struct SyncretismActor {
    std::string actor;
    double share_within_pair = 0.0;
    std::size_t count = 0;
};

struct SyncretismRow {
    RolePair pair;
    double share = 0.0;  // over all analyzed articles
    std::size_t count = 0;
    std::vector<SyncretismActor> top_actors;
};

// Share of analyzed articles exhibiting each of the 15 role-pair
// syncretisms, with the most common actors within each pair.
inline std::vector<SyncretismRow> syncretism_report(const std::vector<AnalyzedArticle>& articles,
                                                    std::size_t top_actors = 3) {
    const std::size_t total = articles.size();
    std::map<RolePair, std::pair<std::size_t, detail::ActorCounts>> buckets;
    for (const auto& pair : all_role_pairs()) buckets[pair];

    for (const auto& a : articles) {
        for (const auto& pair : detect_syncretisms(a.model)) {
            auto& bucket = buckets[pair];
            bucket.first += 1;
            // both roles share the same normalized actor; count the primary
            // of the first role as the pair's actor
            if (auto primary = a.model.primary(pair.a)) detail::count_actor(bucket.second, *primary);
        }
    }

    std::vector<SyncretismRow> rows;
    for (const auto& [pair, bucket] : buckets) {
        SyncretismRow row;
        row.pair = pair;
        row.count = bucket.first;
        row.share = total == 0 ? 0.0
                               : static_cast<double>(bucket.first) / static_cast<double>(total);
        std::size_t taken = 0;
        for (const auto& [key, ac] : detail::ranked(bucket.second)) {
            if (taken >= top_actors) break;
            row.top_actors.push_back(
                {detail::display_surface(*ac),
                 bucket.first == 0
                     ? 0.0
                     : static_cast<double>(ac->count) / static_cast<double>(bucket.first),
                 ac->count});
            ++taken;
        }
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const SyncretismRow& x, const SyncretismRow& y) {
        if (x.count != y.count) return x.count > y.count;
        return x.pair < y.pair;
    });
    return rows;
}

// ---------------------------------------------------------------------------
// Missing-actant statistics

struct MissingActantStats {
    std::array<double, kNumRoles> overall{};                 // share of articles missing the role
    std::map<int, std::array<double, kNumRoles>> per_cluster;
};

inline MissingActantStats missing_actant_stats(const std::vector<AnalyzedArticle>& articles) {
    MissingActantStats stats;
    std::array<std::size_t, kNumRoles> missing{};
    std::map<int, std::pair<std::size_t, std::array<std::size_t, kNumRoles>>> per_cluster;
    for (const auto& a : articles) {
        auto* cluster_slot = (a.cluster >= 0) ? &per_cluster[a.cluster] : nullptr;
        if (cluster_slot) cluster_slot->first += 1;
        for (std::size_t r = 0; r < kNumRoles; ++r) {
            if (a.model.missing(kRoleOrder[r])) {
                missing[r] += 1;
                if (cluster_slot) cluster_slot->second[r] += 1;
            }
        }
    }
    const double total = static_cast<double>(articles.size());
    for (std::size_t r = 0; r < kNumRoles; ++r)
        stats.overall[r] = total == 0 ? 0.0 : static_cast<double>(missing[r]) / total;
    for (const auto& [cluster, data] : per_cluster) {
        auto& row = stats.per_cluster[cluster];
        for (std::size_t r = 0; r < kNumRoles; ++r)
            row[r] = static_cast<double>(data.second[r]) / static_cast<double>(data.first);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Source shares

struct SourceShareRow {
    int cluster_id = -1;
    std::map<std::string, double> shares;  // per source, sums to 1 within the cluster
    std::size_t articles = 0;
};

inline std::vector<SourceShareRow> source_shares(const std::vector<AnalyzedArticle>& articles) {
    std::map<int, std::pair<std::size_t, std::map<std::string, std::size_t>>> per_cluster;
    for (const auto& a : articles) {
        if (a.cluster < 0) continue;
        auto& slot = per_cluster[a.cluster];
        slot.first += 1;
        slot.second[a.source] += 1;
    }
    std::vector<SourceShareRow> rows;
    for (const auto& [cluster, data] : per_cluster) {
        SourceShareRow row;
        row.cluster_id = cluster;
        row.articles = data.first;
        for (const auto& [source, count] : data.second)
            row.shares[source] = static_cast<double>(count) / static_cast<double>(data.first);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Component timelines

// components: named, pairwise-disjoint sets of cluster ids. Returns weekly
// counts per (component, source); source is "" when not grouping. Articles
// in clusters outside every component are ignored.
inline std::map<std::string, std::map<std::pair<std::string, std::string>, std::size_t>>
component_timeline(const std::vector<AnalyzedArticle>& articles,
                   const std::map<std::string, std::set<int>>& components,
                   bool group_by_source) {
    std::map<int, std::string> component_of;
    for (const auto& [name, ids] : components) {
        for (int id : ids) {
            auto [it, inserted] = component_of.try_emplace(id, name);
            if (!inserted)
                throw std::invalid_argument("component_timeline: cluster " + std::to_string(id) +
                                            " appears in components \"" + it->second +
                                            "\" and \"" + name + "\"");
        }
    }
    std::map<std::string, std::map<std::pair<std::string, std::string>, std::size_t>> series;
    for (const auto& [name, ids] : components) series[name];
    for (const auto& a : articles) {
        if (a.cluster < 0) continue;
        const auto it = component_of.find(a.cluster);
        if (it == component_of.end()) continue;
        if (!a.published_at)
            throw std::invalid_argument("component_timeline: article \"" + a.id +
                                        "\" has no published_at");
        const std::string week = iso_week(*a.published_at);
        series[it->second][{week, group_by_source ? a.source : std::string()}] += 1;
    }
    return series;
}

// ---------------------------------------------------------------------------
// Whole-text baseline

struct BaselinePairComparison {
    int narrative_cluster_a = -1;
    int narrative_cluster_b = -1;
    std::size_t articles = 0;
    double ari = 0.0;  // narrative vs baseline labels, restricted to the two clusters
};

struct BaselineResult {
    ClusterModel model;   // clusters from whole-text embeddings
    Matrix layout;        // 2D projection of the whole-text embeddings
    double global_ari = 0.0;
    std::vector<BaselinePairComparison> pairs;
};

// Embeds each article body as a single vector, runs the identical
// UMAP + Ward + silhouette pipeline, and scores how well the baseline
// reproduces the narrative clustering (globally and for chosen pairs).
inline BaselineResult baseline_whole_text(const std::vector<const Article*>& articles,
                                          const std::vector<int>& narrative_labels,
                                          EmbeddingsBackend& backend, FileCache& cache,
                                          const EmbedderOptions& embed_options,
                                          UmapParams umap_params, std::size_t k_min,
                                          std::size_t k_max,
                                          const std::vector<std::pair<int, int>>& compare_pairs) {
    if (articles.size() != narrative_labels.size())
        throw std::invalid_argument("baseline_whole_text: labels misaligned");

    std::vector<std::string> bodies;
    bodies.reserve(articles.size());
    for (const auto* a : articles) bodies.push_back(a->body);
    const EmbedOutcome embedded = embed_texts(bodies, backend, cache, embed_options);
    if (!embedded.failures.empty())
        throw std::runtime_error("baseline_whole_text: embedding failed for \"" +
                                 embedded.failures.front().text.substr(0, 40) + "\"...");

    BaselineResult result;
    if (umap_params.n_neighbors >= static_cast<int>(articles.size()))
        umap_params.n_neighbors = static_cast<int>(articles.size()) - 1;
    result.layout = umap_project(Matrix::from_rows(embedded.vectors), umap_params);
    const Dendrogram dendro = ward_cluster(result.layout);
    result.model = select_k(result.layout, dendro, k_min, std::min(k_max, articles.size() - 1));

    result.global_ari = adjusted_rand_index(narrative_labels, result.model.labels);
    for (const auto& [a, b] : compare_pairs) {
        BaselinePairComparison cmp;
        cmp.narrative_cluster_a = a;
        cmp.narrative_cluster_b = b;
        std::vector<int> narrative_restricted, baseline_restricted;
        for (std::size_t i = 0; i < narrative_labels.size(); ++i) {
            if (narrative_labels[i] != a && narrative_labels[i] != b) continue;
            narrative_restricted.push_back(narrative_labels[i]);
            baseline_restricted.push_back(result.model.labels[i]);
        }
        cmp.articles = narrative_restricted.size();
        cmp.ari = cmp.articles >= 2
                      ? adjusted_rand_index(narrative_restricted, baseline_restricted)
                      : 0.0;
        result.pairs.push_back(cmp);
    }
    return result;
}

}  // namespace narramap
