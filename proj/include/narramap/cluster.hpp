#pragma once

// Agglomerative Ward clustering with silhouette model selection and the
// manual drop/merge post-processing step. Merges follow the Lance-Williams
// Ward update with deterministic ties (smallest cluster-id pair), so the
// dendrogram is a pure function of the input points.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "narramap/matrix.hpp"

namespace narramap {

struct MergeStep {
    std::size_t cluster_a = 0;  // cluster ids, scipy convention: originals are
    std::size_t cluster_b = 0;  // 0..N-1, the step-s merge creates id N+s
    double cost = 0.0;          // Ward distance at the merge
    std::size_t new_size = 0;
};

struct Dendrogram {
    std::size_t n = 0;
    std::vector<MergeStep> steps;  // N-1 steps, costs non-decreasing
};

namespace detail {

inline double euclidean(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

// Full Ward dendrogram. Nearest pairs are maintained per cluster and only
// re-scanned when a merge invalidates them, which keeps typical runtime near
// O(N²) with O(N²) memory for the distance matrix.
inline Dendrogram ward_cluster(const Matrix& points) {
    const std::size_t n = points.rows;
    if (n < 2) throw std::invalid_argument("ward_cluster: need at least 2 points");

    // Slot-addressed state; a merge collapses slot b into slot a.
    std::vector<double> dist(n * n, 0.0);
    auto d_at = [&dist, n](std::size_t p, std::size_t q) -> double& { return dist[p * n + q]; };
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) {
            const double d = detail::euclidean(points.row(p), points.row(q), points.cols);
            d_at(p, q) = d;
            d_at(q, p) = d;
        }

    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> id(n);
    for (std::size_t i = 0; i < n; ++i) id[i] = i;

    struct Best {
        double d = std::numeric_limits<double>::infinity();
        std::size_t partner = 0;
    };
    std::vector<Best> best(n);

    auto pair_key = [&id](std::size_t p, std::size_t q) {
        return std::pair<std::size_t, std::size_t>{std::min(id[p], id[q]), std::max(id[p], id[q])};
    };
    auto better = [&](double d1, std::size_t p1, std::size_t q1, double d2, std::size_t p2,
                      std::size_t q2) {
        if (d1 != d2) return d1 < d2;
        return pair_key(p1, q1) < pair_key(p2, q2);
    };
    auto rescan = [&](std::size_t p) {
        Best b;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == p || !active[q]) continue;
            const double d = d_at(p, q);
            if (b.d == std::numeric_limits<double>::infinity() ||
                better(d, p, q, b.d, p, b.partner)) {
                b.d = d;
                b.partner = q;
            }
        }
        best[p] = b;
    };
    for (std::size_t p = 0; p < n; ++p) rescan(p);

    Dendrogram dendro;
    dendro.n = n;
    dendro.steps.reserve(n - 1);

    for (std::size_t step = 0; step < n - 1; ++step) {
        // global minimum over cached per-slot nearest pairs
        std::size_t pa = n, pb = n;
        double min_d = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n; ++p) {
            if (!active[p]) continue;
            const Best& b = best[p];
            if (pa == n || better(b.d, p, b.partner, min_d, pa, pb)) {
                min_d = b.d;
                pa = p;
                pb = b.partner;
            }
        }

        std::size_t a = pa, b = pb;
        if (id[a] > id[b]) std::swap(a, b);

        dendro.steps.push_back({std::min(id[a], id[b]), std::max(id[a], id[b]), min_d,
                                size[a] + size[b]});

        // Lance-Williams Ward update for distances to the merged cluster.
        const double d_ab = min_d;
        const double n_i = static_cast<double>(size[a]);
        const double n_j = static_cast<double>(size[b]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            const double n_k = static_cast<double>(size[k]);
            const double d_ik = d_at(a, k);
            const double d_jk = d_at(b, k);
            const double num = (n_i + n_k) * d_ik * d_ik + (n_j + n_k) * d_jk * d_jk -
                               n_k * d_ab * d_ab;
            const double d_new = std::sqrt(std::max(0.0, num / (n_i + n_j + n_k)));
            d_at(a, k) = d_new;
            d_at(k, a) = d_new;
        }
        active[b] = false;
        size[a] += size[b];
        id[a] = n + step;

        rescan(a);
        for (std::size_t p = 0; p < n; ++p) {
            if (!active[p] || p == a) continue;
            if (best[p].partner == a || best[p].partner == b) {
                rescan(p);
            } else {
                const double d = d_at(p, a);
                if (better(d, p, a, best[p].d, p, best[p].partner)) best[p] = {d, a};
            }
        }
    }
    return dendro;
}

// Labels for a k-cluster cut: undo the last k−1 merges, then renumber
// clusters 0..k-1 by descending size, ties by smallest member id.
inline std::vector<int> cut(const Dendrogram& dendro, std::size_t k) {
    const std::size_t n = dendro.n;
    if (k < 1 || k > n) throw std::invalid_argument("cut: k out of range [1, N]");

    std::vector<std::size_t> parent(2 * n - 1);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t s = 0; s + k < n; ++s) {
        const auto& step = dendro.steps[s];
        const std::size_t merged = n + s;
        parent[find(step.cluster_a)] = merged;
        parent[find(step.cluster_b)] = merged;
    }

    struct Group {
        std::size_t size = 0;
        std::size_t min_member = 0;
        int label = -1;
    };
    std::map<std::size_t, Group> groups;
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i) {
        root[i] = find(i);
        auto [it, inserted] = groups.try_emplace(root[i]);
        if (inserted) it->second.min_member = i;
        it->second.size += 1;
        it->second.min_member = std::min(it->second.min_member, i);
    }

    std::vector<std::map<std::size_t, Group>::iterator> order;
    for (auto it = groups.begin(); it != groups.end(); ++it) order.push_back(it);
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        if (x->second.size != y->second.size) return x->second.size > y->second.size;
        return x->second.min_member < y->second.min_member;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank) order[rank]->second.label =
        static_cast<int>(rank);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = groups[root[i]].label;
    return labels;
}

// Pairwise Euclidean distances, full symmetric matrix.
inline Matrix pairwise_distances(const Matrix& points) {
    Matrix d(points.rows, points.rows);
    for (std::size_t i = 0; i < points.rows; ++i)
        for (std::size_t j = i + 1; j < points.rows; ++j) {
            const double v = detail::euclidean(points.row(i), points.row(j), points.cols);
            d(i, j) = v;
            d(j, i) = v;
        }
    return d;
}

// Mean silhouette over points with non-negative labels: s = (b−a)/max(a,b),
// a = mean intra-cluster distance excluding self, b = best mean distance to
// another cluster. Points in singleton clusters contribute 0, as do points
// where a = b = 0.
inline double silhouette_from_distances(const Matrix& dist, const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    if (dist.rows != n) throw std::invalid_argument("silhouette: labels/points size mismatch");

    std::map<int, std::size_t> cluster_sizes;
    for (int l : labels)
        if (l >= 0) cluster_sizes[l] += 1;
    if (cluster_sizes.size() < 2)
        throw std::invalid_argument("silhouette: need at least 2 clusters");
    for (const auto& [label, count] : cluster_sizes)
        if (count == 0) throw std::invalid_argument("silhouette: empty cluster");

    double total = 0.0;
    std::size_t considered = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        ++considered;
        if (cluster_sizes[labels[i]] == 1) continue;  // singleton contributes 0

        std::map<int, double> sum_to;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || labels[j] < 0) continue;
            sum_to[labels[j]] += dist(i, j);
        }
        const double a = sum_to[labels[i]] / static_cast<double>(cluster_sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, sum] : sum_to) {
            if (label == labels[i]) continue;
            b = std::min(b, sum / static_cast<double>(cluster_sizes[label]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    if (considered == 0) throw std::invalid_argument("silhouette: no labeled points");
    return total / static_cast<double>(considered);
}

inline double silhouette(const Matrix& points, const std::vector<int>& labels) {
    if (points.rows != labels.size())
        throw std::invalid_argument("silhouette: labels/points size mismatch");
    return silhouette_from_distances(pairwise_distances(points), labels);
}

struct PostOp {
    std::string op;  // "drop" or "merge"
    int arg_a = -1;
    int arg_b = -1;
    int k_after = 0;
};

struct ClusterModel {
    int k = 0;
    std::vector<int> labels;  // per point; -1 = dropped
    double silhouette_score = 0.0;
    std::vector<std::pair<std::size_t, double>> score_table;  // (k, silhouette) over the search
    std::vector<PostOp> post_ops;
};

// Evaluates silhouette at every dendrogram cut in [k_min, k_max] and returns
// the argmax model (ties to the smaller k) plus the full score table.
inline ClusterModel select_k(const Matrix& points, const Dendrogram& dendro,
                             std::size_t k_min = 2, std::size_t k_max = 40) {
    const std::size_t n = points.rows;
    if (k_min < 2) throw std::invalid_argument("select_k: k_min must be >= 2");
    if (k_min > k_max) throw std::invalid_argument("select_k: empty k range");
    if (k_max >= n) throw std::invalid_argument("select_k: k_max must be < N");

    const Matrix dist = pairwise_distances(points);
    ClusterModel model;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best_k = k_min;
    std::vector<int> best_labels;

    for (std::size_t k = k_min; k <= k_max; ++k) {
        const std::vector<int> labels = cut(dendro, k);
        const double score = silhouette_from_distances(dist, labels);
        model.score_table.push_back({k, score});
        if (score > best_score) {
            best_score = score;
            best_k = k;
            best_labels = labels;
        }
    }
    model.k = static_cast<int>(best_k);
    model.labels = std::move(best_labels);
    model.silhouette_score = best_score;
    return model;
}

namespace detail {

inline void recompute_silhouette(ClusterModel& model, const Matrix& points) {
    std::set<int> remaining;
    for (int l : model.labels)
        if (l >= 0) remaining.insert(l);
    if (remaining.size() >= 2) {
        model.silhouette_score = silhouette(points, model.labels);
    } else {
        model.silhouette_score = std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

// Marks a cluster's articles as dropped (-1) and renumbers the remaining ids
// stably. The operation is recorded in the audit log.
inline ClusterModel drop_cluster(const ClusterModel& model, const Matrix& points, int cluster_id) {
    if (cluster_id < 0 || cluster_id >= model.k)
        throw std::invalid_argument("drop_cluster: invalid cluster id " + std::to_string(cluster_id));
    ClusterModel out = model;
    for (int& l : out.labels) {
        if (l == cluster_id) l = -1;
        else if (l > cluster_id) l -= 1;
    }
    out.k = model.k - 1;
    detail::recompute_silhouette(out, points);
    out.post_ops.push_back({"drop", cluster_id, -1, out.k});
    return out;
}

// Merges two clusters; the combined cluster takes the smaller id and the ids
// above the vacated one shift down.
inline ClusterModel merge_clusters(const ClusterModel& model, const Matrix& points, int id_a,
                                   int id_b) {
    if (id_a == id_b) throw std::invalid_argument("merge_clusters: ids must be distinct");
    for (int id : {id_a, id_b})
        if (id < 0 || id >= model.k)
            throw std::invalid_argument("merge_clusters: invalid cluster id " + std::to_string(id));
    const int lo = std::min(id_a, id_b);
    const int hi = std::max(id_a, id_b);
    ClusterModel out = model;
    for (int& l : out.labels) {
        if (l == hi) l = lo;
        else if (l > hi) l -= 1;
    }
    out.k = model.k - 1;
    detail::recompute_silhouette(out, points);
    out.post_ops.push_back({"merge", id_a, id_b, out.k});
    return out;
}

// Adjusted Rand index between two labelings; points labeled -1 in either are
// excluded from the pair counts.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
    std::map<std::pair<int, int>, double> contingency;
    std::map<int, double> row_sum, col_sum;
    double n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || b[i] < 0) continue;
        contingency[{a[i], b[i]}] += 1;
        row_sum[a[i]] += 1;
        col_sum[b[i]] += 1;
        n += 1;
    }
    if (n < 2) throw std::invalid_argument("adjusted_rand_index: fewer than 2 shared points");
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0, rows = 0, cols = 0;
    for (const auto& [key, count] : contingency) index += choose2(count);
    for (const auto& [key, count] : row_sum) rows += choose2(count);
    for (const auto& [key, count] : col_sum) cols += choose2(count);
    const double expected = rows * cols / choose2(n);
    const double max_index = 0.5 * (rows + cols);
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (index - expected) / (max_index - expected);
}

}  // namespace narramap
