#pragma once

// Native UMAP: exact k-NN, fuzzy simplicial graph, and a single-threaded
// stochastic layout optimizer. Exactness and single-threaded SGD are
// deliberate: at desk scale they buy full reproducibility for a given seed,
// which approximate neighbor trees and parallel updates would forfeit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "narramap/matrix.hpp"
#include "narramap/rng.hpp"

namespace narramap {

enum class Metric { Euclidean, Cosine };

inline const char* to_string(Metric m) {
    return m == Metric::Euclidean ? "euclidean" : "cosine";
}

struct UmapParams {
    int n_neighbors = 15;     // must be < N
    double min_dist = 0.1;    // must be < spread
    int n_components = 2;
    int n_epochs = 500;
    std::uint64_t seed = 0;
    Metric metric = Metric::Euclidean;
    double spread = 1.0;
    double learning_rate = 1.0;
    int negative_sample_rate = 5;
};

struct KnnResult {
    std::size_t n = 0;
    int k = 0;
    std::vector<std::vector<std::size_t>> neighbors;  // per point, k ids
    std::vector<std::vector<double>> distances;       // sorted ascending, ties by id
};

inline double point_distance(const double* a, const double* b, std::size_t dim, Metric metric) {
    if (metric == Metric::Euclidean) {
        double s = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = a[c] - b[c];
            s += d * d;
        }
        return std::sqrt(s);
    }
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        ab += a[c] * b[c];
        aa += a[c] * a[c];
        bb += b[c] * b[c];
    }
    if (aa == 0.0 || bb == 0.0) return 1.0;  // zero vectors sit at the neutral distance
    return 1.0 - std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

// Exact k nearest neighbors by full scan. O(N²·dim): acceptable at desk
// scale and free of the nondeterminism of approximate trees. Ties break
// toward the smaller index; self is excluded.
inline KnnResult knn(const Matrix& points, int k, Metric metric = Metric::Euclidean) {
    const std::size_t n = points.rows;
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (static_cast<std::size_t>(k) >= n)
        throw std::invalid_argument("knn: k must be < number of points (" + std::to_string(k) +
                                    " >= " + std::to_string(n) + ")");
    KnnResult res;
    res.n = n;
    res.k = k;
    res.neighbors.assign(n, {});
    res.distances.assign(n, {});

    std::vector<std::pair<double, std::size_t>> row(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            row[w++] = {point_distance(points.row(i), points.row(j), points.cols, metric), j};
        }
        std::partial_sort(row.begin(), row.begin() + k, row.end());
        res.neighbors[i].resize(k);
        res.distances[i].resize(k);
        for (int m = 0; m < k; ++m) {
            res.distances[i][m] = row[m].first;
            res.neighbors[i][m] = row[m].second;
        }
    }
    return res;
}

struct FuzzyEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 0.0;  // in (0,1]
};

struct FuzzyGraph {
    std::size_t n = 0;
    int k = 0;
    std::vector<FuzzyEdge> edges;  // undirected, u < v, sorted
    Vec rho;                       // distance to nearest neighbor
    Vec sigma;                     // per-point bandwidth
    bool degenerate_sigma = false; // some point saw all-identical distances

    // Directed membership weight of j as a neighbor of i, before symmetrization.
    double directed_weight(double dist, std::size_t i) const {
        return std::exp(-std::max(0.0, dist - rho[i]) / sigma[i]);
    }
};

// Builds the symmetrized fuzzy graph. Per point the bandwidth σ_i is found by
// binary search so the directed membership row sums to log2(k); the directed
// weights are then combined as W = A + Aᵀ − A∘Aᵀ.
inline FuzzyGraph fuzzy_graph(const KnnResult& nn) {
    const std::size_t n = nn.n;
    const int k = nn.k;
    const double target = std::log2(static_cast<double>(k));

    FuzzyGraph graph;
    graph.n = n;
    graph.k = k;
    graph.rho.resize(n);
    graph.sigma.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& dists = nn.distances[i];
        const double rho = dists.front();
        graph.rho[i] = rho;

        auto weight_sum = [&](double sigma) {
            double s = 0.0;
            for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
            return s;
        };

        const bool all_identical = (dists.back() == dists.front());
        if (all_identical) {
            // Σ is constant in σ; nothing to solve.
            graph.sigma[i] = 1.0;
            graph.degenerate_sigma = true;
            continue;
        }

        double mean_dist = 0.0;
        for (double d : dists) mean_dist += d;
        mean_dist /= dists.size();

        // As σ→0 the sum approaches the count of neighbors at distance ρ.
        int at_rho = 0;
        for (double d : dists)
            if (d <= rho) ++at_rho;
        if (static_cast<double>(at_rho) >= target) {
            graph.sigma[i] = std::max(1e-3 * mean_dist, 1e-12);
            continue;
        }

        double lo = 0.0;
        double hi = 1.0;
        int expand = 0;
        while (weight_sum(hi) < target && expand < 64) {
            hi *= 2.0;
            ++expand;
        }
        double sigma = hi;
        for (int it = 0; it < 64; ++it) {
            sigma = 0.5 * (lo + hi);
            const double s = weight_sum(sigma);
            if (std::abs(s - target) < 1e-5) break;
            if (s > target) hi = sigma;
            else lo = sigma;
        }
        graph.sigma[i] = sigma;
    }

    // Symmetrize the directed weights.
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> directed;
    for (std::size_t i = 0; i < n; ++i) {
        for (int m = 0; m < k; ++m) {
            const std::size_t j = nn.neighbors[i][m];
            const double w = graph.directed_weight(nn.distances[i][m], i);
            const std::size_t lo = std::min(i, j);
            const std::size_t hi = std::max(i, j);
            auto& slot = directed[{lo, hi}];
            if (i < j) slot.first = std::max(slot.first, w);
            else slot.second = std::max(slot.second, w);
        }
    }
    graph.edges.reserve(directed.size());
    for (const auto& [key, ab] : directed) {
        const double w = ab.first + ab.second - ab.first * ab.second;
        if (w > 0.0) graph.edges.push_back({key.first, key.second, w});
    }
    return graph;
}

// Least-squares fit of the curve 1/(1 + a·x^{2b}) to the target membership
// function defined by min_dist and spread (Gauss-Newton with damping).
struct CurveParams {
    double a = 0.0;
    double b = 0.0;
};

inline CurveParams fit_curve_params(double min_dist, double spread = 1.0) {
    if (min_dist >= spread)
        throw std::invalid_argument("fit_curve_params: min_dist must be < spread");
    const int grid = 300;
    std::vector<double> xs(grid), ys(grid);
    for (int i = 0; i < grid; ++i) {
        const double x = 3.0 * spread * (i + 1) / grid;
        xs[i] = x;
        ys[i] = (x <= min_dist) ? 1.0 : std::exp(-(x - min_dist) / spread);
    }

    double a = 1.0, b = 1.0;
    double lambda = 1e-3;
    auto residual_norm = [&](double pa, double pb) {
        double s = 0.0;
        for (int i = 0; i < grid; ++i) {
            const double f = 1.0 / (1.0 + pa * std::pow(xs[i], 2.0 * pb));
            const double r = ys[i] - f;
            s += r * r;
        }
        return s;
    };

    double current = residual_norm(a, b);
    for (int iter = 0; iter < 200; ++iter) {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
        for (int i = 0; i < grid; ++i) {
            const double t = std::pow(xs[i], 2.0 * b);
            const double denom = 1.0 + a * t;
            const double f = 1.0 / denom;
            const double r = ys[i] - f;
            const double dfda = -t / (denom * denom);
            const double dfdb = -2.0 * a * t * std::log(xs[i]) / (denom * denom);
            jtj00 += dfda * dfda;
            jtj01 += dfda * dfdb;
            jtj11 += dfdb * dfdb;
            jtr0 += dfda * r;
            jtr1 += dfdb * r;
        }
        const double m00 = jtj00 + lambda, m11 = jtj11 + lambda, m01 = jtj01;
        const double det = m00 * m11 - m01 * m01;
        if (det == 0.0) break;
        const double da = (m11 * jtr0 - m01 * jtr1) / det;
        const double db = (m00 * jtr1 - m01 * jtr0) / det;
        const double na = a + da, nb = b + db;
        const double cand = (na > 0 && nb > 0) ? residual_norm(na, nb)
                                               : std::numeric_limits<double>::infinity();
        if (cand < current) {
            a = na;
            b = nb;
            current = cand;
            lambda = std::max(lambda * 0.5, 1e-12);
            if (std::abs(da) + std::abs(db) < 1e-12) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }
    return {a, b};
}

namespace detail {

using WeightedAdjacency = std::vector<std::vector<std::pair<std::size_t, double>>>;

// Leading non-trivial eigenvectors of D^{-1/2} W D^{-1/2} over one connected
// vertex set, by orthogonal iteration with the trivial eigenvector deflated.
// Coordinates are scaled to max-abs 1. Duplicate points have identical graph
// rows and therefore identical coordinates. Returns nullopt when the
// spectrum is too degenerate to iterate (e.g. all points coincide).
inline std::optional<Matrix> spectral_component(const WeightedAdjacency& adj,
                                                const std::vector<std::size_t>& members,
                                                int n_components, Rng& rng) {
    const std::size_t m = members.size();
    if (m < static_cast<std::size_t>(n_components) + 2) return std::nullopt;
    std::vector<std::size_t> local_of(adj.size(), 0);
    for (std::size_t i = 0; i < m; ++i) local_of[members[i]] = i;

    Vec degree(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& [v, w] : adj[members[i]]) degree[i] += w;
    for (double d : degree)
        if (d <= 0.0) return std::nullopt;
    Vec inv_sqrt_deg(m);
    for (std::size_t i = 0; i < m; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(degree[i]);

    // Shifted operator (S + I)/2 keeps the spectrum in [0,1] so orthogonal
    // iteration converges to the top block rather than the largest magnitude.
    auto apply = [&](const Vec& x) {
        Vec y(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double xu = x[i];
            for (const auto& [v, w] : adj[members[i]]) {
                const std::size_t j = local_of[v];
                y[j] += w * inv_sqrt_deg[j] * inv_sqrt_deg[i] * xu;
            }
        }
        for (std::size_t i = 0; i < m; ++i) y[i] = 0.5 * (y[i] + x[i]);
        return y;
    };

    Vec trivial(m);
    for (std::size_t i = 0; i < m; ++i) trivial[i] = std::sqrt(degree[i]);
    const double tn = norm(trivial);
    for (auto& x : trivial) x /= tn;

    std::vector<Vec> basis(n_components, Vec(m));
    for (auto& col : basis)
        for (auto& x : col) x = rng.normal();

    auto orthogonalize = [&](std::vector<Vec>& cols) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double p = dot(cols[c], trivial);
            for (std::size_t i = 0; i < m; ++i) cols[c][i] -= p * trivial[i];
            for (std::size_t prev = 0; prev < c; ++prev) {
                p = dot(cols[c], cols[prev]);
                for (std::size_t i = 0; i < m; ++i) cols[c][i] -= p * cols[prev][i];
            }
            const double cn = norm(cols[c]);
            if (cn < 1e-12) return false;
            for (auto& x : cols[c]) x /= cn;
        }
        return true;
    };

    if (!orthogonalize(basis)) return std::nullopt;
    for (int iter = 0; iter < 300; ++iter) {
        for (auto& col : basis) col = apply(col);
        if (!orthogonalize(basis)) return std::nullopt;
    }

    Matrix coords(m, n_components);
    double max_abs = 0.0;
    for (int c = 0; c < n_components; ++c)
        for (std::size_t i = 0; i < m; ++i) {
            // Undo the D^{1/2} weighting to obtain the random-walk eigenvectors.
            coords(i, c) = basis[c][i] * inv_sqrt_deg[i];
            max_abs = std::max(max_abs, std::abs(coords(i, c)));
        }
    if (max_abs == 0.0) return std::nullopt;
    for (auto& x : coords.data) x /= max_abs;
    return coords;
}

// Spectral initialization of the whole layout. A connected graph gets the
// plain spectral embedding scaled to [-10, 10]. A disconnected graph gets a
// spectral layout per component, each placed at a seeded random offset; a
// component whose spectrum cannot be iterated (coincident points, too few
// members) collapses to its offset point. Duplicate inputs always start at
// identical coordinates.
inline std::optional<Matrix> spectral_init(const FuzzyGraph& graph, int n_components, Rng& rng) {
    const std::size_t n = graph.n;
    if (n < static_cast<std::size_t>(n_components) + 2) return std::nullopt;

    WeightedAdjacency adj(n);
    for (const auto& e : graph.edges) {
        adj[e.u].push_back({e.v, e.weight});
        adj[e.v].push_back({e.u, e.weight});
    }

    // connected components, ordered by smallest member
    std::vector<int> component(n, -1);
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        const int c = static_cast<int>(members.size());
        members.emplace_back();
        std::vector<std::size_t> stack = {start};
        component[start] = c;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            members[c].push_back(u);
            for (const auto& [v, w] : adj[u]) {
                if (component[v] < 0) {
                    component[v] = c;
                    stack.push_back(v);
                }
            }
        }
        std::sort(members[c].begin(), members[c].end());
    }

    Matrix init(n, n_components);
    if (members.size() == 1) {
        const auto coords = spectral_component(adj, members[0], n_components, rng);
        if (!coords) return std::nullopt;
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < n_components; ++c) init(members[0][i], c) = 10.0 * (*coords)(i, c);
        return init;
    }
    for (const auto& comp : members) {
        Vec offset(n_components);
        for (auto& x : offset) x = rng.uniform(-10.0, 10.0);
        const auto coords = spectral_component(adj, comp, n_components, rng);
        for (std::size_t i = 0; i < comp.size(); ++i)
            for (int c = 0; c < n_components; ++c)
                init(comp[i], c) = offset[c] + (coords ? (*coords)(i, c) : 0.0);
    }
    return init;
}

}  // namespace detail

// Stochastic layout optimization with negative sampling: attractive updates
// along graph edges, repulsive updates against sampled non-neighbors,
// learning rate decaying linearly to zero. Single-threaded by contract so a
// given (graph, params) pair always yields the same coordinates.
inline Matrix optimize_layout(const FuzzyGraph& graph, const UmapParams& params) {
    const std::size_t n = graph.n;
    if (n == 0 || graph.edges.empty()) throw std::invalid_argument("optimize_layout: empty graph");
    const int dim = params.n_components;
    const CurveParams curve = fit_curve_params(params.min_dist, params.spread);
    const double a = curve.a;
    const double b = curve.b;

    Rng rng(params.seed);
    Matrix coords(n, dim);
    const auto spectral = detail::spectral_init(graph, dim, rng);
    if (spectral) {
        coords = *spectral;
    } else {
        for (auto& x : coords.data) x = rng.uniform(-10.0, 10.0);
    }

    // Directed edge array in CSR order; each undirected edge drives updates
    // from both endpoints.
    struct DirectedEdge {
        std::size_t head, tail;
        double weight;
    };
    std::vector<DirectedEdge> edges;
    edges.reserve(graph.edges.size() * 2);
    for (const auto& e : graph.edges) {
        edges.push_back({e.u, e.v, e.weight});
        edges.push_back({e.v, e.u, e.weight});
    }
    std::sort(edges.begin(), edges.end(), [](const DirectedEdge& x, const DirectedEdge& y) {
        if (x.head != y.head) return x.head < y.head;
        return x.tail < y.tail;
    });

    double max_w = 0.0;
    for (const auto& e : edges) max_w = std::max(max_w, e.weight);

    const std::size_t m = edges.size();
    Vec epochs_per_sample(m), epoch_of_next_sample(m);
    Vec epochs_per_negative(m), epoch_of_next_negative(m);
    for (std::size_t e = 0; e < m; ++e) {
        epochs_per_sample[e] = max_w / edges[e].weight;
        epoch_of_next_sample[e] = epochs_per_sample[e];
        epochs_per_negative[e] = epochs_per_sample[e] / params.negative_sample_rate;
        epoch_of_next_negative[e] = epochs_per_negative[e];
    }

    auto clip = [](double x) { return std::clamp(x, -4.0, 4.0); };

    for (int epoch = 0; epoch < params.n_epochs; ++epoch) {
        const double alpha =
            params.learning_rate * (1.0 - static_cast<double>(epoch) / params.n_epochs);
        for (std::size_t e = 0; e < m; ++e) {
            if (epoch_of_next_sample[e] > epoch) continue;
            const std::size_t h = edges[e].head;
            const std::size_t t = edges[e].tail;
            double* yh = coords.row(h);
            double* yt = coords.row(t);

            double d2 = 0.0;
            for (int c = 0; c < dim; ++c) {
                const double diff = yh[c] - yt[c];
                d2 += diff * diff;
            }
            if (d2 > 0.0) {
                const double coef = (-2.0 * a * b * std::pow(d2, b - 1.0)) /
                                    (1.0 + a * std::pow(d2, b));
                for (int c = 0; c < dim; ++c) {
                    const double g = clip(coef * (yh[c] - yt[c]));
                    yh[c] += alpha * g;
                    yt[c] -= alpha * g;
                }
            }
            epoch_of_next_sample[e] += epochs_per_sample[e];

            const int n_neg = static_cast<int>((epoch - epoch_of_next_negative[e]) /
                                               epochs_per_negative[e]);
            for (int p = 0; p < n_neg; ++p) {
                const std::size_t s = rng.index(n);
                if (s == h) continue;
                const double* ys = coords.row(s);
                double r2 = 0.0;
                for (int c = 0; c < dim; ++c) {
                    const double diff = yh[c] - ys[c];
                    r2 += diff * diff;
                }
                if (r2 > 0.0) {
                    const double coef =
                        (2.0 * b) / ((0.001 + r2) * (1.0 + a * std::pow(r2, b)));
                    for (int c = 0; c < dim; ++c) yh[c] += alpha * clip(coef * (yh[c] - ys[c]));
                } else {
                    for (int c = 0; c < dim; ++c) yh[c] += alpha * 4.0;
                }
            }
            epoch_of_next_negative[e] += n_neg * epochs_per_negative[e];
        }
    }
    return coords;
}

// Full projection: k-NN graph, fuzzy weights, optimized layout.
inline Matrix umap_project(const Matrix& points, const UmapParams& params) {
    if (points.rows < 2) throw std::invalid_argument("umap_project: need at least 2 points");
    if (params.n_neighbors >= static_cast<int>(points.rows))
        throw std::invalid_argument("umap_project: n_neighbors must be < N");
    const KnnResult nn = knn(points, params.n_neighbors, params.metric);
    const FuzzyGraph graph = fuzzy_graph(nn);
    return optimize_layout(graph, params);
}

}  // namespace narramap
