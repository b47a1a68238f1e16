#pragma once

// Test-only oracles. These deliberately use different algorithms than the
// library: the SVD oracle is a one-sided Jacobi (Hestenes) decomposition of
// the data matrix itself, and the Ward oracle recomputes the merge objective
// from cluster members at every step instead of Lance-Williams updates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "narramap/matrix.hpp"

namespace oracle {

using narramap::Matrix;
using narramap::Vec;

struct SvdOracle {
    Vec singular_values;  // descending, length = cols of A
    Matrix v;             // right singular vectors, cols ordered to match
};

// One-sided Jacobi SVD: rotate column pairs of A until all are mutually
// orthogonal, accumulating the rotations into V. Column norms are the
// singular values.
inline SvdOracle hestenes_svd(Matrix a, int max_sweeps = 60) {
    const std::size_t n = a.rows;
    const std::size_t d = a.cols;
    Matrix v(d, d);
    for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

    double frob2 = 0.0;
    for (double x : a.data) frob2 += x * x;
    const double tol = 1e-28 * (frob2 > 0 ? frob2 : 1.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    app += a(i, p) * a(i, p);
                    aqq += a(i, q) * a(i, q);
                    apq += a(i, p) * a(i, q);
                }
                if (apq * apq <= tol * 1e-2 || apq == 0.0) continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                            : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        if (!rotated) break;
    }

    SvdOracle out;
    out.singular_values.resize(d);
    std::vector<std::size_t> order(d);
    Vec norms(d);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
        norms[j] = std::sqrt(s);
        order[j] = j;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
    out.v = Matrix(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        out.singular_values[k] = norms[order[k]];
        for (std::size_t i = 0; i < d; ++i) out.v(i, k) = v(i, order[k]);
    }
    return out;
}

// ‖A − A V Vᵀ‖_F for the first d columns of V.
inline double reconstruction_error(const Matrix& a, const Matrix& v, std::size_t d) {
    double err2 = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        Vec coords(d, 0.0);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t c = 0; c < a.cols; ++c) coords[k] += v(c, k) * a(i, c);
        for (std::size_t c = 0; c < a.cols; ++c) {
            double recon = 0.0;
            for (std::size_t k = 0; k < d; ++k) recon += v(c, k) * coords[k];
            const double diff = a(i, c) - recon;
            err2 += diff * diff;
        }
    }
    return std::sqrt(err2);
}

// --- naive Ward ---------------------------------------------------------------

struct WardMerge {
    std::size_t a, b;  // cluster ids, scipy convention
    double cost;
    std::size_t size;
};

// Recompute-from-scratch Ward: each step evaluates
// sqrt(2·|A||B|/(|A|+|B|)) · ‖centroid_A − centroid_B‖ for every active pair
// and merges the minimum, ties toward the smallest id pair.
inline std::vector<WardMerge> naive_ward(const Matrix& points) {
    const std::size_t n = points.rows;
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});

    auto centroid = [&](const Cluster& c) {
        Vec mean(points.cols, 0.0);
        for (std::size_t m : c.members)
            for (std::size_t col = 0; col < points.cols; ++col) mean[col] += points(m, col);
        for (auto& x : mean) x /= static_cast<double>(c.members.size());
        return mean;
    };

    std::vector<WardMerge> merges;
    for (std::size_t step = 0; step < n - 1; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        std::pair<std::size_t, std::size_t> best_key{0, 0};
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const Vec ci = centroid(active[i]);
                const Vec cj = centroid(active[j]);
                double d2 = 0.0;
                for (std::size_t c = 0; c < points.cols; ++c) {
                    const double diff = ci[c] - cj[c];
                    d2 += diff * diff;
                }
                const double na = static_cast<double>(active[i].members.size());
                const double nb = static_cast<double>(active[j].members.size());
                const double cost = std::sqrt(2.0 * na * nb / (na + nb) * d2);
                const std::pair<std::size_t, std::size_t> key{
                    std::min(active[i].id, active[j].id), std::max(active[i].id, active[j].id)};
                if (cost < best || (cost == best && key < best_key)) {
                    best = cost;
                    bi = i;
                    bj = j;
                    best_key = key;
                }
            }
        }
        Cluster merged;
        merged.id = n + step;
        merged.members = active[bi].members;
        merged.members.insert(merged.members.end(), active[bj].members.begin(),
                              active[bj].members.end());
        merges.push_back({best_key.first, best_key.second, best, merged.members.size()});
        if (bj > bi) {
            active.erase(active.begin() + bj);
            active.erase(active.begin() + bi);
        } else {
            active.erase(active.begin() + bi);
            active.erase(active.begin() + bj);
        }
        active.push_back(merged);
    }
    return merges;
}

}  // namespace oracle
