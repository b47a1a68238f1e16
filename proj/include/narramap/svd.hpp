#pragma once

// Truncated SVD reducers: per-role micro dimension reduction for actant
// embeddings. The SVD is uncentered; centering belongs exclusively to the
// PCA variant, which reuses the same fit on mean-centered data.

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "narramap/matrix.hpp"

namespace narramap {

struct SvdReducer {
    std::string role;        // actant role name, or "pooled"
    std::size_t input_dim = 0;   // D
    std::size_t reduced_dim = 0; // d
    Matrix components;       // D×d, orthonormal columns (top right singular vectors)
    Vec singular_values;     // d, non-increasing, zero-padded when rank < d
    bool degenerate = false; // data rank was below d

    // Vᵀ v. A zero vector maps to a zero vector.
    Vec project(const Vec& v) const {
        if (v.size() != input_dim)
            throw std::invalid_argument("SvdReducer::project: expected dimension " +
                                        std::to_string(input_dim) + ", got " +
                                        std::to_string(v.size()));
        Vec out(reduced_dim, 0.0);
        for (std::size_t i = 0; i < input_dim; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            const double* row = components.row(i);
            for (std::size_t k = 0; k < reduced_dim; ++k) out[k] += row[k] * vi;
        }
        return out;
    }
};

namespace detail {

// Deterministic sign convention: the largest-magnitude entry of each column
// is made positive (first index wins on ties), so cached reducers reproduce
// across runs and platforms.
inline void fix_column_signs(Matrix& m) {
    for (std::size_t k = 0; k < m.cols; ++k) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double a = std::abs(m(i, k));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (m(arg, k) < 0.0)
            for (std::size_t i = 0; i < m.rows; ++i) m(i, k) = -m(i, k);
    }
}

// Extends the first `have` orthonormal columns of `m` to all m.cols columns
// by Gram-Schmidt over the standard basis.
inline void complete_orthonormal(Matrix& m, std::size_t have) {
    std::size_t next_basis = 0;
    for (std::size_t k = have; k < m.cols; ++k) {
        while (next_basis < m.rows) {
            Vec cand(m.rows, 0.0);
            cand[next_basis] = 1.0;
            ++next_basis;
            for (std::size_t j = 0; j < k; ++j) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m.rows; ++i) proj += m(i, j) * cand[i];
                for (std::size_t i = 0; i < m.rows; ++i) cand[i] -= proj * m(i, j);
            }
            const double n = norm(cand);
            if (n > 0.5) {
                for (std::size_t i = 0; i < m.rows; ++i) m(i, k) = cand[i] / n;
                break;
            }
        }
        if (next_basis > m.rows)
            throw std::runtime_error("complete_orthonormal: basis exhausted");
    }
}

}  // namespace detail

// Top-d right singular vectors of the uncentered data matrix. Works through
// the Gram matrix on the smaller side: AᵀA when N ≥ D, AAᵀ otherwise.
// Rank-deficient data is padded with zero singular values and flagged.
inline SvdReducer fit_svd(const Matrix& data, std::size_t d, const std::string& role = "") {
    const std::size_t n = data.rows;
    const std::size_t dim = data.cols;
    if (d < 1) throw std::invalid_argument("fit_svd: target dimension must be >= 1");
    if (n < d)
        throw std::invalid_argument("fit_svd: need at least d=" + std::to_string(d) +
                                    " rows, got " + std::to_string(n) +
                                    "; choose a smaller target dimension");
    if (dim < d)
        throw std::invalid_argument("fit_svd: target dimension " + std::to_string(d) +
                                    " exceeds input dimension " + std::to_string(dim));

    SvdReducer reducer;
    reducer.role = role;
    reducer.input_dim = dim;
    reducer.reduced_dim = d;
    reducer.components = Matrix(dim, d);
    reducer.singular_values.assign(d, 0.0);

    if (n >= dim) {
        const EigResult eig = eig_sym(gram_tt(data));
        const double lam_max = std::max(eig.values.front(), 0.0);
        const double tol = static_cast<double>(std::max(n, dim)) *
                           std::numeric_limits<double>::epsilon() * lam_max;
        for (std::size_t k = 0; k < d; ++k) {
            const double lam = eig.values[k];
            if (lam > tol) {
                reducer.singular_values[k] = std::sqrt(lam);
            } else {
                reducer.singular_values[k] = 0.0;
                reducer.degenerate = true;
            }
            for (std::size_t i = 0; i < dim; ++i)
                reducer.components(i, k) = eig.vectors(i, k);
        }
    } else {
        const EigResult eig = eig_sym(gram_nn(data));
        const double lam_max = std::max(eig.values.front(), 0.0);
        const double tol = static_cast<double>(std::max(n, dim)) *
                           std::numeric_limits<double>::epsilon() * lam_max;
        std::size_t usable = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const double lam = eig.values[k];
            if (lam <= tol) break;
            const double sigma = std::sqrt(lam);
            reducer.singular_values[k] = sigma;
            // v_k = Aᵀ u_k / σ_k
            Vec u(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = eig.vectors(i, k);
            Vec v = matvec_t(data, u);
            for (std::size_t i = 0; i < dim; ++i) reducer.components(i, k) = v[i] / sigma;
            ++usable;
        }
        if (usable < d) {
            reducer.degenerate = true;
            detail::complete_orthonormal(reducer.components, usable);
        }
    }

    detail::fix_column_signs(reducer.components);
    return reducer;
}

// PCA is the same fit on mean-centered data; projection subtracts the mean.
struct PcaReducer {
    Vec mean;
    SvdReducer svd;

    Vec project(const Vec& v) const {
        Vec centered(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) centered[i] = v[i] - mean[i];
        return svd.project(centered);
    }
};

inline Vec column_means(const Matrix& data) {
    Vec mean(data.cols, 0.0);
    for (std::size_t i = 0; i < data.rows; ++i) {
        const double* row = data.row(i);
        for (std::size_t j = 0; j < data.cols; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= static_cast<double>(data.rows);
    return mean;
}

inline Matrix center_rows(const Matrix& data, const Vec& mean) {
    Matrix out = data;
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) -= mean[j];
    return out;
}

inline PcaReducer fit_pca(const Matrix& data, std::size_t d, const std::string& role = "") {
    PcaReducer pca;
    pca.mean = column_means(data);
    pca.svd = fit_svd(center_rows(data, pca.mean), d, role);
    return pca;
}

// max |VᵀV − I|, the orthonormality defect of the component columns.
inline double orthonormality_defect(const Matrix& v) {
    double worst = 0.0;
    for (std::size_t a = 0; a < v.cols; ++a) {
        for (std::size_t b = a; b < v.cols; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < v.rows; ++i) s += v(i, a) * v(i, b);
            const double target = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Reducer persistence (versioned JSON, components row-major)

inline void save_reducer(const SvdReducer& r, const std::string& path) {
    nlohmann::json obj;
    obj["format"] = "narramap-reducer";
    obj["version"] = 1;
    obj["role"] = r.role;
    obj["input_dim"] = r.input_dim;
    obj["reduced_dim"] = r.reduced_dim;
    obj["singular_values"] = r.singular_values;
    obj["degenerate"] = r.degenerate;
    obj["components_row_major"] = r.components.data;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write reducer: " + path);
    out << obj.dump();
}

inline SvdReducer load_reducer(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read reducer: " + path);
    nlohmann::json obj;
    in >> obj;
    if (obj.value("format", std::string()) != "narramap-reducer")
        throw std::runtime_error("not a narramap reducer file: " + path);
    SvdReducer r;
    r.role = obj.at("role").get<std::string>();
    r.input_dim = obj.at("input_dim").get<std::size_t>();
    r.reduced_dim = obj.at("reduced_dim").get<std::size_t>();
    r.singular_values = obj.at("singular_values").get<Vec>();
    r.degenerate = obj.at("degenerate").get<bool>();
    r.components = Matrix(r.input_dim, r.reduced_dim);
    r.components.data = obj.at("components_row_major").get<std::vector<double>>();
    if (r.components.data.size() != r.input_dim * r.reduced_dim)
        throw std::runtime_error("reducer component size mismatch: " + path);
    return r;
}

}  // namespace narramap
