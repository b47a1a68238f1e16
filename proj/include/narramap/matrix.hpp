#pragma once

// Small dense linear algebra kernel: row-major matrix, products, and a cyclic
// Jacobi eigensolver for symmetric matrices. Sized for desk-scale corpora
// (matrices up to a few thousand rows), not BLAS-scale work.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace narramap {

using Vec = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }

    static Matrix from_rows(const std::vector<Vec>& rows_in) {
        if (rows_in.empty()) return {};
        Matrix m(rows_in.size(), rows_in.front().size());
        for (std::size_t i = 0; i < rows_in.size(); ++i) {
            if (rows_in[i].size() != m.cols)
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows_in[i][j];
        }
        return m;
    }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// y = M x
inline Vec matvec(const Matrix& m, const Vec& x) {
    if (x.size() != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

// y = Mᵀ x
inline Vec matvec_t(const Matrix& m, const Vec& x) {
    if (x.size() != m.rows) throw std::invalid_argument("matvec_t: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += r[j] * xi;
    }
    return y;
}

// AᵀA of an N×D matrix, D×D symmetric.
inline Matrix gram_tt(const Matrix& a) {
    Matrix g(a.cols, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* r = a.row(i);
        for (std::size_t p = 0; p < a.cols; ++p) {
            const double rp = r[p];
            if (rp == 0.0) continue;
            double* gr = g.row(p);
            for (std::size_t q = p; q < a.cols; ++q) gr[q] += rp * r[q];
        }
    }
    for (std::size_t p = 0; p < a.cols; ++p)
        for (std::size_t q = 0; q < p; ++q) g(p, q) = g(q, p);
    return g;
}

// AAᵀ of an N×D matrix, N×N symmetric.
inline Matrix gram_nn(const Matrix& a) {
    Matrix g(a.rows, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ri = a.row(i);
        for (std::size_t j = i; j < a.rows; ++j) {
            const double* rj = a.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < a.cols; ++c) s += ri[c] * rj[c];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

struct EigResult {
    Vec values;       // descending
    Matrix vectors;   // column k is the eigenvector for values[k]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
// returned in descending order with orthonormal eigenvector columns.
inline EigResult eig_sym(Matrix a, int max_sweeps = 64) {
    if (a.rows != a.cols) throw std::invalid_argument("eig_sym: matrix not square");
    const std::size_t n = a.rows;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double frob = 0.0;
    for (double x : a.data) frob += x * x;
    frob = std::sqrt(frob);
    const double tol = 1e-14 * (frob > 0 ? frob : 1.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol / (n * n)) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
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
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i);
                    const double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
        return x < y;
    });

    EigResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[k]);
    }
    return res;
}

}  // namespace narramap
