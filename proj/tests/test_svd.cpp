#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "narramap/rng.hpp"
#include "narramap/svd.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace narramap;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (auto& x : m.data) x = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("rank-1 data yields the generating direction with sigma sqrt(N)") {
    const std::size_t n = 6, dim = 4;
    Matrix data(n, dim);
    for (std::size_t i = 0; i < n; ++i) data(i, 0) = 1.0;  // rows all e1
    const SvdReducer reducer = fit_svd(data, 1);
    CHECK(reducer.components(0, 0) == doctest::Approx(1.0).epsilon(1e-10));  // sign fixed +
    for (std::size_t i = 1; i < dim; ++i)
        CHECK(std::abs(reducer.components(i, 0)) < 1e-10);
    CHECK(reducer.singular_values[0] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-10));
}

TEST_CASE("identity-rows matrix matches a brute-force eigendecomposition of AtA") {
    // A = I3: AᵀA = I, all singular values 1
    Matrix data(3, 3);
    for (std::size_t i = 0; i < 3; ++i) data(i, i) = 1.0;
    const SvdReducer reducer = fit_svd(data, 2);
    CHECK(reducer.singular_values[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(reducer.singular_values[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(orthonormality_defect(reducer.components) < 1e-10);
}

TEST_CASE("random matrices match the one-sided Jacobi oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Matrix data = random_matrix(50, 16, seed);
        const std::size_t d = 8;
        const SvdReducer reducer = fit_svd(data, d);
        const auto oracle = oracle::hestenes_svd(data);

        for (std::size_t k = 0; k < d; ++k)
            CHECK(reducer.singular_values[k] ==
                  doctest::Approx(oracle.singular_values[k]).epsilon(1e-8));

        const double impl_err = oracle::reconstruction_error(data, reducer.components, d);
        const double oracle_err = oracle::reconstruction_error(data, oracle.v, d);
        CHECK(std::abs(impl_err - oracle_err) <= 1e-6 * std::max(1.0, oracle_err));
        CHECK(orthonormality_defect(reducer.components) < 1e-5);
    }
}

TEST_CASE("wide matrices (N < D) go through the small Gram side") {
    const Matrix data = random_matrix(12, 40, 9);
    const SvdReducer reducer = fit_svd(data, 5);
    const auto oracle = oracle::hestenes_svd(data);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(reducer.singular_values[k] ==
              doctest::Approx(oracle.singular_values[k]).epsilon(1e-8));
    CHECK(orthonormality_defect(reducer.components) < 1e-5);
}

TEST_CASE("fit_svd rejects d > N with an actionable message") {
    const Matrix data = random_matrix(3, 8, 1);
    try {
        fit_svd(data, 5);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("smaller") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_svd(random_matrix(8, 3, 1), 5), std::invalid_argument);
}

TEST_CASE("rank-deficient data pads zero singular values and flags degenerate") {
    // 8 rows but only rank 2 (two distinct directions)
    Matrix data(8, 6);
    for (std::size_t i = 0; i < 8; ++i) {
        if (i % 2 == 0) data(i, 0) = 2.0;
        else data(i, 1) = 1.0;
    }
    const SvdReducer reducer = fit_svd(data, 4);
    CHECK(reducer.degenerate);
    CHECK(reducer.singular_values[2] == 0.0);
    CHECK(reducer.singular_values[3] == 0.0);
    CHECK(orthonormality_defect(reducer.components) < 1e-5);  // padding stays orthonormal
}

TEST_CASE("projection is linear and consistent with explicit coordinates") {
    const Matrix data = random_matrix(30, 10, 4);
    const SvdReducer reducer = fit_svd(data, 4);
    Rng rng(11);
    Vec u(10), v(10);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();

    SUBCASE("zero maps to zero") {
        const Vec zero(10, 0.0);
        for (double x : reducer.project(zero)) CHECK(x == 0.0);
    }

    SUBCASE("linearity within 1e-6") {
        const double alpha = 2.5, beta = -0.75;
        Vec combo(10);
        for (std::size_t i = 0; i < 10; ++i) combo[i] = alpha * u[i] + beta * v[i];
        const Vec lhs = reducer.project(combo);
        const Vec pu = reducer.project(u);
        const Vec pv = reducer.project(v);
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(lhs[k] == doctest::Approx(alpha * pu[k] + beta * pv[k]).epsilon(1e-6));
    }

    SUBCASE("a component column projects to a unit coordinate") {
        Vec col(10);
        for (std::size_t i = 0; i < 10; ++i) col[i] = reducer.components(i, 0);
        const Vec proj = reducer.project(col);
        CHECK(proj[0] == doctest::Approx(1.0).epsilon(1e-8));
        for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(proj[k]) < 1e-8);
    }

    SUBCASE("matches a naive dense multiply oracle") {
        const Vec proj = reducer.project(u);
        for (std::size_t k = 0; k < 4; ++k) {
            double expect = 0.0;
            for (std::size_t i = 0; i < 10; ++i) expect += reducer.components(i, k) * u[i];
            CHECK(proj[k] == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(reducer.project(Vec(7, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("pca equals svd on mean-centered data through the shared code path") {
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
        const Matrix data = random_matrix(40, 12, seed);
        const PcaReducer pca = fit_pca(data, 5);
        const Matrix centered = center_rows(data, column_means(data));
        const SvdReducer direct = fit_svd(centered, 5);
        CHECK(pca.svd.components.data == direct.components.data);          // bitwise
        CHECK(pca.svd.singular_values == direct.singular_values);          // bitwise
    }
}

TEST_CASE("reducers persist exactly") {
    support::TempDir tmp("reducer");
    const Matrix data = random_matrix(20, 8, 33);
    const SvdReducer reducer = fit_svd(data, 3, "Subject");
    const auto path = (tmp.path() / "reducer.json").string();
    save_reducer(reducer, path);
    const SvdReducer loaded = load_reducer(path);
    CHECK(loaded.role == "Subject");
    CHECK(loaded.components.data == reducer.components.data);
    CHECK(loaded.singular_values == reducer.singular_values);
    CHECK(loaded.input_dim == 8);
    CHECK(loaded.reduced_dim == 3);
}
