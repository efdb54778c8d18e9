#include <doctest.h>

#include <cmath>

#include "crescal/errors.hpp"
#include "crescal/linear.hpp"
#include "crescal/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace crescal;
using testsup::random_binary_sparse;
using testsup::random_matrix;

TEST_SUITE("linear") {

TEST_CASE("spmm identity slice returns the dense operand") {
    Rng rng(1);
    const DenseMatrix a = random_matrix(6, 3, rng);
    std::vector<SparseEntry> eye;
    for (std::size_t i = 0; i < 6; ++i)
        eye.push_back({i, i, 1.0});
    const SparseMatrix s = SparseMatrix::from_entries(6, 6, eye, true);
    CHECK(bit_equal(spmm(s, a), a));
    CHECK(bit_equal(spmm_t(s, a), a));
}

TEST_CASE("spmm zero slice returns zeros") {
    Rng rng(2);
    const DenseMatrix a = random_matrix(5, 2, rng);
    const SparseMatrix s = SparseMatrix::from_entries(5, 5, {}, true);
    CHECK(frob_norm2(spmm(s, a)) == 0.0);
    CHECK(frob_norm2(spmm_t(s, a)) == 0.0);
}

TEST_CASE("spmm matches the dense product oracle") {
    Rng rng(3);
    const SparseMatrix s = random_binary_sparse(6, 0.25, rng);
    const DenseMatrix a = random_matrix(6, 3, rng);
    const DenseMatrix dense_prod = oracle::dense_matmul(s.to_dense(), a);
    CHECK(max_abs_diff(spmm(s, a), dense_prod) < 1e-12);
    const DenseMatrix dense_t =
        oracle::dense_matmul(oracle::dense_transpose(s.to_dense()), a);
    CHECK(max_abs_diff(spmm_t(s, a), dense_t) < 1e-12);
}

TEST_CASE("spmm rejects dimension mismatch") {
    Rng rng(4);
    const SparseMatrix s = random_binary_sparse(4, 0.3, rng);
    const DenseMatrix a = random_matrix(5, 2, rng);
    CHECK_THROWS_AS(spmm(s, a), ShapeError);
}

TEST_CASE("solve_ridge identity gram is a copy") {
    Rng rng(5);
    const DenseMatrix b = random_matrix(3, 2, rng);
    const DenseMatrix x = solve_ridge({DenseMatrix::identity(3), b, 0.0});
    CHECK(max_abs_diff(x, b) < 1e-14);
}

TEST_CASE("solve_ridge zero gram scales by 1/lambda") {
    Rng rng(6);
    const DenseMatrix b = random_matrix(4, 1, rng);
    const DenseMatrix x = solve_ridge({DenseMatrix(4, 4), b, 0.5});
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(x(i, 0) == doctest::Approx(2.0 * b(i, 0)).epsilon(1e-14));
}

TEST_CASE("solve_ridge matches explicit inverse on a random SPD system") {
    Rng rng(7);
    const DenseMatrix m = random_matrix(5, 5, rng);
    DenseMatrix spd = matmul_tn(m, m);
    for (std::size_t i = 0; i < 5; ++i)
        spd(i, i) += 1.0;
    const DenseMatrix b = random_matrix(5, 3, rng);
    const DenseMatrix want = oracle::dense_matmul(oracle::explicit_inverse(spd), b);
    const DenseMatrix got = solve_ridge({spd, b, 0.0});
    CHECK(oracle::relative_frob_error(got, want) < 1e-10);
}

TEST_CASE("solve_ridge residual bound holds on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        const std::size_t n = 2 + rng.below(5);
        const DenseMatrix m = random_matrix(n, n, rng);
        DenseMatrix gram = matmul_tn(m, m);
        const double lambda = seed % 2 == 0 ? 0.5 : 1e-3;
        const DenseMatrix b = random_matrix(n, 2, rng);
        const DenseMatrix x = solve_ridge({gram, b, lambda});

        DenseMatrix lhs = gram;
        for (std::size_t i = 0; i < n; ++i)
            lhs(i, i) += lambda;
        DenseMatrix resid = oracle::dense_matmul(lhs, x);
        add_scaled(resid, b, -1.0);
        CHECK(std::sqrt(frob_norm2(resid)) <= 1e-8 * std::sqrt(frob_norm2(b)));
    }
}

TEST_CASE("solve_ridge names the smallest pivot on singular input") {
    DenseMatrix gram(2, 2);
    gram(0, 0) = 1.0; // second row/col zero -> singular with lambda = 0
    try {
        solve_ridge({gram, DenseMatrix(2, 1), 0.0});
        FAIL("expected SingularityError");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("pivot") != std::string::npos);
    }
}

TEST_CASE("solve_ridge rejects an asymmetric gram") {
    DenseMatrix gram = DenseMatrix::identity(3);
    gram(0, 1) = 0.3;
    CHECK_THROWS_AS(solve_ridge({gram, DenseMatrix(3, 1), 0.1}), ShapeError);
}

TEST_CASE("jacobi_eigh reconstructs a random symmetric matrix") {
    Rng rng(8);
    const DenseMatrix m = random_matrix(6, 6, rng, -1.0, 1.0);
    DenseMatrix sym(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            sym(i, j) = 0.5 * (m(i, j) + m(j, i));
    const SymmetricEig eig = jacobi_eigh(sym);
    DenseMatrix vd = eig.vectors;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            vd(i, j) *= eig.values[j];
    const DenseMatrix recon = matmul_nt(vd, eig.vectors);
    CHECK(max_abs_diff(recon, sym) < 1e-12);
}

TEST_CASE("kron_normal_solve recovers R from an exact model") {
    Rng rng(9);
    const DenseMatrix a = random_matrix(6, 3, rng);
    const DenseMatrix r = random_matrix(3, 3, rng);
    const DenseMatrix t = matmul(matmul(a, r), transpose(a));
    const DenseMatrix got = kron_normal_solve(a, SparseMatrix::from_dense(t), 0.0);
    CHECK(oracle::relative_frob_error(got, r) < 1e-8);
}

TEST_CASE("kron_normal_solve matches the explicit Kronecker oracle") {
    Rng rng(10);
    const DenseMatrix a = random_matrix(4, 2, rng);
    const SparseMatrix t = random_binary_sparse(4, 0.4, rng);
    for (double lambda : {0.0, 0.5}) {
        const DenseMatrix got = kron_normal_solve(a, t, lambda);
        const DenseMatrix want =
            oracle::kron_solve_explicit(a, t.to_dense(), lambda);
        CHECK(oracle::relative_frob_error(got, want) < 1e-9);
    }
}

TEST_CASE("kron_normal_solve equals the explicit route on small instances") {
    // Property sweep over shapes and regularization weights.
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(300 + seed);
        const std::size_t n = 2 + rng.below(5);          // 2..6
        const std::size_t r = 1 + rng.below(std::min<std::size_t>(n, 3));
        const DenseMatrix a = random_matrix(n, r, rng);
        const SparseMatrix t = random_binary_sparse(n, 0.35, rng);
        const double lambda = seed % 2 == 0 ? 0.0 : 0.5;
        const DenseMatrix got = kron_normal_solve(a, t, lambda);
        const DenseMatrix want =
            oracle::kron_solve_explicit(a, t.to_dense(), lambda);
        CHECK(oracle::relative_frob_error(got, want) < 1e-9);
    }
}

TEST_CASE("kron_normal_solve returns zero for a zero slice") {
    Rng rng(11);
    const DenseMatrix a = random_matrix(5, 2, rng);
    const SparseMatrix t = SparseMatrix::from_entries(5, 5, {}, true);
    const DenseMatrix got = kron_normal_solve(a, t, 0.7);
    CHECK(frob_norm2(got) == 0.0);
}

TEST_CASE("kron_normal_solve flags rank deficiency with zero lambda") {
    DenseMatrix a(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = 2.0; // second column is a multiple of the first
    }
    Rng rng(12);
    const SparseMatrix t = random_binary_sparse(4, 0.4, rng);
    CHECK_THROWS_AS(kron_normal_solve(a, t, 0.0), SingularityError);
    CHECK_NOTHROW(kron_normal_solve(a, t, 0.5));
}

TEST_CASE("kernels are deterministic across calls") {
    Rng rng(13);
    const SparseMatrix s = random_binary_sparse(30, 0.2, rng);
    const DenseMatrix a = random_matrix(30, 4, rng);
    CHECK(bit_equal(spmm(s, a), spmm(s, a)));
    CHECK(bit_equal(kron_normal_solve(a, s, 0.3), kron_normal_solve(a, s, 0.3)));
}

TEST_CASE("dense matrix rejects non-finite values at construction") {
    std::vector<double> data{1.0, 2.0, std::nan(""), 4.0};
    CHECK_THROWS_AS(DenseMatrix::from_data(2, 2, data), ShapeError);
    std::vector<double> inf_data{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(DenseMatrix::from_data(1, 2, inf_data), ShapeError);
}

} // TEST_SUITE
