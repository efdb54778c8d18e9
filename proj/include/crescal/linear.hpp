#pragma once

#include <cstddef>
#include <vector>

#include "crescal/dense.hpp"
#include "crescal/sparse.hpp"

namespace crescal {

// Y = S * X. Cost proportional to nnz(S) * X.cols().
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x);
// Y = S^T * X, computed over the pre-built transpose structure.
DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& x);

// Accumulating variants: y += S * x and y += S^T * x.
void spmm_acc(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& y);
void spmm_t_acc(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& y);

namespace serial {
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x);
DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& x);
} // namespace serial

// Symmetric ridge system (G + lambda*I) X = B.
struct RidgeSystem {
    DenseMatrix gram; // symmetric within 1e-10 relative tolerance
    DenseMatrix rhs;  // gram.rows() x k
    double lambda = 0.0;
};

// Cholesky factor of an SPD matrix; throws SingularityError (naming the
// smallest pivot) when a pivot falls below the positivity threshold.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix& m);

    // Solves L L^T X = B for all columns of B.
    DenseMatrix solve(const DenseMatrix& b) const;
    std::vector<double> solve_vec(const std::vector<double>& b) const;

    double smallest_pivot() const { return smallest_pivot_; }

private:
    DenseMatrix l_;
    double smallest_pivot_ = 0.0;
};

// Solves (gram + lambda*I) X = rhs via Cholesky.
DenseMatrix solve_ridge(const RidgeSystem& sys);

// Cyclic Jacobi eigendecomposition of a symmetric matrix: m = V diag(w) V^T.
struct SymmetricEig {
    DenseMatrix vectors; // columns are eigenvectors
    std::vector<double> values;
};
SymmetricEig jacobi_eigh(const DenseMatrix& m);

// Ridge least squares against the Kronecker square of a factor matrix:
// finds the r x r matrix R minimizing ||vec(T) - (A (x) A) vec(R)||^2
// + lambda ||R||^2 without materializing the N^2 x r^2 Kronecker matrix.
// Uses the identity R = V (D o (U^T T U)) V^T with A = U S V^T and
// D_ij = s_i s_j / ((s_i s_j)^2 + lambda).
//
// The decomposition of A is computed once at construction; solve() is then
// O(nnz(T) r + N r^2) per slice.
class KronLsqSolver {
public:
    KronLsqSolver(const DenseMatrix& a, double lambda);

    DenseMatrix solve(const SparseMatrix& t_slice) const;

private:
    std::size_t n_ = 0, r_ = 0;
    double lambda_ = 0.0;
    DenseMatrix u_;               // N x r left singular vectors (0 where s == 0)
    DenseMatrix v_;               // r x r right singular vectors
    std::vector<double> s_;       // singular values >= 0
};

DenseMatrix kron_normal_solve(const DenseMatrix& a, const SparseMatrix& t_slice,
                              double lambda);

} // namespace crescal
