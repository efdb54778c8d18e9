#include "crescal/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crescal/errors.hpp"

namespace crescal {

namespace {

constexpr std::size_t kParallelRowThreshold = 64;

inline void spmm_row(std::span<const std::size_t> cols,
                     std::span<const double> vals, const DenseMatrix& x,
                     double* out, std::size_t width) {
    for (std::size_t p = 0; p < cols.size(); ++p) {
        const double v = vals[p];
        const double* xr = x.row(cols[p]).data();
        for (std::size_t j = 0; j < width; ++j)
            out[j] += v * xr[j];
    }
}

void check_spmm_shapes(std::size_t inner, const DenseMatrix& x) {
    if (inner != x.rows())
        throw ShapeError("spmm: inner dimensions differ");
}

} // namespace

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
    DenseMatrix y(s.rows(), x.cols());
    spmm_acc(s, x, y);
    return y;
}

DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& x) {
    DenseMatrix y(s.cols(), x.cols());
    spmm_t_acc(s, x, y);
    return y;
}

void spmm_acc(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& y) {
    check_spmm_shapes(s.cols(), x);
    if (y.rows() != s.rows() || y.cols() != x.cols())
        throw ShapeError("spmm: output shape mismatch");
    const std::size_t rows = s.rows(), width = x.cols();
#pragma omp parallel for schedule(static) if (rows >= kParallelRowThreshold)
    for (std::size_t i = 0; i < rows; ++i)
        spmm_row(s.row_cols(i), s.row_vals(i), x, y.row(i).data(), width);
}

void spmm_t_acc(const SparseMatrix& s, const DenseMatrix& x, DenseMatrix& y) {
    check_spmm_shapes(s.rows(), x);
    if (y.rows() != s.cols() || y.cols() != x.cols())
        throw ShapeError("spmm_t: output shape mismatch");
    const std::size_t rows = s.cols(), width = x.cols();
#pragma omp parallel for schedule(static) if (rows >= kParallelRowThreshold)
    for (std::size_t i = 0; i < rows; ++i)
        spmm_row(s.t_row_cols(i), s.t_row_vals(i), x, y.row(i).data(), width);
}

namespace serial {

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
    check_spmm_shapes(s.cols(), x);
    DenseMatrix y(s.rows(), x.cols());
    for (std::size_t i = 0; i < s.rows(); ++i)
        spmm_row(s.row_cols(i), s.row_vals(i), x, y.row(i).data(), x.cols());
    return y;
}

DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& x) {
    check_spmm_shapes(s.rows(), x);
    DenseMatrix y(s.cols(), x.cols());
    for (std::size_t i = 0; i < s.cols(); ++i)
        spmm_row(s.t_row_cols(i), s.t_row_vals(i), x, y.row(i).data(), x.cols());
    return y;
}

} // namespace serial

CholeskyFactor::CholeskyFactor(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n)
        throw ShapeError("cholesky: matrix not square");
    l_ = m;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, std::fabs(m(i, i)));
    // Pivots at or below this bound mean the matrix is numerically
    // indefinite or singular.
    const double floor =
        std::max(max_diag, 1.0e-300) * 64.0 * std::numeric_limits<double>::epsilon();

    smallest_pivot_ = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double d = l_(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= l_(j, k) * l_(j, k);
        smallest_pivot_ = std::min(smallest_pivot_, d);
        if (!(d > floor))
            throw SingularityError(
                "cholesky: matrix numerically singular, smallest pivot " +
                std::to_string(d));
        const double root = std::sqrt(d);
        l_(j, j) = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l_(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l_(i, k) * l_(j, k);
            l_(i, j) = s / root;
        }
    }
}

DenseMatrix CholeskyFactor::solve(const DenseMatrix& b) const {
    const std::size_t n = l_.rows();
    if (b.rows() != n)
        throw ShapeError("cholesky solve: rhs shape mismatch");
    DenseMatrix x = b;
    const std::size_t cols = b.cols();
    // Column solves are independent; the per-column arithmetic is identical
    // to solve_vec.
#pragma omp parallel for schedule(static) if (cols >= kParallelRowThreshold)
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k)
                s -= l_(i, k) * x(k, c);
            x(i, c) = s / l_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k)
                s -= l_(k, ii) * x(k, c);
            x(ii, c) = s / l_(ii, ii);
        }
    }
    return x;
}

std::vector<double> CholeskyFactor::solve_vec(const std::vector<double>& b) const {
    const std::size_t n = l_.rows();
    if (b.size() != n)
        throw ShapeError("cholesky solve: rhs length mismatch");
    std::vector<double> x = b;
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= l_(i, k) * x[k];
        x[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= l_(k, ii) * x[k];
        x[ii] = s / l_(ii, ii);
    }
    return x;
}

DenseMatrix solve_ridge(const RidgeSystem& sys) {
    const std::size_t n = sys.gram.rows();
    if (sys.gram.cols() != n)
        throw ShapeError("solve_ridge: gram not square");
    if (sys.rhs.rows() != n)
        throw ShapeError("solve_ridge: rhs shape mismatch");
    if (sys.lambda < 0.0)
        throw ConfigError("solve_ridge: negative regularization weight");

    double max_abs = 0.0, max_asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            max_abs = std::max(max_abs, std::fabs(sys.gram(i, j)));
            max_asym = std::max(max_asym, std::fabs(sys.gram(i, j) - sys.gram(j, i)));
        }
    if (max_asym > 1e-10 * std::max(max_abs, 1.0))
        throw ShapeError("solve_ridge: gram matrix not symmetric");

    DenseMatrix m = sys.gram;
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) += sys.lambda;
    return CholeskyFactor(m).solve(sys.rhs);
}

SymmetricEig jacobi_eigh(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n)
        throw ShapeError("jacobi_eigh: matrix not square");

    DenseMatrix a = m;
    DenseMatrix v = DenseMatrix::identity(n);

    double fro2 = frob_norm2(a);
    const double stop = fro2 * 1e-30; // off-diagonal mass threshold
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += 2.0 * a(p, q) * a(p, q);
        if (off <= stop)
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double app = a(p, p), aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEig out;
    out.vectors = std::move(v);
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = a(i, i);
    return out;
}

KronLsqSolver::KronLsqSolver(const DenseMatrix& a, double lambda)
    : n_(a.rows()), r_(a.cols()), lambda_(lambda) {
    if (lambda < 0.0)
        throw ConfigError("kron solver: negative regularization weight");
    if (r_ > n_)
        throw ShapeError("kron solver: more factors than entities");

    const DenseMatrix gram = matmul_tn(a, a);
    SymmetricEig eig = jacobi_eigh(gram);
    v_ = std::move(eig.vectors);

    // Left singular vectors via u_i = A v_i / s_i; recomputing s_i as
    // ||A v_i|| is more robust than sqrt of a near-zero eigenvalue.
    u_ = matmul(a, v_);
    s_.assign(r_, 0.0);
    double s_max = 0.0;
    for (std::size_t i = 0; i < r_; ++i) {
        double nrm2 = 0.0;
        for (std::size_t k = 0; k < n_; ++k)
            nrm2 += u_(k, i) * u_(k, i);
        s_[i] = std::sqrt(nrm2);
        s_max = std::max(s_max, s_[i]);
    }
    if (lambda_ == 0.0) {
        for (std::size_t i = 0; i < r_; ++i)
            if (!(s_[i] > 1e-12 * std::max(s_max, 1e-300)))
                throw SingularityError(
                    "kron solver: rank-deficient factor matrix with zero "
                    "regularization, singular value " +
                    std::to_string(s_[i]));
    }
    for (std::size_t i = 0; i < r_; ++i) {
        if (s_[i] > 0.0) {
            const double inv = 1.0 / s_[i];
            for (std::size_t k = 0; k < n_; ++k)
                u_(k, i) *= inv;
        } else {
            // Null directions carry zero weight in the diagonal filter.
            for (std::size_t k = 0; k < n_; ++k)
                u_(k, i) = 0.0;
        }
    }
}

DenseMatrix KronLsqSolver::solve(const SparseMatrix& t_slice) const {
    if (t_slice.rows() != n_ || t_slice.cols() != n_)
        throw ShapeError("kron solver: slice shape mismatch");

    const DenseMatrix tu = spmm(t_slice, u_);
    DenseMatrix core = matmul_tn(u_, tu); // U^T T U
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < r_; ++j) {
            const double sij = s_[i] * s_[j];
            const double w = lambda_ == 0.0 ? 1.0 / sij : sij / (sij * sij + lambda_);
            core(i, j) *= w;
        }
    return matmul(matmul(v_, core), transpose(v_));
}

DenseMatrix kron_normal_solve(const DenseMatrix& a, const SparseMatrix& t_slice,
                              double lambda) {
    return KronLsqSolver(a, lambda).solve(t_slice);
}

} // namespace crescal
