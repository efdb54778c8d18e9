#include "crescal/dense.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "crescal/errors.hpp"

namespace crescal {

namespace {

// Parallelizing tiny products costs more than it saves.
constexpr std::size_t kParallelRowThreshold = 64;

inline void matmul_row(const DenseMatrix& a, const DenseMatrix& b,
                       DenseMatrix& c, std::size_t i) {
    const std::size_t k_dim = a.cols(), n = b.cols();
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < k_dim; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0)
            continue;
        const double* bk = b.row(k).data();
        for (std::size_t j = 0; j < n; ++j)
            ci[j] += aik * bk[j];
    }
}

inline void matmul_nt_row(const DenseMatrix& a, const DenseMatrix& b,
                          DenseMatrix& c, std::size_t i) {
    const std::size_t k_dim = a.cols(), n = b.rows();
    const double* ai = a.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
        const double* bj = b.row(j).data();
        double acc = 0.0;
        for (std::size_t k = 0; k < k_dim; ++k)
            acc += ai[k] * bj[k];
        c(i, j) = acc;
    }
}

// Row i of A^T B, accumulated over the rows of A in index order so the
// result does not depend on the schedule.
inline void matmul_tn_row(const DenseMatrix& a, const DenseMatrix& b,
                          DenseMatrix& c, std::size_t i) {
    const std::size_t rows = a.rows(), n = b.cols();
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < rows; ++k) {
        const double aki = a(k, i);
        if (aki == 0.0)
            continue;
        const double* bk = b.row(k).data();
        for (std::size_t j = 0; j < n; ++j)
            ci[j] += aki * bk[j];
    }
}

} // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_data(std::size_t rows, std::size_t cols,
                                   std::vector<double> data) {
    if (data.size() != rows * cols)
        throw ShapeError("dense matrix: data length does not match dimensions");
    DenseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.d_ = std::move(data);
    if (!m.all_finite())
        throw ShapeError("dense matrix: non-finite value rejected");
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double x : d_)
        if (!std::isfinite(x))
            return false;
    return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t rows = a.rows();
#pragma omp parallel for schedule(static) if (rows >= kParallelRowThreshold)
    for (std::size_t i = 0; i < rows; ++i)
        matmul_row(a, b, c, i);
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: inner dimensions differ");
    DenseMatrix c(a.rows(), b.rows());
    const std::size_t rows = a.rows();
#pragma omp parallel for schedule(static) if (rows >= kParallelRowThreshold)
    for (std::size_t i = 0; i < rows; ++i)
        matmul_nt_row(a, b, c, i);
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: inner dimensions differ");
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t out_rows = a.cols();
#pragma omp parallel for schedule(static) if (out_rows >= kParallelRowThreshold)
    for (std::size_t i = 0; i < out_rows; ++i)
        matmul_tn_row(a, b, c, i);
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

void add_scaled(DenseMatrix& a, const DenseMatrix& b, double s) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("add_scaled: shape mismatch");
    double* ad = a.data().data();
    const double* bd = b.data().data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        ad[i] += s * bd[i];
}

double frob_norm2(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.data())
        s += x * x;
    return s;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

bool bit_equal(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return false;
    return a.size() == 0 ||
           std::memcmp(a.data().data(), b.data().data(),
                       a.size() * sizeof(double)) == 0;
}

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        matmul_row(a, b, c, i);
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: inner dimensions differ");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        matmul_nt_row(a, b, c, i);
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: inner dimensions differ");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        matmul_tn_row(a, b, c, i);
    return c;
}

} // namespace serial

} // namespace crescal
