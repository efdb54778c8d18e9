#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crescal {

// Row-major dense matrix of 64-bit floats.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}

    static DenseMatrix identity(std::size_t n);

    // Validating factory; rejects NaN/Inf with a ShapeError.
    static DenseMatrix from_data(std::size_t rows, std::size_t cols,
                                 std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return d_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {d_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {d_.data() + i * cols_, cols_};
    }

    std::vector<double>& data() { return d_; }
    const std::vector<double>& data() const { return d_; }

    bool all_finite() const;

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> d_;
};

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

// a += s * b
void add_scaled(DenseMatrix& a, const DenseMatrix& b, double s = 1.0);

double frob_norm2(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// True iff every element of a and b has the same bit pattern.
bool bit_equal(const DenseMatrix& a, const DenseMatrix& b);

// Serial reference kernels. Same per-element accumulation order as the
// parallel versions above; tests assert bitwise agreement.
namespace serial {
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
} // namespace serial

} // namespace crescal
