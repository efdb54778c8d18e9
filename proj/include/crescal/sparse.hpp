#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crescal/dense.hpp"

namespace crescal {

struct SparseEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double val = 0.0;
};

// Immutable CSR matrix. The transposed structure is materialized once at
// construction so that products against the transpose stay row-parallel
// with a fixed accumulation order.
class SparseMatrix {
public:
    SparseMatrix() = default;

    // Entries are sorted by (row, col). When binary, duplicate coordinates
    // collapse to a single stored 1.0; otherwise duplicates are a ShapeError.
    static SparseMatrix from_entries(std::size_t rows, std::size_t cols,
                                     std::vector<SparseEntry> entries,
                                     bool binary);

    // Keeps every element with |value| > drop_tol.
    static SparseMatrix from_dense(const DenseMatrix& m, double drop_tol = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return ci_.size(); }

    std::span<const std::size_t> row_cols(std::size_t i) const {
        return {ci_.data() + rp_[i], rp_[i + 1] - rp_[i]};
    }
    std::span<const double> row_vals(std::size_t i) const {
        return {v_.data() + rp_[i], rp_[i + 1] - rp_[i]};
    }

    // Rows of the transposed matrix (i.e. columns of this one), in
    // ascending original-row order.
    std::span<const std::size_t> t_row_cols(std::size_t i) const {
        return {tci_.data() + trp_[i], trp_[i + 1] - trp_[i]};
    }
    std::span<const double> t_row_vals(std::size_t i) const {
        return {tv_.data() + trp_[i], trp_[i + 1] - trp_[i]};
    }

    // Sum of squared stored values.
    double norm2() const;

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t p = rp_[i]; p < rp_[i + 1]; ++p)
                f(i, ci_[p], v_[p]);
    }

    DenseMatrix to_dense() const;

    bool operator==(const SparseMatrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> rp_, ci_;
    std::vector<double> v_;
    std::vector<std::size_t> trp_, tci_;
    std::vector<double> tv_;

    void build_transpose();
};

} // namespace crescal
