#include "crescal/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "crescal/errors.hpp"

namespace crescal {

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols,
                                        std::vector<SparseEntry> entries,
                                        bool binary) {
    for (const auto& e : entries) {
        if (e.row >= rows || e.col >= cols)
            throw ShapeError("sparse matrix: entry index out of range");
        if (!std::isfinite(e.val))
            throw ShapeError("sparse matrix: non-finite value rejected");
    }
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                  return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    if (binary) {
        for (auto& e : entries)
            e.val = 1.0;
        entries.erase(std::unique(entries.begin(), entries.end(),
                                  [](const SparseEntry& a, const SparseEntry& b) {
                                      return a.row == b.row && a.col == b.col;
                                  }),
                      entries.end());
    } else {
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i].row == entries[i - 1].row &&
                entries[i].col == entries[i - 1].col)
                throw ShapeError("sparse matrix: duplicate coordinate");
    }

    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.rp_.assign(rows + 1, 0);
    m.ci_.reserve(entries.size());
    m.v_.reserve(entries.size());
    for (const auto& e : entries) {
        ++m.rp_[e.row + 1];
        m.ci_.push_back(e.col);
        m.v_.push_back(e.val);
    }
    for (std::size_t i = 0; i < rows; ++i)
        m.rp_[i + 1] += m.rp_[i];
    m.build_transpose();
    return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& d, double drop_tol) {
    std::vector<SparseEntry> entries;
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (std::fabs(d(i, j)) > drop_tol)
                entries.push_back({i, j, d(i, j)});
    return from_entries(d.rows(), d.cols(), std::move(entries), false);
}

void SparseMatrix::build_transpose() {
    trp_.assign(cols_ + 1, 0);
    tci_.resize(ci_.size());
    tv_.resize(v_.size());
    for (std::size_t c : ci_)
        ++trp_[c + 1];
    for (std::size_t j = 0; j < cols_; ++j)
        trp_[j + 1] += trp_[j];
    std::vector<std::size_t> cursor(trp_.begin(), trp_.end() - 1);
    // Row-major traversal fills each transpose row in ascending original-row
    // order, so both structures iterate entries deterministically.
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = rp_[i]; p < rp_[i + 1]; ++p) {
            const std::size_t j = ci_[p];
            tci_[cursor[j]] = i;
            tv_[cursor[j]] = v_[p];
            ++cursor[j];
        }
    }
}

double SparseMatrix::norm2() const {
    double s = 0.0;
    for (double x : v_)
        s += x * x;
    return s;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for_each([&](std::size_t i, std::size_t j, double v) { d(i, j) = v; });
    return d;
}

} // namespace crescal
