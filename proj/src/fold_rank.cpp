#include "crescal/fold_rank.hpp"

#include <algorithm>
#include <numeric>

#include "crescal/errors.hpp"

namespace crescal {

namespace {

void check_links(const std::vector<std::vector<std::size_t>>& links,
                 std::size_t n) {
    for (const auto& ids : links) {
        for (std::size_t p = 0; p < ids.size(); ++p) {
            if (ids[p] >= n)
                throw ShapeError("fold-in: link index outside trained entities");
            if (p > 0 && ids[p] <= ids[p - 1])
                throw ShapeError("fold-in: link indices must be strictly ascending");
        }
    }
}

} // namespace

FoldInSolver::FoldInSolver(const FactorModel& model, double lambda_a)
    : n_(model.n_entities()), m_(model.n_relations()), r_(model.rank()),
      bracket_([&] {
          DenseMatrix f = detail::a_update_gram(model);
          for (std::size_t i = 0; i < f.rows(); ++i)
              f(i, i) += lambda_a;
          return CholeskyFactor(f);
      }()) {
    a_rt_.reserve(m_);
    a_r_.reserve(m_);
    for (const auto& rk : model.r_slices) {
        a_rt_.push_back(matmul_nt(model.a, rk));
        a_r_.push_back(matmul(model.a, rk));
    }
}

std::vector<double> FoldInSolver::fold(const FoldInSlices& links) const {
    if (links.out_links.size() != m_ || links.in_links.size() != m_)
        throw ShapeError("fold-in: relation count mismatch");
    check_links(links.out_links, n_);
    check_links(links.in_links, n_);

    // Row of the A-update numerator restricted to the new entity:
    // sum_k T_k(new) A R_k^T + T_k(new)^T A R_k.
    std::vector<double> num(r_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
        for (std::size_t j : links.out_links[k]) {
            const double* p = a_rt_[k].row(j).data();
            for (std::size_t c = 0; c < r_; ++c)
                num[c] += p[c];
        }
        for (std::size_t i : links.in_links[k]) {
            const double* p = a_r_[k].row(i).data();
            for (std::size_t c = 0; c < r_; ++c)
                num[c] += p[c];
        }
    }
    return bracket_.solve_vec(num);
}

std::vector<double> fold_in(const FactorModel& model, const FoldInSlices& links,
                            const HyperParams& params) {
    return FoldInSolver(model, params.lambda_a).fold(links);
}

int score_orientation(const DenseMatrix& a, const LabelSet& labels) {
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const auto& [entity, label] : labels.entries()) {
        if (entity >= a.rows())
            throw ShapeError("orientation: labeled index outside matrix");
        double mean = 0.0;
        for (double x : a.row(entity))
            mean += x;
        mean /= static_cast<double>(a.cols());
        if (label > 0) {
            pos_sum += mean;
            ++pos_n;
        } else {
            neg_sum += mean;
            ++neg_n;
        }
    }
    if (pos_n == 0 || neg_n == 0)
        return +1;
    return pos_sum / static_cast<double>(pos_n) >=
                   neg_sum / static_cast<double>(neg_n)
               ? +1
               : -1;
}

RankingResult rank_with_orientation(const DenseMatrix& a, int orientation) {
    RankingResult out;
    out.orientation = orientation;
    out.scores.resize(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double x : a.row(i))
            s += x;
        out.scores[i] = s / static_cast<double>(a.cols());
    }
    out.order.resize(a.rows());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    const double sign = static_cast<double>(orientation);
    std::sort(out.order.begin(), out.order.end(),
              [&](std::size_t x, std::size_t y) {
                  const double sx = sign * out.scores[x];
                  const double sy = sign * out.scores[y];
                  return sx != sy ? sx > sy : x < y;
              });
    return out;
}

RankingResult rank_entities(const DenseMatrix& a, const LabelSet& labels) {
    return rank_with_orientation(a, score_orientation(a, labels));
}

} // namespace crescal
