#pragma once

#include <cstddef>
#include <vector>

#include "crescal/dense.hpp"
#include "crescal/graph.hpp"
#include "crescal/linear.hpp"
#include "crescal/rescal.hpp"

namespace crescal {

// Links of one new entity toward the trained entities, one out/in pair per
// relation. Indices refer to the trained model's rows, strictly ascending;
// entries are binary by construction. Links among new entities do not exist
// in this representation.
struct FoldInSlices {
    std::vector<std::vector<std::size_t>> out_links; // new -> old, column ids
    std::vector<std::vector<std::size_t>> in_links;  // old -> new, row ids

    std::size_t n_relations() const { return out_links.size(); }
};

// Projects new entities into a trained latent space with R fixed. The
// bracket factorization and the per-relation products A R_k^T, A R_k are
// computed once at construction; fold() never touches the model again.
class FoldInSolver {
public:
    FoldInSolver(const FactorModel& model, double lambda_a);

    // Latent row (length r) of one new entity.
    std::vector<double> fold(const FoldInSlices& links) const;

    std::size_t n_entities() const { return n_; }
    std::size_t n_relations() const { return m_; }

private:
    std::size_t n_ = 0, m_ = 0, r_ = 0;
    std::vector<DenseMatrix> a_rt_; // A R_k^T per relation
    std::vector<DenseMatrix> a_r_;  // A R_k per relation
    CholeskyFactor bracket_;
};

std::vector<double> fold_in(const FactorModel& model, const FoldInSlices& links,
                            const HyperParams& params);

// Per-entity factor scores (row means of A), a sign giving the direction in
// which the positive class scores higher, and the resulting ranking order
// (oriented score descending, ties by ascending entity index).
struct RankingResult {
    std::vector<double> scores;
    int orientation = +1;
    std::vector<std::size_t> order;
};

// +1 when the mean score of positive-labeled rows is >= that of
// negative-labeled rows, -1 otherwise. Empty labels (or a missing class)
// orient +1.
int score_orientation(const DenseMatrix& a, const LabelSet& labels);

RankingResult rank_with_orientation(const DenseMatrix& a, int orientation);
RankingResult rank_entities(const DenseMatrix& a, const LabelSet& labels);

} // namespace crescal
