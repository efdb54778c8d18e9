#pragma once

#include <cstddef>
#include <vector>

#include "crescal/dense.hpp"
#include "crescal/graph.hpp"
#include "crescal/rescal.hpp"

namespace crescal {

// Leave-one-out k-NN vote over the labeled rows of a factor matrix.
// predictions[i] is 0 for unlabeled entities; residual = Y - y(A) on
// labeled entities (values in {-2, 0, +2}) and 0 elsewhere.
struct ClassifierOutput {
    std::vector<int> predictions;
    std::vector<double> residual;

    bool all_correct() const;
};

enum class KnnBackend {
    automatic, // exhaustive up to 50,000 labeled rows, kd-tree above
    exhaustive,
    kdtree,
};

// For each labeled entity, the k labeled rows nearest in Euclidean distance
// (self excluded; distance ties resolved toward the smaller index) vote on
// its label; a tied vote falls back to the single nearest neighbor. Requires
// at least k_neighbors + 1 labeled entities.
ClassifierOutput knn_predict(const DenseMatrix& a, const LabelSet& labels,
                             std::size_t k_neighbors,
                             KnnBackend backend = KnnBackend::automatic);

// lambda_g * sum of squared residuals.
double objective_g(const ClassifierOutput& out, const HyperParams& params);

namespace serial {
ClassifierOutput knn_predict(const DenseMatrix& a, const LabelSet& labels,
                             std::size_t k_neighbors);
} // namespace serial

} // namespace crescal
