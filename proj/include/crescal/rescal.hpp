#pragma once

#include <cstdint>
#include <vector>

#include "crescal/dense.hpp"
#include "crescal/graph.hpp"
#include "crescal/linear.hpp"

namespace crescal {

struct HyperParams {
    std::size_t rank = 5;
    double lambda_a = 0.5;
    double lambda_r = 0.5;
    double lambda_g = 0.1;
    std::size_t k_neighbors = 5;
    double epsilon = 1e-4;
    std::size_t max_iter = 100;
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

// Bilinear factor model: slice k of the tensor is approximated by
// A * R_k * A^T with one shared entity factor matrix A (N x r) and one
// core matrix R_k (r x r, possibly asymmetric) per relation.
struct FactorModel {
    DenseMatrix a;
    std::vector<DenseMatrix> r_slices;

    std::size_t n_entities() const { return a.rows(); }
    std::size_t rank() const { return a.cols(); }
    std::size_t n_relations() const { return r_slices.size(); }
};

struct IterationRecord {
    double f = 0.0;         // squared reconstruction error
    double g = 0.0;         // classifier error term (0 when unsupervised)
    double h = 0.0;         // regularization term
    double objective = 0.0; // (f + g + h) / ||T||^2
    double wall_ms = 0.0;
};

struct FitTrace {
    std::vector<IterationRecord> iterations;
    bool converged = false;

    std::size_t iterations_used() const { return iterations.size(); }
};

// A filled with seeded uniform values in [0,1); each R_k from one ridge
// solve against that A.
FactorModel init_model(const RelationSlices& tensor, const HyperParams& params);

double objective_f(const RelationSlices& tensor, const FactorModel& model);
double objective_h(const FactorModel& model, const HyperParams& params);

DenseMatrix update_a_unsupervised(const RelationSlices& tensor,
                                  const FactorModel& model,
                                  const HyperParams& params);

std::vector<DenseMatrix> update_r(const RelationSlices& tensor,
                                  const FactorModel& model,
                                  const HyperParams& params);

struct FitResult {
    FactorModel model;
    FitTrace trace;
};

// Alternating least squares on f + h: A-update then R-update per iteration,
// stopping when the relative change of (f + h) / ||T||^2 drops below
// params.epsilon or max_iter is reached.
FitResult fit_rescal(const RelationSlices& tensor, const HyperParams& params);

// Internals shared with the supervised variant.
namespace detail {

// Sum_k R_k G R_k^T + R_k^T G R_k with G = A^T A, symmetrized.
DenseMatrix a_update_gram(const FactorModel& model);

// Sum_k T_k A R_k^T + T_k^T A R_k.
DenseMatrix a_update_numerator(const RelationSlices& tensor,
                               const FactorModel& model);

double tensor_norm2_or_one(const RelationSlices& tensor);

} // namespace detail

} // namespace crescal
