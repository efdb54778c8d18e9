#pragma once

#include "crescal/classifier.hpp"
#include "crescal/graph.hpp"
#include "crescal/rescal.hpp"

namespace crescal {

// Supervised A-update: the unsupervised numerator plus the classification
// correction 2*lambda_g*(Y - y(A)) broadcast across all factor columns.
// y(A) is taken from `classifier`, computed on the A being replaced.
DenseMatrix update_a_supervised(const RelationSlices& tensor,
                                const FactorModel& model,
                                const ClassifierOutput& classifier,
                                const HyperParams& params);

// Convenience overload that classifies the model's current A first.
DenseMatrix update_a_supervised(const RelationSlices& tensor,
                                const FactorModel& model,
                                const LabelSet& labels,
                                const HyperParams& params);

// Semi-supervised alternating least squares: per iteration, classify the
// current A, update A with the correction term, then update every R_k.
// Convergence is the relative change of (f + g + h) / ||T||^2.
// With lambda_g == 0 the classifier is skipped and the result is
// bit-identical to fit_rescal.
FitResult fit_class_rescal(const RelationSlices& tensor, const LabelSet& labels,
                           const HyperParams& params);

} // namespace crescal
