#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "crescal/class_rescal.hpp"
#include "crescal/fold_rank.hpp"
#include "crescal/graph.hpp"
#include "crescal/rescal.hpp"

namespace crescal {

struct SplitSpec {
    double train_fraction = 0.3; // in (0, 1)
    std::size_t n_runs = 10;
    std::uint64_t seed = 1;

    void validate() const;
};

// Precision-recall points at every rank 1..n plus the area under the curve,
// integrated as sum over ranks of (recall step) * precision at that rank.
struct PRCurve {
    std::vector<std::pair<double, double>> points; // (recall, precision)
    double aupr = 0.0;
};

// positives_in_rank_order[t] tells whether the entity at rank t+1 is a
// positive. Throws MetricError when no positive is present.
PRCurve pr_curve(const std::vector<bool>& positives_in_rank_order);
double aupr(const std::vector<bool>& positives_in_rank_order);

// Planted two-class multi-relational network: directed edges (self-loops
// included) drawn independently per relation with probability p_intra
// inside a class and p_inter across classes.
struct SynthSpec {
    std::size_t n_per_class = 100;
    std::size_t n_relations = 3;
    double p_intra = 0.10;
    double p_inter = 0.02;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthData {
    SparseRelationTensor tensor;
    EntityIndex entities;
    EntityIndex relations;
    LabelSet labels; // every entity labeled; first class +1, second -1
};

SynthData generate_planted(const SynthSpec& spec);

enum class Method { rescal, class_rescal };

struct RunOutcome {
    double aupr = 0.0;
    PRCurve curve;
};

struct EvalResult {
    double train_fraction = 0.0;
    std::vector<RunOutcome> runs;
    double mean_aupr = 0.0;
    double stddev_aupr = 0.0;
};

// One train fraction, split.n_runs repetitions. Per run: equal per-class
// sampling of training entities, fit on their induced tensor (labels only
// for class_rescal), fold in every test entity through its links to
// training entities, rank the test entities, and score the precision-recall
// curve with the positive class as target.
EvalResult evaluate(const SparseRelationTensor& tensor, const LabelSet& labels,
                    const SplitSpec& split, const HyperParams& params,
                    Method method);

struct SweepRow {
    std::size_t value = 0;
    double mean_aupr = 0.0;
    double stddev_aupr = 0.0;
};

std::vector<SweepRow> sweep_factors(const SparseRelationTensor& tensor,
                                    const LabelSet& labels,
                                    const SplitSpec& split,
                                    const HyperParams& params, Method method,
                                    const std::vector<std::size_t>& r_values);

// Uses the first m relation slices per requested m.
std::vector<SweepRow> sweep_relations(const SparseRelationTensor& tensor,
                                      const LabelSet& labels,
                                      const SplitSpec& split,
                                      const HyperParams& params, Method method,
                                      const std::vector<std::size_t>& m_values);

// Split internals, exposed so tests can pin a split and probe the fitting
// inputs directly.
namespace detail {

struct RunSplit {
    std::vector<std::size_t> train; // ascending dense indices
    std::vector<std::size_t> test;
};

RunSplit split_run(const LabelSet& labels, double train_fraction,
                   std::uint64_t run_seed);

struct TrainedRun {
    FactorModel model;
    LabelSet train_labels; // reindexed to the training tensor
};

TrainedRun fit_for_split(const SparseRelationTensor& tensor,
                         const LabelSet& labels, const RunSplit& split,
                         const HyperParams& params, std::uint64_t run_seed,
                         Method method);

FoldInSlices test_entity_links(const SparseRelationTensor& tensor,
                               std::size_t entity,
                               const std::vector<std::size_t>& train);

RunOutcome run_once(const SparseRelationTensor& tensor, const LabelSet& labels,
                    double train_fraction, const HyperParams& params,
                    std::uint64_t run_seed, Method method);

} // namespace detail

} // namespace crescal
