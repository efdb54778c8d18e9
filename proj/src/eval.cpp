#include "crescal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crescal/errors.hpp"
#include "crescal/rng.hpp"

namespace crescal {

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    if (n_runs < 1)
        throw ConfigError("n_runs must be >= 1");
}

PRCurve pr_curve(const std::vector<bool>& positives_in_rank_order) {
    const std::size_t n = positives_in_rank_order.size();
    std::size_t total_pos = 0;
    for (bool b : positives_in_rank_order)
        total_pos += b ? 1 : 0;
    if (total_pos == 0)
        throw MetricError("precision-recall undefined: no positives in ranking");

    PRCurve out;
    out.points.reserve(n);
    std::size_t tp = 0;
    double prev_recall = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        tp += positives_in_rank_order[t] ? 1 : 0;
        const double precision =
            static_cast<double>(tp) / static_cast<double>(t + 1);
        const double recall =
            static_cast<double>(tp) / static_cast<double>(total_pos);
        out.points.emplace_back(recall, precision);
        out.aupr += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return out;
}

double aupr(const std::vector<bool>& positives_in_rank_order) {
    return pr_curve(positives_in_rank_order).aupr;
}

void SynthSpec::validate() const {
    if (n_per_class < 1)
        throw ConfigError("n_per_class must be >= 1");
    if (n_relations < 1)
        throw ConfigError("n_relations must be >= 1");
    // Equal probabilities are allowed so unbiasedness is testable.
    if (!(p_inter >= 0.0) || !(p_intra <= 1.0) || p_inter > p_intra)
        throw ConfigError("need 0 <= p_inter <= p_intra <= 1");
}

SynthData generate_planted(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = 2 * spec.n_per_class;

    SynthData out;
    std::size_t width = 1;
    for (std::size_t v = spec.n_per_class > 0 ? spec.n_per_class - 1 : 0; v >= 10;
         v /= 10)
        ++width;
    auto id_of = [&](std::size_t i) {
        const bool pos = i < spec.n_per_class;
        std::string num = std::to_string(pos ? i : i - spec.n_per_class);
        return (pos ? "s" : "n") +
               std::string(width - std::min(width, num.size()), '0') + num;
    };
    for (std::size_t i = 0; i < n; ++i) {
        out.entities.add(id_of(i));
        out.labels.set(i, i < spec.n_per_class ? +1 : -1);
    }
    for (std::size_t k = 0; k < spec.n_relations; ++k)
        out.relations.add("r" + std::to_string(k));

    Rng rng(spec.seed);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs(
        spec.n_relations);
    for (std::size_t k = 0; k < spec.n_relations; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool i_pos = i < spec.n_per_class;
            for (std::size_t j = 0; j < n; ++j) {
                const bool same = i_pos == (j < spec.n_per_class);
                // One draw per cell keeps the stream position independent of
                // the probabilities.
                const bool edge = rng.bernoulli(same ? spec.p_intra : spec.p_inter);
                if (edge)
                    pairs[k].emplace_back(i, j);
            }
        }
    }
    out.tensor = SparseRelationTensor::from_pairs(n, pairs);
    return out;
}

namespace detail {

RunSplit split_run(const LabelSet& labels, double train_fraction,
                   std::uint64_t run_seed) {
    std::vector<std::size_t> pos, neg;
    for (const auto& [e, l] : labels.entries())
        (l > 0 ? pos : neg).push_back(e);

    const auto train_count = [&](std::size_t class_size) {
        return static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(class_size)));
    };
    const std::size_t c_pos = train_count(pos.size());
    const std::size_t c_neg = train_count(neg.size());
    if (c_pos == 0 || c_neg == 0)
        throw SplitError("split leaves a class without training entities");
    if (c_pos == pos.size() || c_neg == neg.size())
        throw SplitError("split leaves a class without test entities");

    Rng rng(mix_seed(run_seed, 0xA11CE));
    rng.shuffle(pos);
    rng.shuffle(neg);

    RunSplit out;
    out.train.assign(pos.begin(), pos.begin() + c_pos);
    out.train.insert(out.train.end(), neg.begin(), neg.begin() + c_neg);
    out.test.assign(pos.begin() + c_pos, pos.end());
    out.test.insert(out.test.end(), neg.begin() + c_neg, neg.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

TrainedRun fit_for_split(const SparseRelationTensor& tensor,
                         const LabelSet& labels, const RunSplit& split,
                         const HyperParams& params, std::uint64_t run_seed,
                         Method method) {
    const SparseRelationTensor train_tensor =
        induce_subtensor(tensor, split.train);

    TrainedRun out;
    for (std::size_t p = 0; p < split.train.size(); ++p) {
        const auto label = labels.get(split.train[p]);
        if (label)
            out.train_labels.set(p, *label);
    }

    HyperParams run_params = params;
    run_params.seed = run_seed;
    if (method == Method::rescal)
        out.model = fit_rescal(train_tensor.view(), run_params).model;
    else
        out.model =
            fit_class_rescal(train_tensor.view(), out.train_labels, run_params)
                .model;
    return out;
}

FoldInSlices test_entity_links(const SparseRelationTensor& tensor,
                               std::size_t entity,
                               const std::vector<std::size_t>& train) {
    std::vector<std::size_t> local(tensor.n_entities(), SIZE_MAX);
    for (std::size_t p = 0; p < train.size(); ++p)
        local[train[p]] = p;

    FoldInSlices links;
    links.out_links.resize(tensor.n_relations());
    links.in_links.resize(tensor.n_relations());
    for (std::size_t k = 0; k < tensor.n_relations(); ++k) {
        const SparseMatrix& slice = tensor.slice(k);
        for (std::size_t j : slice.row_cols(entity))
            if (local[j] != SIZE_MAX)
                links.out_links[k].push_back(local[j]);
        for (std::size_t i : slice.t_row_cols(entity))
            if (local[i] != SIZE_MAX)
                links.in_links[k].push_back(local[i]);
        // CSR traversal already yields ascending ids; mapping through an
        // order-preserving reindex keeps them ascending.
    }
    return links;
}

RunOutcome run_once(const SparseRelationTensor& tensor, const LabelSet& labels,
                    double train_fraction, const HyperParams& params,
                    std::uint64_t run_seed, Method method) {
    const RunSplit split = split_run(labels, train_fraction, run_seed);
    const TrainedRun trained =
        fit_for_split(tensor, labels, split, params, run_seed, method);

    FoldInSolver solver(trained.model, params.lambda_a);
    DenseMatrix test_a(split.test.size(), trained.model.rank());
    for (std::size_t p = 0; p < split.test.size(); ++p) {
        const auto row =
            solver.fold(test_entity_links(tensor, split.test[p], split.train));
        std::copy(row.begin(), row.end(), test_a.row(p).begin());
    }

    // Orientation comes from the training entities; the test ranking only
    // reuses the sign.
    const int orientation =
        score_orientation(trained.model.a, trained.train_labels);
    const RankingResult ranking = rank_with_orientation(test_a, orientation);

    std::vector<bool> positives(split.test.size());
    for (std::size_t p = 0; p < split.test.size(); ++p)
        positives[p] = *labels.get(split.test[ranking.order[p]]) > 0;

    RunOutcome out;
    out.curve = pr_curve(positives);
    out.aupr = out.curve.aupr;
    return out;
}

} // namespace detail

EvalResult evaluate(const SparseRelationTensor& tensor, const LabelSet& labels,
                    const SplitSpec& split, const HyperParams& params,
                    Method method) {
    split.validate();
    params.validate();

    EvalResult out;
    out.train_fraction = split.train_fraction;
    out.runs.resize(split.n_runs);

    // Runs are independent; each owns its seed. Results land in run order so
    // aggregation does not depend on the schedule.
    const std::size_t n_runs = split.n_runs;
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) if (n_runs > 1)
    for (std::size_t run = 0; run < n_runs; ++run) {
        try {
            out.runs[run] = detail::run_once(tensor, labels, split.train_fraction,
                                             params, split.seed + run, method);
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    double sum = 0.0;
    for (const auto& r : out.runs)
        sum += r.aupr;
    out.mean_aupr = sum / static_cast<double>(n_runs);
    double var = 0.0;
    for (const auto& r : out.runs) {
        const double d = r.aupr - out.mean_aupr;
        var += d * d;
    }
    out.stddev_aupr =
        n_runs > 1 ? std::sqrt(var / static_cast<double>(n_runs - 1)) : 0.0;
    return out;
}

std::vector<SweepRow> sweep_factors(const SparseRelationTensor& tensor,
                                    const LabelSet& labels,
                                    const SplitSpec& split,
                                    const HyperParams& params, Method method,
                                    const std::vector<std::size_t>& r_values) {
    std::vector<SweepRow> out;
    out.reserve(r_values.size());
    for (std::size_t r : r_values) {
        HyperParams p = params;
        p.rank = r;
        const EvalResult res = evaluate(tensor, labels, split, p, method);
        out.push_back({r, res.mean_aupr, res.stddev_aupr});
    }
    return out;
}

std::vector<SweepRow> sweep_relations(const SparseRelationTensor& tensor,
                                      const LabelSet& labels,
                                      const SplitSpec& split,
                                      const HyperParams& params, Method method,
                                      const std::vector<std::size_t>& m_values) {
    std::vector<SweepRow> out;
    out.reserve(m_values.size());
    for (std::size_t m : m_values) {
        if (m < 1 || m > tensor.n_relations())
            throw ConfigError("relation sweep value " + std::to_string(m) +
                              " outside 1.." +
                              std::to_string(tensor.n_relations()));
        const SparseRelationTensor sub =
            SparseRelationTensor::from_binary_slices(tensor.prefix_view(m));
        const EvalResult res = evaluate(sub, labels, split, params, method);
        out.push_back({m, res.mean_aupr, res.stddev_aupr});
    }
    return out;
}

} // namespace crescal
