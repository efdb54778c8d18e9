#include "crescal/class_rescal.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "crescal/errors.hpp"

namespace crescal {

DenseMatrix update_a_supervised(const RelationSlices& tensor,
                                const FactorModel& model,
                                const ClassifierOutput& classifier,
                                const HyperParams& params) {
    if (model.n_entities() != tensor.n_entities ||
        model.n_relations() != tensor.n_relations())
        throw ShapeError("update_a: model does not conform to tensor");
    if (classifier.residual.size() != model.n_entities())
        throw ShapeError("update_a: classifier output length mismatch");

    DenseMatrix e = detail::a_update_numerator(tensor, model);
    if (params.lambda_g != 0.0) {
        // Classification correction: rows of misclassified labeled entities
        // move uniformly along every factor column.
        const double scale = 2.0 * params.lambda_g;
        for (std::size_t i = 0; i < model.n_entities(); ++i) {
            const double rho = classifier.residual[i];
            if (rho == 0.0)
                continue;
            double* row = e.row(i).data();
            const double c = scale * rho;
            for (std::size_t j = 0; j < model.rank(); ++j)
                row[j] += c;
        }
    }
    const DenseMatrix x = solve_ridge(
        {detail::a_update_gram(model), transpose(e), params.lambda_a});
    return transpose(x);
}

DenseMatrix update_a_supervised(const RelationSlices& tensor,
                                const FactorModel& model,
                                const LabelSet& labels,
                                const HyperParams& params) {
    if (params.lambda_g == 0.0)
        return update_a_unsupervised(tensor, model, params);
    return update_a_supervised(
        tensor, model, knn_predict(model.a, labels, params.k_neighbors), params);
}

FitResult fit_class_rescal(const RelationSlices& tensor, const LabelSet& labels,
                           const HyperParams& params) {
    // lambda_g == 0 removes every classifier effect; run the exact
    // unsupervised path so the reduction is bit-identical.
    if (params.lambda_g == 0.0)
        return fit_rescal(tensor, params);

    if (labels.empty())
        throw ConfigError("fit_class_rescal: label set is empty");

    FactorModel model = init_model(tensor, params);
    const double t_norm2 = detail::tensor_norm2_or_one(tensor);

    ClassifierOutput cls = knn_predict(model.a, labels, params.k_neighbors);
    double f = objective_f(tensor, model);
    double g = objective_g(cls, params);
    double h = objective_h(model, params);
    if (!std::isfinite(f + g + h))
        throw DivergenceError("objective non-finite at iteration 0");
    double prev = (f + g + h) / t_norm2;

    FitResult out;
    out.trace.iterations.reserve(params.max_iter);
    for (std::size_t iter = 1; iter <= params.max_iter; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        // Algorithm order: classify the current A, update A with that
        // residual held fixed, then refresh every R_k.
        model.a = update_a_supervised(tensor, model, cls, params);
        model.r_slices = update_r(tensor, model, params);

        cls = knn_predict(model.a, labels, params.k_neighbors);
        f = objective_f(tensor, model);
        g = objective_g(cls, params);
        h = objective_h(model, params);
        if (!std::isfinite(f + g + h))
            throw DivergenceError("objective non-finite at iteration " +
                                  std::to_string(iter));
        const double obj = (f + g + h) / t_norm2;
        const double wall_ms =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0)
                .count();
        out.trace.iterations.push_back({f, g, h, obj, wall_ms});

        if (std::fabs(obj - prev) / std::max(prev, 1e-12) < params.epsilon) {
            out.trace.converged = true;
            break;
        }
        prev = obj;
    }
    out.model = std::move(model);
    return out;
}

} // namespace crescal
