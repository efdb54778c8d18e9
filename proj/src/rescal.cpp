#include "crescal/rescal.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "crescal/errors.hpp"
#include "crescal/rng.hpp"

namespace crescal {

void HyperParams::validate() const {
    if (rank < 1)
        throw ConfigError("rank must be >= 1");
    if (lambda_a < 0.0 || lambda_r < 0.0 || lambda_g < 0.0)
        throw ConfigError("regularization weights must be >= 0");
    if (k_neighbors < 1)
        throw ConfigError("k_neighbors must be >= 1");
    if (!(epsilon > 0.0))
        throw ConfigError("epsilon must be > 0");
    if (max_iter < 1)
        throw ConfigError("max_iter must be >= 1");
}

FactorModel init_model(const RelationSlices& tensor, const HyperParams& params) {
    params.validate();
    if (params.rank > tensor.n_entities)
        throw ConfigError("rank " + std::to_string(params.rank) +
                          " exceeds entity count " +
                          std::to_string(tensor.n_entities));

    FactorModel model;
    model.a = DenseMatrix(tensor.n_entities, params.rank);
    Rng rng(params.seed);
    for (double& x : model.a.data())
        x = rng.uniform();

    KronLsqSolver solver(model.a, params.lambda_r);
    model.r_slices.reserve(tensor.n_relations());
    for (const auto& slice : tensor.slices)
        model.r_slices.push_back(solver.solve(slice));
    return model;
}

double objective_f(const RelationSlices& tensor, const FactorModel& model) {
    if (model.n_entities() != tensor.n_entities ||
        model.n_relations() != tensor.n_relations())
        throw ShapeError("objective_f: model does not conform to tensor");

    // ||T_k - A R_k A^T||^2 = ||T_k||^2 - 2 <T_k, A R_k A^T> + tr(R^T G R G),
    // assembled per slice from stored entries only.
    const DenseMatrix gram = matmul_tn(model.a, model.a);
    double f = 0.0;
    for (std::size_t k = 0; k < tensor.n_relations(); ++k) {
        const SparseMatrix& t = tensor.slices[k];
        const DenseMatrix& r = model.r_slices[k];
        const DenseMatrix w = matmul(model.a, r); // W = A R, so (W A^T)_ij hits entries

        double cross = 0.0;
        t.for_each([&](std::size_t i, std::size_t j, double v) {
            const double* wi = w.row(i).data();
            const double* aj = model.a.row(j).data();
            double dot = 0.0;
            for (std::size_t c = 0; c < w.cols(); ++c)
                dot += wi[c] * aj[c];
            cross += v * dot;
        });

        const DenseMatrix rg = matmul_tn(r, gram); // R^T G
        const DenseMatrix rgr = matmul(rg, r);     // R^T G R
        double model_part = 0.0;
        for (std::size_t i = 0; i < rgr.rows(); ++i)
            for (std::size_t j = 0; j < rgr.cols(); ++j)
                model_part += rgr(i, j) * gram(i, j);

        const double slice_f = t.norm2() - 2.0 * cross + model_part;
        f += std::max(slice_f, 0.0); // clamp fp cancellation at the exact-fit point
    }
    return f;
}

double objective_h(const FactorModel& model, const HyperParams& params) {
    double r_part = 0.0;
    for (const auto& r : model.r_slices)
        r_part += frob_norm2(r);
    return params.lambda_a * frob_norm2(model.a) + params.lambda_r * r_part;
}

namespace detail {

DenseMatrix a_update_gram(const FactorModel& model) {
    const std::size_t r = model.rank();
    const DenseMatrix gram = matmul_tn(model.a, model.a);
    DenseMatrix f(r, r);
    for (const auto& rk : model.r_slices) {
        const DenseMatrix rg = matmul(rk, gram);
        add_scaled(f, matmul_nt(rg, rk));      // R G R^T
        const DenseMatrix rtg = matmul_tn(rk, gram);
        add_scaled(f, matmul(rtg, rk));        // R^T G R
    }
    // Symmetrize: exact in exact arithmetic, fp products are not.
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) {
            const double s = 0.5 * (f(i, j) + f(j, i));
            f(i, j) = s;
            f(j, i) = s;
        }
    return f;
}

DenseMatrix a_update_numerator(const RelationSlices& tensor,
                               const FactorModel& model) {
    DenseMatrix e(model.n_entities(), model.rank());
    for (std::size_t k = 0; k < tensor.n_relations(); ++k) {
        const SparseMatrix& t = tensor.slices[k];
        const DenseMatrix& rk = model.r_slices[k];
        spmm_acc(t, matmul_nt(model.a, rk), e);  // T_k A R_k^T
        spmm_t_acc(t, matmul(model.a, rk), e);   // T_k^T A R_k
    }
    return e;
}

double tensor_norm2_or_one(const RelationSlices& tensor) {
    const double n2 = tensor.norm2();
    return n2 > 0.0 ? n2 : 1.0;
}

} // namespace detail

DenseMatrix update_a_unsupervised(const RelationSlices& tensor,
                                  const FactorModel& model,
                                  const HyperParams& params) {
    if (model.n_entities() != tensor.n_entities ||
        model.n_relations() != tensor.n_relations())
        throw ShapeError("update_a: model does not conform to tensor");
    const DenseMatrix e = detail::a_update_numerator(tensor, model);
    const DenseMatrix x = solve_ridge(
        {detail::a_update_gram(model), transpose(e), params.lambda_a});
    return transpose(x);
}

std::vector<DenseMatrix> update_r(const RelationSlices& tensor,
                                  const FactorModel& model,
                                  const HyperParams& params) {
    if (model.n_entities() != tensor.n_entities)
        throw ShapeError("update_r: model does not conform to tensor");
    KronLsqSolver solver(model.a, params.lambda_r);
    std::vector<DenseMatrix> out;
    out.reserve(tensor.n_relations());
    for (const auto& slice : tensor.slices)
        out.push_back(solver.solve(slice));
    return out;
}

namespace {

struct ObjectiveParts {
    double f = 0.0, g = 0.0, h = 0.0;
    double normalized(double t_norm2) const { return (f + g + h) / t_norm2; }
};

void check_finite(const ObjectiveParts& p, std::size_t iter) {
    if (!std::isfinite(p.f) || !std::isfinite(p.g) || !std::isfinite(p.h))
        throw DivergenceError("objective non-finite at iteration " +
                              std::to_string(iter));
}

} // namespace

FitResult fit_rescal(const RelationSlices& tensor, const HyperParams& params) {
    FactorModel model = init_model(tensor, params);
    const double t_norm2 = detail::tensor_norm2_or_one(tensor);

    ObjectiveParts parts{objective_f(tensor, model), 0.0,
                         objective_h(model, params)};
    check_finite(parts, 0);
    double prev = parts.normalized(t_norm2);

    FitResult out;
    out.trace.iterations.reserve(params.max_iter);
    for (std::size_t iter = 1; iter <= params.max_iter; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        model.a = update_a_unsupervised(tensor, model, params);
        model.r_slices = update_r(tensor, model, params);

        parts = {objective_f(tensor, model), 0.0, objective_h(model, params)};
        check_finite(parts, iter);
        const double obj = parts.normalized(t_norm2);
        const double wall_ms =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0)
                .count();
        out.trace.iterations.push_back({parts.f, parts.g, parts.h, obj, wall_ms});

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
