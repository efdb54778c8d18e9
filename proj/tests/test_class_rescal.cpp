#include <doctest.h>

#include <cmath>

#include "crescal/class_rescal.hpp"
#include "crescal/errors.hpp"
#include "crescal/eval.hpp"
#include "crescal/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace crescal;
using testsup::binary_slices;
using testsup::random_matrix;

namespace {

struct PlantedInstance {
    RelationSlices tensor;
    LabelSet labels;     // every entity
    std::size_t n_per_class;
};

PlantedInstance planted(std::size_t n_per_class, std::size_t m, double p_in,
                        double p_out, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_per_class = n_per_class;
    spec.n_relations = m;
    spec.p_intra = p_in;
    spec.p_inter = p_out;
    spec.seed = seed;
    SynthData data = generate_planted(spec);
    PlantedInstance out;
    out.tensor = data.tensor.view();
    out.labels = data.labels;
    out.n_per_class = n_per_class;
    return out;
}

// Mean pairwise row distance within / across the two planted classes.
std::pair<double, double> class_distances(const DenseMatrix& a,
                                          std::size_t n_per_class) {
    double intra = 0.0, inter = 0.0;
    std::size_t n_intra = 0, n_inter = 0;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) {
                const double d = a(i, c) - a(j, c);
                d2 += d * d;
            }
            const bool same = (i < n_per_class) == (j < n_per_class);
            if (same) {
                intra += std::sqrt(d2);
                ++n_intra;
            } else {
                inter += std::sqrt(d2);
                ++n_inter;
            }
        }
    return {intra / static_cast<double>(n_intra),
            inter / static_cast<double>(n_inter)};
}

} // namespace

TEST_SUITE("class_rescal") {

TEST_CASE("zero residual makes supervised and unsupervised updates identical") {
    Rng rng(1);
    const RelationSlices t = binary_slices(8, 2, 0.3, rng);
    FactorModel model;
    model.a = random_matrix(8, 3, rng);
    model.r_slices = {random_matrix(3, 3, rng), random_matrix(3, 3, rng)};
    HyperParams p;
    p.rank = 3;

    ClassifierOutput perfect;
    perfect.predictions.assign(8, 1);
    perfect.residual.assign(8, 0.0);
    const DenseMatrix sup = update_a_supervised(t, model, perfect, p);
    const DenseMatrix unsup = update_a_unsupervised(t, model, p);
    CHECK(bit_equal(sup, unsup));
}

TEST_CASE("lambda_g of zero disables the correction regardless of labels") {
    Rng rng(2);
    const RelationSlices t = binary_slices(8, 1, 0.3, rng);
    FactorModel model;
    model.a = random_matrix(8, 2, rng);
    model.r_slices = {random_matrix(2, 2, rng)};
    HyperParams p;
    p.rank = 2;
    p.lambda_g = 0.0;

    ClassifierOutput wrong;
    wrong.predictions.assign(8, -1);
    wrong.residual.assign(8, 2.0);
    const DenseMatrix sup = update_a_supervised(t, model, wrong, p);
    const DenseMatrix unsup = update_a_unsupervised(t, model, p);
    CHECK(bit_equal(sup, unsup));
}

TEST_CASE("supervised update matches the dense oracle with a misclassification") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        Rng rng(800 + seed);
        const std::size_t n = 5, r = 2, m = 2;
        const RelationSlices t = binary_slices(n, m, 0.35, rng);
        FactorModel model;
        model.a = random_matrix(n, r, rng);
        for (std::size_t k = 0; k < m; ++k)
            model.r_slices.push_back(random_matrix(r, r, rng));
        HyperParams p;
        p.rank = r;
        p.lambda_a = 0.5;
        p.lambda_g = 0.1;

        ClassifierOutput cls;
        cls.predictions.assign(n, 1);
        cls.residual.assign(n, 0.0);
        cls.residual[1] = -2.0; // one misclassified labeled entity
        cls.residual[3] = 2.0;  // and one the other way

        DenseMatrix correction(n, r);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < r; ++c)
                correction(i, c) = 2.0 * p.lambda_g * cls.residual[i];

        std::vector<DenseMatrix> dense_slices;
        for (const auto& s : t.slices)
            dense_slices.push_back(s.to_dense());
        const DenseMatrix want = oracle::update_a_explicit(
            dense_slices, model.a, model.r_slices, p.lambda_a, correction);
        const DenseMatrix got = update_a_supervised(t, model, cls, p);
        CHECK(oracle::relative_frob_error(got, want) < 1e-9);
    }
}

TEST_CASE("correction touches only misclassified labeled rows") {
    Rng rng(3);
    const RelationSlices t = binary_slices(6, 1, 0.4, rng);
    FactorModel model;
    model.a = random_matrix(6, 2, rng);
    model.r_slices = {random_matrix(2, 2, rng)};
    HyperParams p;
    p.rank = 2;

    // The numerator difference between supervised and unsupervised is the
    // correction; verify its support directly.
    ClassifierOutput cls;
    cls.predictions.assign(6, 1);
    cls.residual.assign(6, 0.0);
    cls.residual[4] = 2.0;

    const DenseMatrix e_plain = detail::a_update_numerator(t, model);
    DenseMatrix e_corrected = e_plain;
    for (std::size_t c = 0; c < 2; ++c)
        e_corrected(4, c) += 2.0 * p.lambda_g * cls.residual[4];

    // Same bracket on both sides, so equality of solutions follows from
    // equality of numerators; check the numerator support instead.
    DenseMatrix diff = e_corrected;
    add_scaled(diff, e_plain, -1.0);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            if (i == 4)
                CHECK(diff(i, c) != 0.0);
            else
                CHECK(diff(i, c) == 0.0);
        }
}

TEST_CASE("fit_class_rescal with lambda_g = 0 reduces to fit_rescal") {
    const PlantedInstance inst = planted(12, 2, 0.25, 0.05, 31);
    HyperParams p;
    p.rank = 3;
    p.lambda_g = 0.0;
    p.max_iter = 10;
    p.seed = 5;
    const FitResult supervised = fit_class_rescal(inst.tensor, inst.labels, p);
    const FitResult plain = fit_rescal(inst.tensor, p);
    CHECK(bit_equal(supervised.model.a, plain.model.a));
    REQUIRE(supervised.model.r_slices.size() == plain.model.r_slices.size());
    for (std::size_t k = 0; k < plain.model.r_slices.size(); ++k)
        CHECK(bit_equal(supervised.model.r_slices[k], plain.model.r_slices[k]));
    REQUIRE(supervised.trace.iterations_used() == plain.trace.iterations_used());
}

TEST_CASE("fit_class_rescal rejects an empty label set") {
    Rng rng(4);
    const RelationSlices t = binary_slices(8, 1, 0.3, rng);
    HyperParams p;
    p.rank = 2;
    CHECK_THROWS_AS(fit_class_rescal(t, LabelSet{}, p), ConfigError);
}

TEST_CASE("labels pull same-class rows together on planted data") {
    const PlantedInstance inst = planted(20, 2, 0.25, 0.04, 77);

    // 30% of each class labeled.
    LabelSet partial;
    for (std::size_t i = 0; i < 6; ++i) {
        partial.set(i, +1);
        partial.set(20 + i, -1);
    }
    HyperParams p;
    p.rank = 3;
    p.seed = 9;
    p.max_iter = 60;
    const FitResult res = fit_class_rescal(inst.tensor, partial, p);
    const auto [intra, inter] = class_distances(res.model.a, 20);
    CHECK(intra < inter);
}

TEST_CASE("class cohesion: supervision tightens intra-class distances") {
    // Averaged over seeds; supervision never loosens the planted classes.
    double intra_sup_sum = 0.0, intra_plain_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const PlantedInstance inst = planted(15, 2, 0.25, 0.05, 1000 + seed);
        HyperParams p;
        p.rank = 3;
        p.seed = seed;
        p.max_iter = 40;
        const FitResult sup = fit_class_rescal(inst.tensor, inst.labels, p);
        const FitResult plain = fit_rescal(inst.tensor, p);
        intra_sup_sum += class_distances(sup.model.a, 15).first;
        intra_plain_sum += class_distances(plain.model.a, 15).first;
    }
    CHECK(intra_sup_sum / 10.0 <= intra_plain_sum / 10.0);
}

TEST_CASE("trace records the objective of the returned model") {
    const PlantedInstance inst = planted(12, 2, 0.3, 0.05, 44);
    HyperParams p;
    p.rank = 2;
    p.seed = 8;
    p.max_iter = 6;
    p.epsilon = 1e-14; // run all iterations
    const FitResult res = fit_class_rescal(inst.tensor, inst.labels, p);
    REQUIRE_FALSE(res.trace.iterations.empty());
    const auto& last = res.trace.iterations.back();

    const double f = objective_f(inst.tensor, res.model);
    const auto cls = knn_predict(res.model.a, inst.labels, p.k_neighbors);
    const double g = objective_g(cls, p);
    const double h = objective_h(res.model, p);
    CHECK(last.f == f);
    CHECK(last.g == g);
    CHECK(last.h == h);
    CHECK(last.objective == (f + g + h) / inst.tensor.norm2());
}

TEST_CASE("fit_class_rescal is deterministic") {
    const PlantedInstance inst = planted(10, 2, 0.3, 0.05, 55);
    HyperParams p;
    p.rank = 2;
    p.seed = 3;
    p.max_iter = 15;
    const FitResult r1 = fit_class_rescal(inst.tensor, inst.labels, p);
    const FitResult r2 = fit_class_rescal(inst.tensor, inst.labels, p);
    CHECK(bit_equal(r1.model.a, r2.model.a));
    REQUIRE(r1.trace.iterations_used() == r2.trace.iterations_used());
    for (std::size_t i = 0; i < r1.trace.iterations_used(); ++i) {
        CHECK(r1.trace.iterations[i].f == r2.trace.iterations[i].f);
        CHECK(r1.trace.iterations[i].g == r2.trace.iterations[i].g);
    }
}

} // TEST_SUITE
