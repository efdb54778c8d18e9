#include <doctest.h>

#include <cmath>
#include <cstring>

#include "crescal/errors.hpp"
#include "crescal/fold_rank.hpp"
#include "crescal/rescal.hpp"
#include "crescal/rng.hpp"
#include "test_support.hpp"

using namespace crescal;
using testsup::binary_slices;
using testsup::random_matrix;

namespace {

FactorModel fitted_toy_model(const RelationSlices& t, std::size_t rank,
                             std::uint64_t seed) {
    HyperParams p;
    p.rank = rank;
    p.seed = seed;
    p.max_iter = 25;
    return fit_rescal(t, p).model;
}

FoldInSlices links_of_entity(const RelationSlices& t, std::size_t entity) {
    FoldInSlices links;
    links.out_links.resize(t.n_relations());
    links.in_links.resize(t.n_relations());
    for (std::size_t k = 0; k < t.n_relations(); ++k) {
        const auto cols = t.slices[k].row_cols(entity);
        links.out_links[k].assign(cols.begin(), cols.end());
        const auto rows = t.slices[k].t_row_cols(entity);
        links.in_links[k].assign(rows.begin(), rows.end());
    }
    return links;
}

} // namespace

TEST_SUITE("fold_rank") {

TEST_CASE("an entity with no interactions folds to the zero row") {
    Rng rng(1);
    const RelationSlices t = binary_slices(10, 2, 0.3, rng);
    const FactorModel model = fitted_toy_model(t, 3, 4);
    FoldInSlices links;
    links.out_links.resize(2);
    links.in_links.resize(2);
    HyperParams p;
    p.rank = 3;
    const auto row = fold_in(model, links, p);
    for (double x : row)
        CHECK(x == 0.0);
}

TEST_CASE("refolding a training entity reproduces its update row") {
    Rng rng(2);
    const RelationSlices t = binary_slices(12, 3, 0.25, rng);
    const FactorModel model = fitted_toy_model(t, 3, 9);
    HyperParams p;
    p.rank = 3;

    const DenseMatrix refreshed = update_a_unsupervised(t, model, p);
    for (std::size_t entity : {std::size_t{0}, std::size_t{5}, std::size_t{11}}) {
        const auto row = fold_in(model, links_of_entity(t, entity), p);
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(std::fabs(row[c] - refreshed(entity, c)) < 1e-10);
    }
}

TEST_CASE("fold-in never mutates the model") {
    Rng rng(3);
    const RelationSlices t = binary_slices(9, 2, 0.3, rng);
    const FactorModel model = fitted_toy_model(t, 2, 6);

    const std::vector<double> a_before = model.a.data();
    std::vector<std::vector<double>> r_before;
    for (const auto& r : model.r_slices)
        r_before.push_back(r.data());

    HyperParams p;
    p.rank = 2;
    const auto l0 = links_of_entity(t, 0);
    const auto l1 = links_of_entity(t, 1);
    const auto row0_fresh = fold_in(model, l0, p);
    const auto row1_after_other = fold_in(model, l1, p);
    const auto row0_again = fold_in(model, l0, p);

    CHECK(std::memcmp(a_before.data(), model.a.data().data(),
                      a_before.size() * sizeof(double)) == 0);
    for (std::size_t k = 0; k < r_before.size(); ++k)
        CHECK(std::memcmp(r_before[k].data(), model.r_slices[k].data().data(),
                          r_before[k].size() * sizeof(double)) == 0);
    CHECK(row0_fresh == row0_again); // independent vs sequential
    (void)row1_after_other;
}

TEST_CASE("fold-in validates link shape") {
    Rng rng(4);
    const RelationSlices t = binary_slices(6, 2, 0.3, rng);
    const FactorModel model = fitted_toy_model(t, 2, 2);
    HyperParams p;
    p.rank = 2;

    FoldInSlices wrong_m;
    wrong_m.out_links.resize(1);
    wrong_m.in_links.resize(1);
    CHECK_THROWS_AS(fold_in(model, wrong_m, p), ShapeError);

    FoldInSlices bad_index;
    bad_index.out_links.resize(2);
    bad_index.in_links.resize(2);
    bad_index.out_links[0].push_back(6);
    CHECK_THROWS_AS(fold_in(model, bad_index, p), ShapeError);
}

TEST_CASE("row mean scoring") {
    DenseMatrix a(1, 3);
    a(0, 0) = 0.2;
    a(0, 1) = 0.4;
    a(0, 2) = 0.6;
    const RankingResult r = rank_with_orientation(a, +1);
    CHECK(r.scores[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("all-zero matrix ranks in index order") {
    const DenseMatrix a(5, 3);
    const RankingResult r = rank_entities(a, LabelSet{});
    CHECK(r.orientation == +1);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(r.scores[i] == 0.0);
        CHECK(r.order[i] == i);
    }
}

TEST_CASE("orientation flips when positives score lower") {
    DenseMatrix a(4, 2);
    // Positives (0, 1) have smaller means than negatives (2, 3).
    a(0, 0) = 0.1; a(0, 1) = 0.1;
    a(1, 0) = 0.2; a(1, 1) = 0.2;
    a(2, 0) = 0.8; a(2, 1) = 0.8;
    a(3, 0) = 0.9; a(3, 1) = 0.9;
    LabelSet labels;
    labels.set(0, +1);
    labels.set(1, +1);
    labels.set(2, -1);
    labels.set(3, -1);
    const RankingResult r = rank_entities(a, labels);
    CHECK(r.orientation == -1);
    // Positives still ranked first thanks to the flipped sign.
    CHECK(r.order[0] == 0);
    CHECK(r.order[1] == 1);
}

TEST_CASE("constant shift leaves the order unchanged at fixed orientation") {
    Rng rng(5);
    const DenseMatrix a = random_matrix(12, 3, rng);
    const RankingResult base = rank_with_orientation(a, +1);
    DenseMatrix shifted = a;
    for (double& x : shifted.data())
        x += 3.25;
    const RankingResult moved = rank_with_orientation(shifted, +1);
    CHECK(base.order == moved.order);
}

TEST_CASE("negating the matrix flips orientation and keeps the order") {
    Rng rng(6);
    const DenseMatrix a = random_matrix(10, 2, rng);
    LabelSet labels;
    for (std::size_t i = 0; i < 10; ++i)
        labels.set(i, i < 5 ? 1 : -1);
    const RankingResult base = rank_entities(a, labels);

    DenseMatrix negated = a;
    for (double& x : negated.data())
        x = -x;
    const RankingResult flipped = rank_entities(negated, labels);
    CHECK(flipped.orientation == -base.orientation);
    CHECK(flipped.order == base.order);
}

TEST_CASE("ranking order is a permutation with index tiebreak") {
    DenseMatrix a(4, 1);
    a(0, 0) = 0.5;
    a(1, 0) = 0.7;
    a(2, 0) = 0.5; // tie with entity 0
    a(3, 0) = 0.1;
    const RankingResult r = rank_with_orientation(a, +1);
    CHECK(r.order == std::vector<std::size_t>{1, 0, 2, 3});
}

} // TEST_SUITE
