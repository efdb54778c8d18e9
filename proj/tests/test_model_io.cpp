#include <doctest.h>

#include "crescal/errors.hpp"
#include "crescal/model_io.hpp"
#include "crescal/rng.hpp"
#include "test_support.hpp"

using namespace crescal;
using testsup::random_matrix;
using testsup::TempDir;

TEST_SUITE("model_io") {

TEST_CASE("model save/load round-trips exactly") {
    Rng rng(1);
    FactorModel model;
    model.a = random_matrix(7, 3, rng);
    model.r_slices = {random_matrix(3, 3, rng), random_matrix(3, 3, rng)};

    TempDir tmp("model");
    save_model(tmp.file("model.json"), model, "index.json");
    const LoadedModel loaded = load_model(tmp.file("model.json"));
    CHECK(loaded.index_sidecar == "index.json");
    CHECK(bit_equal(loaded.model.a, model.a));
    REQUIRE(loaded.model.r_slices.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(bit_equal(loaded.model.r_slices[k], model.r_slices[k]));
}

TEST_CASE("model serialization is byte-stable") {
    Rng rng(2);
    FactorModel model;
    model.a = random_matrix(4, 2, rng);
    model.r_slices = {random_matrix(2, 2, rng)};
    TempDir tmp("stable");
    save_model(tmp.file("m1.json"), model, "index.json");
    save_model(tmp.file("m2.json"), model, "index.json");
    CHECK(testsup::read_file(tmp.file("m1.json")) ==
          testsup::read_file(tmp.file("m2.json")));
}

TEST_CASE("model with non-finite values is rejected on load") {
    TempDir tmp("nan");
    testsup::write_file(tmp.file("bad.json"),
                        R"({"n_entities":1,"n_relations":0,"rank":1,)"
                        R"("a":[null],"r_slices":[],"entity_index_file":""})");
    CHECK_THROWS(load_model(tmp.file("bad.json")));
    testsup::write_file(tmp.file("bad2.json"), "not json at all {");
    CHECK_THROWS_AS(load_model(tmp.file("bad2.json")), ParseError);
}

TEST_CASE("index sidecar round-trips") {
    EntityIndex entities, relations;
    entities.add("u1");
    entities.add("u2");
    relations.add("friend");
    TempDir tmp("index");
    save_index(tmp.file("index.json"), entities, relations);
    const LoadedIndex loaded = load_index(tmp.file("index.json"));
    CHECK(loaded.entities.ids() == entities.ids());
    CHECK(loaded.relations.ids() == relations.ids());
}

TEST_CASE("fit report embeds the trace") {
    FitTrace trace;
    trace.iterations.push_back({10.0, 1.0, 2.0, 0.5, 3.0});
    trace.iterations.push_back({8.0, 0.5, 2.0, 0.4, 2.0});
    trace.converged = true;
    TempDir tmp("report");
    HyperParams p;
    save_fit_report(tmp.file("report.json"), trace, p, "class_rescal");
    const std::string text = testsup::read_file(tmp.file("report.json"));
    CHECK(text.find("\"iterations\": 2") != std::string::npos);
    CHECK(text.find("\"converged\": true") != std::string::npos);
    CHECK(text.find("\"objective\": 0.4") != std::string::npos);
    CHECK(text.find("timings_ms") != std::string::npos);
}

} // TEST_SUITE
