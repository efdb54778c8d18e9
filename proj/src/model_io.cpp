#include "crescal/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "crescal/errors.hpp"

namespace crescal {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for write: " + path);
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace

std::string format_double(double x) {
    return json(x).dump();
}

void save_model(const std::string& path, const FactorModel& model,
                const std::string& index_sidecar) {
    json j;
    j["n_entities"] = model.n_entities();
    j["n_relations"] = model.n_relations();
    j["rank"] = model.rank();
    j["a"] = model.a.data();
    json slices = json::array();
    for (const auto& r : model.r_slices)
        slices.push_back(r.data());
    j["r_slices"] = std::move(slices);
    j["entity_index_file"] = index_sidecar;
    write_json(path, j);
}

LoadedModel load_model(const std::string& path) {
    const json j = load_json(path);
    try {
        const auto n = j.at("n_entities").get<std::size_t>();
        const auto m = j.at("n_relations").get<std::size_t>();
        const auto rank = j.at("rank").get<std::size_t>();

        LoadedModel out;
        out.model.a = DenseMatrix::from_data(
            n, rank, j.at("a").get<std::vector<double>>());
        const auto& slices = j.at("r_slices");
        if (slices.size() != m)
            throw ParseError(path + ": relation slice count mismatch");
        for (const auto& s : slices)
            out.model.r_slices.push_back(
                DenseMatrix::from_data(rank, rank, s.get<std::vector<double>>()));
        out.index_sidecar = j.value("entity_index_file", std::string{});
        return out;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_index(const std::string& path, const EntityIndex& entities,
                const EntityIndex& relations) {
    json j;
    j["entities"] = entities.ids();
    j["relations"] = relations.ids();
    write_json(path, j);
}

LoadedIndex load_index(const std::string& path) {
    const json j = load_json(path);
    LoadedIndex out;
    try {
        for (const auto& id : j.at("entities").get<std::vector<std::string>>())
            out.entities.add(id);
        for (const auto& id : j.at("relations").get<std::vector<std::string>>())
            out.relations.add(id);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return out;
}

void save_fit_report(const std::string& path, const FitTrace& trace,
                     const HyperParams& params, const std::string& method) {
    json j;
    j["method"] = method;
    j["hyperparams"] = {
        {"rank", params.rank},         {"lambda_a", params.lambda_a},
        {"lambda_r", params.lambda_r}, {"lambda_g", params.lambda_g},
        {"k_neighbors", params.k_neighbors}, {"epsilon", params.epsilon},
        {"max_iter", params.max_iter}, {"seed", params.seed},
    };
    j["converged"] = trace.converged;
    j["iterations"] = trace.iterations_used();
    json records = json::array();
    json timings = json::array();
    for (const auto& it : trace.iterations) {
        records.push_back({{"f", it.f},
                           {"g", it.g},
                           {"h", it.h},
                           {"objective", it.objective}});
        timings.push_back(it.wall_ms);
    }
    j["trace"] = std::move(records);
    // Wall times vary between runs; everything else in this file is
    // deterministic for a fixed seed.
    j["timings_ms"] = std::move(timings);
    if (!trace.iterations.empty()) {
        const auto& last = trace.iterations.back();
        j["final"] = {{"f", last.f},
                      {"g", last.g},
                      {"h", last.h},
                      {"objective", last.objective}};
    }
    write_json(path, j);
}

} // namespace crescal
