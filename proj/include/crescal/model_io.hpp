#pragma once

#include <string>

#include "crescal/graph.hpp"
#include "crescal/rescal.hpp"

namespace crescal {

// Model file: a single JSON object holding N, M, r, A row-major, each R_k
// row-major, and the name of the entity-index sidecar. Serialization is
// deterministic (sorted keys, shortest round-trip doubles).
void save_model(const std::string& path, const FactorModel& model,
                const std::string& index_sidecar);

struct LoadedModel {
    FactorModel model;
    std::string index_sidecar;
};

LoadedModel load_model(const std::string& path);

// Sidecar: external entity ids in dense order plus relation names.
void save_index(const std::string& path, const EntityIndex& entities,
                const EntityIndex& relations);

struct LoadedIndex {
    EntityIndex entities;
    EntityIndex relations;
};

LoadedIndex load_index(const std::string& path);

// Training report embedding the fit trace. Per-iteration wall times go into
// a separate "timings_ms" key so everything else is reproducible.
void save_fit_report(const std::string& path, const FitTrace& trace,
                     const HyperParams& params, const std::string& method);

// Formats a double with the shortest representation that round-trips.
std::string format_double(double x);

} // namespace crescal
