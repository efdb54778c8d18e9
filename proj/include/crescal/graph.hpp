#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crescal/sparse.hpp"

namespace crescal {

// Bijective map between external string ids and dense indices assigned in
// first-appearance order.
class EntityIndex {
public:
    std::size_t add(const std::string& id);
    std::optional<std::size_t> lookup(const std::string& id) const;
    const std::string& id_of(std::size_t dense) const { return ids_[dense]; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> to_dense_;
};

// Partial labels in {-1, +1} over dense entity indices.
class LabelSet {
public:
    void set(std::size_t entity, int label); // label must be -1 or +1
    std::optional<int> get(std::size_t entity) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t positive_count() const { return positive_count_; }
    std::size_t negative_count() const { return negative_count_; }
    const std::map<std::size_t, int>& entries() const { return entries_; }
    std::vector<std::size_t> labeled_indices() const;

private:
    std::map<std::size_t, int> entries_;
    std::size_t positive_count_ = 0;
    std::size_t negative_count_ = 0;
};

// Per-relation sparse slices with a shared square shape. Values are
// unconstrained reals here; the binary adjacency invariant lives in
// SparseRelationTensor. Fitting code works on this view so that tests can
// drive it with real-valued slices.
struct RelationSlices {
    std::size_t n_entities = 0;
    std::vector<SparseMatrix> slices;

    std::size_t n_relations() const { return slices.size(); }
    double norm2() const;

    bool operator==(const RelationSlices&) const = default;
};

// Binary adjacency tensor T (N x N x M): entry (i, j, k) = 1 iff entity i
// relates to entity j under relation k.
class SparseRelationTensor {
public:
    SparseRelationTensor() = default;

    // One (row, col) pair list per relation; duplicates collapse to one
    // stored 1. Indices must lie in [0, n_entities).
    static SparseRelationTensor from_pairs(
        std::size_t n_entities,
        const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& per_relation);

    // Adopts existing slices; every stored value must equal 1.
    static SparseRelationTensor from_binary_slices(RelationSlices slices);

    std::size_t n_entities() const { return s_.n_entities; }
    std::size_t n_relations() const { return s_.slices.size(); }
    std::size_t nnz() const;
    const SparseMatrix& slice(std::size_t k) const { return s_.slices[k]; }
    const RelationSlices& view() const { return s_; }

    // View restricted to the first m relations.
    RelationSlices prefix_view(std::size_t m) const;

    bool operator==(const SparseRelationTensor&) const = default;

private:
    RelationSlices s_;
};

struct TripleFormat {
    char delimiter = '\t';
    // Optional lower bounds on tensor dimensions; lets an empty triple file
    // describe an all-zero tensor of known shape.
    std::size_t declared_entities = 0;
    std::size_t declared_relations = 0;
};

struct LoadedGraph {
    SparseRelationTensor tensor;
    EntityIndex entities;
    EntityIndex relations;
};

// Reads one `src<delim>rel<delim>dst` triple per line.
LoadedGraph load_triples(const std::string& path, const TripleFormat& format = {});

// Inverse of load_triples: one line per stored entry, slices in index order.
void write_triples(const std::string& path, const SparseRelationTensor& tensor,
                   const EntityIndex& entities, const EntityIndex& relations,
                   char delimiter = '\t');

struct LabelLoad {
    LabelSet labels;
    std::vector<std::string> skipped_ids; // ids absent from the entity index
};

// Reads `id<delim>{+1|-1}` lines. Unknown ids are reported, not fatal.
LabelLoad load_labels(const std::string& path, const EntityIndex& index,
                      char delimiter = '\t');

void write_labels(const std::string& path, const LabelSet& labels,
                  const EntityIndex& index, char delimiter = '\t');

struct SubsampleResult {
    SparseRelationTensor tensor;
    EntityIndex entities;
    LabelSet labels;
    std::vector<std::size_t> kept; // original dense indices, ascending
};

// Samples n_per_class labeled entities from each class, induces the
// subtensor over the sample, and drops entities with no interactions in it.
SubsampleResult balanced_subsample(const SparseRelationTensor& tensor,
                                   const EntityIndex& entities,
                                   const LabelSet& labels,
                                   std::size_t n_per_class, std::uint64_t seed);

// Induced subtensor over `keep` (ascending original dense indices),
// reindexed to 0..keep.size()-1. No degree filtering.
SparseRelationTensor induce_subtensor(const SparseRelationTensor& tensor,
                                      const std::vector<std::size_t>& keep);

} // namespace crescal
