#include "crescal/graph.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "crescal/errors.hpp"
#include "crescal/rng.hpp"

namespace crescal {

std::size_t EntityIndex::add(const std::string& id) {
    auto it = to_dense_.find(id);
    if (it != to_dense_.end())
        return it->second;
    const std::size_t dense = ids_.size();
    ids_.push_back(id);
    to_dense_.emplace(id, dense);
    return dense;
}

std::optional<std::size_t> EntityIndex::lookup(const std::string& id) const {
    auto it = to_dense_.find(id);
    if (it == to_dense_.end())
        return std::nullopt;
    return it->second;
}

void LabelSet::set(std::size_t entity, int label) {
    if (label != -1 && label != 1)
        throw ConfigError("label must be -1 or +1");
    auto [it, inserted] = entries_.insert_or_assign(entity, label);
    (void)it;
    if (!inserted) {
        // recount below covers reassignment
        positive_count_ = 0;
        negative_count_ = 0;
        for (const auto& [e, l] : entries_)
            (l > 0 ? positive_count_ : negative_count_)++;
        return;
    }
    (label > 0 ? positive_count_ : negative_count_)++;
}

std::optional<int> LabelSet::get(std::size_t entity) const {
    auto it = entries_.find(entity);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::size_t> LabelSet::labeled_indices() const {
    std::vector<std::size_t> out;
    out.reserve(entries_.size());
    for (const auto& [e, l] : entries_)
        out.push_back(e);
    return out;
}

double RelationSlices::norm2() const {
    double s = 0.0;
    for (const auto& m : slices)
        s += m.norm2();
    return s;
}

SparseRelationTensor SparseRelationTensor::from_pairs(
    std::size_t n_entities,
    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& per_relation) {
    SparseRelationTensor t;
    t.s_.n_entities = n_entities;
    t.s_.slices.reserve(per_relation.size());
    for (const auto& pairs : per_relation) {
        std::vector<SparseEntry> entries;
        entries.reserve(pairs.size());
        for (const auto& [i, j] : pairs)
            entries.push_back({i, j, 1.0});
        t.s_.slices.push_back(
            SparseMatrix::from_entries(n_entities, n_entities, std::move(entries),
                                       /*binary=*/true));
    }
    return t;
}

SparseRelationTensor SparseRelationTensor::from_binary_slices(RelationSlices slices) {
    for (const auto& m : slices.slices) {
        if (m.rows() != slices.n_entities || m.cols() != slices.n_entities)
            throw ShapeError("relation tensor: slice shape mismatch");
        m.for_each([](std::size_t, std::size_t, double v) {
            if (v != 1.0)
                throw ShapeError("relation tensor: non-binary stored value");
        });
    }
    SparseRelationTensor t;
    t.s_ = std::move(slices);
    return t;
}

std::size_t SparseRelationTensor::nnz() const {
    std::size_t n = 0;
    for (const auto& m : s_.slices)
        n += m.nnz();
    return n;
}

RelationSlices SparseRelationTensor::prefix_view(std::size_t m) const {
    if (m > n_relations())
        throw ConfigError("relation prefix larger than relation count");
    RelationSlices out;
    out.n_entities = s_.n_entities;
    out.slices.assign(s_.slices.begin(), s_.slices.begin() + m);
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

// getline with CRLF tolerance.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line))
        return false;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return true;
}

} // namespace

LoadedGraph load_triples(const std::string& path, const TripleFormat& format) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open triple file: " + path);

    LoadedGraph g;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_triples = 0;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_line(line, format.delimiter);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
            fields[2].empty())
            throw ParseError("triple file " + path + " line " +
                             std::to_string(line_no) +
                             ": expected src<delim>rel<delim>dst");
        const std::size_t src = g.entities.add(fields[0]);
        const std::size_t rel = g.relations.add(fields[1]);
        const std::size_t dst = g.entities.add(fields[2]);
        if (rel >= pairs.size())
            pairs.resize(rel + 1);
        pairs[rel].emplace_back(src, dst);
        ++n_triples;
    }
    if (n_triples == 0 &&
        (format.declared_entities == 0 || format.declared_relations == 0))
        throw EmptyInputError("triple file " + path +
                              ": no triples and no declared dimensions");

    const std::size_t n = std::max(g.entities.size(), format.declared_entities);
    if (pairs.size() < format.declared_relations)
        pairs.resize(format.declared_relations);
    g.tensor = SparseRelationTensor::from_pairs(n, pairs);
    return g;
}

void write_triples(const std::string& path, const SparseRelationTensor& tensor,
                   const EntityIndex& entities, const EntityIndex& relations,
                   char delimiter) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for write: " + path);
    for (std::size_t k = 0; k < tensor.n_relations(); ++k) {
        tensor.slice(k).for_each([&](std::size_t i, std::size_t j, double) {
            out << entities.id_of(i) << delimiter << relations.id_of(k)
                << delimiter << entities.id_of(j) << '\n';
        });
    }
    if (!out)
        throw IoError("write failed: " + path);
}

LabelLoad load_labels(const std::string& path, const EntityIndex& index,
                      char delimiter) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open label file: " + path);

    LabelLoad out;
    std::string line;
    std::size_t line_no = 0;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_line(line, delimiter);
        if (fields.size() != 2 || fields[0].empty())
            throw ParseError("label file " + path + " line " +
                             std::to_string(line_no) + ": expected id<delim>label");
        int label = 0;
        if (fields[1] == "+1" || fields[1] == "1")
            label = 1;
        else if (fields[1] == "-1")
            label = -1;
        else
            throw ParseError("label file " + path + " line " +
                             std::to_string(line_no) + ": label token '" +
                             fields[1] + "' not in {+1, -1}");
        const auto dense = index.lookup(fields[0]);
        if (!dense) {
            out.skipped_ids.push_back(fields[0]);
            continue;
        }
        out.labels.set(*dense, label);
    }
    return out;
}

void write_labels(const std::string& path, const LabelSet& labels,
                  const EntityIndex& index, char delimiter) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for write: " + path);
    for (const auto& [entity, label] : labels.entries())
        out << index.id_of(entity) << delimiter << (label > 0 ? "+1" : "-1")
            << '\n';
    if (!out)
        throw IoError("write failed: " + path);
}

SparseRelationTensor induce_subtensor(const SparseRelationTensor& tensor,
                                      const std::vector<std::size_t>& keep) {
    std::vector<std::size_t> new_index(tensor.n_entities(), SIZE_MAX);
    for (std::size_t p = 0; p < keep.size(); ++p)
        new_index[keep[p]] = p;

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs(
        tensor.n_relations());
    for (std::size_t k = 0; k < tensor.n_relations(); ++k) {
        tensor.slice(k).for_each([&](std::size_t i, std::size_t j, double) {
            if (new_index[i] != SIZE_MAX && new_index[j] != SIZE_MAX)
                pairs[k].emplace_back(new_index[i], new_index[j]);
        });
    }
    return SparseRelationTensor::from_pairs(keep.size(), pairs);
}

SubsampleResult balanced_subsample(const SparseRelationTensor& tensor,
                                   const EntityIndex& entities,
                                   const LabelSet& labels,
                                   std::size_t n_per_class, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (const auto& [e, l] : labels.entries())
        (l > 0 ? pos : neg).push_back(e);
    if (pos.size() < n_per_class || neg.size() < n_per_class)
        throw SizeError("balanced_subsample: fewer than " +
                        std::to_string(n_per_class) +
                        " labeled entities in some class");

    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::size_t> chosen(pos.begin(), pos.begin() + n_per_class);
    chosen.insert(chosen.end(), neg.begin(), neg.begin() + n_per_class);
    std::sort(chosen.begin(), chosen.end());

    SparseRelationTensor induced = induce_subtensor(tensor, chosen);

    // Entities with no interactions inside the sample are discarded;
    // degree counts both in- and out-edges over all relations.
    std::vector<std::size_t> degree(chosen.size(), 0);
    for (std::size_t k = 0; k < induced.n_relations(); ++k) {
        induced.slice(k).for_each([&](std::size_t i, std::size_t j, double) {
            ++degree[i];
            ++degree[j];
        });
    }
    std::vector<std::size_t> survivors_local, survivors_original;
    for (std::size_t p = 0; p < chosen.size(); ++p) {
        if (degree[p] > 0) {
            survivors_local.push_back(p);
            survivors_original.push_back(chosen[p]);
        }
    }

    SubsampleResult out;
    out.tensor = induce_subtensor(induced, survivors_local);
    out.kept = survivors_original;
    for (std::size_t p = 0; p < survivors_original.size(); ++p) {
        out.entities.add(entities.id_of(survivors_original[p]));
        out.labels.set(p, *labels.get(survivors_original[p]));
    }
    return out;
}

} // namespace crescal
