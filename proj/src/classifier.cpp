#include "crescal/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "crescal/errors.hpp"

namespace crescal {

bool ClassifierOutput::all_correct() const {
    for (double r : residual)
        if (r != 0.0)
            return false;
    return true;
}

double objective_g(const ClassifierOutput& out, const HyperParams& params) {
    double s = 0.0;
    for (double r : out.residual)
        s += r * r;
    return params.lambda_g * s;
}

namespace {

constexpr std::size_t kExhaustiveLimit = 50000;

// Neighbor candidate ordered by (squared distance, entity index); the index
// tiebreak makes every backend resolve equidistant rows identically.
struct Candidate {
    double d2;
    std::size_t idx;

    bool operator<(const Candidate& o) const {
        return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
    }
};

// Fixed-capacity sorted candidate list; k is small.
class NeighborList {
public:
    explicit NeighborList(std::size_t k) : k_(k) { items_.reserve(k + 1); }

    bool full() const { return items_.size() == k_; }
    double worst_d2() const { return items_.back().d2; }
    const std::vector<Candidate>& items() const { return items_; }

    void offer(Candidate c) {
        if (full() && !(c < items_.back()))
            return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), c);
        items_.insert(pos, c);
        if (items_.size() > k_)
            items_.pop_back();
    }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

double row_dist2(const DenseMatrix& a, std::size_t i, std::size_t j) {
    const double* ri = a.row(i).data();
    const double* rj = a.row(j).data();
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = ri[c] - rj[c];
        s += d * d;
    }
    return s;
}

// kd-tree over the labeled rows. Exact: traversal visits any subtree whose
// bounding slab could still hold a candidate tied with the current worst,
// and the (d2, idx) comparator settles ties.
class KdTree {
public:
    KdTree(const DenseMatrix& a, const std::vector<std::size_t>& points)
        : a_(a), idx_(points) {
        nodes_.reserve(points.size());
        root_ = build(0, idx_.size());
    }

    void query(std::size_t self, std::span<const double> q,
               NeighborList& best) const {
        search(root_, self, q, best);
    }

private:
    struct Node {
        std::size_t point; // index into idx_
        std::size_t axis;
        int left = -1, right = -1;
    };

    int build(std::size_t lo, std::size_t hi) {
        if (lo >= hi)
            return -1;
        // Split on the axis with the largest spread across this range.
        std::size_t axis = 0;
        double best_spread = -1.0;
        for (std::size_t c = 0; c < a_.cols(); ++c) {
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (std::size_t p = lo; p < hi; ++p) {
                const double v = a_(idx_[p], c);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx - mn > best_spread) {
                best_spread = mx - mn;
                axis = c;
            }
        }
        const std::size_t mid = (lo + hi) / 2;
        std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                         [&](std::size_t x, std::size_t y) {
                             const double vx = a_(x, axis), vy = a_(y, axis);
                             return vx != vy ? vx < vy : x < y;
                         });
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.push_back({mid, axis, -1, -1});
        const int left = build(lo, mid);
        const int right = build(mid + 1, hi);
        nodes_[node_id].left = left;
        nodes_[node_id].right = right;
        return node_id;
    }

    void search(int node_id, std::size_t self, std::span<const double> q,
                NeighborList& best) const {
        if (node_id < 0)
            return;
        const Node& node = nodes_[node_id];
        const std::size_t point = idx_[node.point];
        if (point != self) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < q.size(); ++c) {
                const double d = q[c] - a_(point, c);
                d2 += d * d;
            }
            best.offer({d2, point});
        }
        const double diff = q[node.axis] - a_(point, node.axis);
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        search(near, self, q, best);
        // Non-strict bound: equal-distance candidates on the far side may
        // still displace a worse-indexed tie.
        if (!best.full() || diff * diff <= best.worst_d2())
            search(far, self, q, best);
    }

    const DenseMatrix& a_;
    std::vector<std::size_t> idx_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

int vote(const NeighborList& best, const LabelSet& labels) {
    int sum = 0;
    for (const Candidate& c : best.items())
        sum += *labels.get(c.idx);
    if (sum != 0)
        return sum > 0 ? 1 : -1;
    return *labels.get(best.items().front().idx);
}

ClassifierOutput predict_impl(const DenseMatrix& a, const LabelSet& labels,
                              std::size_t k, KnnBackend backend, bool parallel) {
    (void)parallel; // only consumed by the omp clause
    const std::size_t n = a.rows();
    for (const auto& [e, l] : labels.entries())
        if (e >= n)
            throw ShapeError("knn: labeled index outside factor matrix");
    const std::vector<std::size_t> labeled = labels.labeled_indices();
    if (labeled.size() < k + 1)
        throw ConfigError("knn: need at least k_neighbors + 1 = " +
                          std::to_string(k + 1) + " labeled entities, have " +
                          std::to_string(labeled.size()));

    if (backend == KnnBackend::automatic)
        backend = labeled.size() <= kExhaustiveLimit ? KnnBackend::exhaustive
                                                     : KnnBackend::kdtree;

    ClassifierOutput out;
    out.predictions.assign(n, 0);
    out.residual.assign(n, 0.0);

    std::optional<KdTree> tree;
    if (backend == KnnBackend::kdtree)
        tree.emplace(a, labeled);

    const std::size_t q_count = labeled.size();
#pragma omp parallel for schedule(static) if (parallel && q_count >= 32)
    for (std::size_t qi = 0; qi < q_count; ++qi) {
        const std::size_t self = labeled[qi];
        NeighborList best(k);
        if (tree) {
            tree->query(self, a.row(self), best);
        } else {
            for (std::size_t j : labeled) {
                if (j == self)
                    continue;
                best.offer({row_dist2(a, self, j), j});
            }
        }
        const int pred = vote(best, labels);
        out.predictions[self] = pred;
        out.residual[self] = static_cast<double>(*labels.get(self) - pred);
    }
    return out;
}

} // namespace

ClassifierOutput knn_predict(const DenseMatrix& a, const LabelSet& labels,
                             std::size_t k_neighbors, KnnBackend backend) {
    return predict_impl(a, labels, k_neighbors, backend, /*parallel=*/true);
}

namespace serial {

ClassifierOutput knn_predict(const DenseMatrix& a, const LabelSet& labels,
                             std::size_t k_neighbors) {
    return predict_impl(a, labels, k_neighbors, KnnBackend::exhaustive,
                        /*parallel=*/false);
}

} // namespace serial

} // namespace crescal
