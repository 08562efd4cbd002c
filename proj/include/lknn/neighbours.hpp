#pragma once

// Exact Euclidean neighbour orderings. Candidates are ranked by
// (squared distance, training index), which is a strict total order, so a
// partial sort yields exactly the prefix of the full ordering.

#include <algorithm>
#include <cmath>
#include <vector>

#include "lknn/core.hpp"

namespace lknn {

struct NeighbourOrdering {
    std::vector<std::size_t> indices;
    std::vector<double> distances;

    std::size_t size() const noexcept { return indices.size(); }
};

namespace detail {

struct RankedPoint {
    double dist2;
    std::size_t index;

    bool operator<(const RankedPoint& o) const noexcept {
        return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
    }
};

inline double squared_distance(ConstVec a, ConstVec b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

inline std::vector<RankedPoint> ranked_prefix(const PointSet& pts, ConstVec query, std::size_t k) {
    std::vector<RankedPoint> all(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) all[i] = {squared_distance(pts[i], query), i};
    if (k < all.size()) {
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        all.resize(k);
    }
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace detail

/// First k neighbours of `query` in `train`, nearest first; ties by ascending index.
inline NeighbourOrdering k_nearest(const PointSet& train, ConstVec query, std::size_t k) {
    require_dim(query, train.dim(), "k_nearest query");
    if (k < 1 || k > train.size())
        throw Error(ErrorCode::OutOfRange,
                    "k=" + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
    auto ranked = detail::ranked_prefix(train, query, k);
    NeighbourOrdering out;
    out.indices.reserve(k);
    out.distances.reserve(k);
    for (const auto& r : ranked) {
        out.indices.push_back(r.index);
        out.distances.push_back(std::sqrt(r.dist2));
    }
    return out;
}

inline NeighbourOrdering k_nearest(const Dataset& train, ConstVec query, std::size_t k) {
    return k_nearest(train.points(), query, k);
}

inline NeighbourOrdering full_ordering(const Dataset& train, ConstVec query) {
    if (train.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
    return k_nearest(train.points(), query, train.size());
}

/// Labels of the first k neighbours, in neighbour order.
inline std::vector<Label> ordered_labels(const Dataset& train, const NeighbourOrdering& ord) {
    std::vector<Label> ys;
    ys.reserve(ord.size());
    for (std::size_t i : ord.indices) ys.push_back(train.label(i));
    return ys;
}

}  // namespace lknn
