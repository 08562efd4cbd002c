#pragma once

// Cross-validated choice of k or B over a candidate grid.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lknn/classify.hpp"
#include "lknn/core.hpp"
#include "lknn/neighbours.hpp"

namespace lknn {

template <class T>
class CandidateGrid {
public:
    explicit CandidateGrid(std::vector<T> values) : values_(std::move(values)) {
        if (values_.empty()) throw Error(ErrorCode::EmptyInput, "empty candidate grid");
        for (std::size_t i = 1; i < values_.size(); ++i)
            if (!(values_[i - 1] < values_[i]))
                throw Error(ErrorCode::InvalidArgument, "candidate grid must be strictly increasing");
    }

    const std::vector<T>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    const T& operator[](std::size_t i) const { return values_[i]; }

private:
    std::vector<T> values_;
};

template <class T>
struct CvResult {
    T best{};
    std::vector<T> candidates;
    std::vector<std::vector<double>> fold_errors;  // [candidate][fold]
    std::vector<double> mean_error;                // [candidate]
};

/// Integers 1..floor(n/4) when that is at most 40, else 40 linearly spaced
/// values on [1, floor(n/4)] rounded to nearest and deduplicated.
inline CandidateGrid<std::size_t> k_grid(std::size_t n) {
    const std::size_t top = n / 4;
    if (n < 8 || top < 1) throw Error(ErrorCode::OutOfRange, "k_grid needs n >= 8");
    constexpr std::size_t max_len = 40;
    std::vector<std::size_t> ks;
    if (top <= max_len) {
        ks.resize(top);
        std::iota(ks.begin(), ks.end(), std::size_t{1});
    } else {
        const double step = static_cast<double>(top - 1) / static_cast<double>(max_len - 1);
        for (std::size_t i = 0; i < max_len; ++i) {
            const auto k = static_cast<std::size_t>(std::lround(1.0 + step * static_cast<double>(i)));
            if (ks.empty() || ks.back() != k) ks.push_back(k);
        }
    }
    return CandidateGrid<std::size_t>(std::move(ks));
}

/// 40 equally spaced values from n^{-4/(d+4)} to n^{d/(d+4)}, endpoints included.
inline CandidateGrid<double> B_grid(std::size_t n, std::size_t d) {
    if (n < 2 || d < 1) throw Error(ErrorCode::OutOfRange, "B_grid needs n >= 2, d >= 1");
    constexpr std::size_t len = 40;
    const double nd = static_cast<double>(n), dd = static_cast<double>(d);
    const double lo = std::pow(nd, -4.0 / (dd + 4.0));
    const double hi = std::pow(nd, dd / (dd + 4.0));
    std::vector<double> bs(len);
    for (std::size_t i = 0; i < len; ++i)
        bs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(len - 1);
    bs.back() = hi;
    return CandidateGrid<double>(std::move(bs));
}

/// One random permutation, cut into `folds` contiguous blocks of near-equal size.
inline std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, RngStream& rng) {
    if (folds < 2) throw Error(ErrorCode::OutOfRange, "need at least 2 folds");
    if (n < folds) throw Error(ErrorCode::OutOfRange, "more folds than samples");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<std::vector<std::size_t>> blocks(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t begin = f * n / folds, end = (f + 1) * n / folds;
        blocks[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return blocks;
}

/// Smallest candidate attaining the minimum mean error. Means that agree up
/// to rounding count as ties, since fold errors summed in a different order
/// need not be bit-equal.
template <class T>
void pick_best(CvResult<T>& r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < r.mean_error.size(); ++c)
        if (r.mean_error[c] < r.mean_error[best] - 1e-12) best = c;
    r.best = r.candidates[best];
}

template <class T, class Factory>
CvResult<T> cv_select(const Dataset& train, const CandidateGrid<T>& grid, Factory&& rule_factory,
                      std::size_t folds, RngStream& rng) {
    const std::size_t n = train.size();
    const std::size_t d = train.dim();
    const auto blocks = fold_partition(n, folds, rng);

    std::vector<KRule> rules;
    rules.reserve(grid.size());
    for (const T& c : grid.values()) rules.push_back(rule_factory(c));

    CvResult<T> out;
    out.candidates = grid.values();
    out.fold_errors.assign(grid.size(), std::vector<double>(folds, 0.0));
    out.mean_error.assign(grid.size(), 0.0);

    std::vector<std::size_t> ks(grid.size());
    std::vector<std::size_t> ones_prefix;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_idx;
        fit_idx.reserve(n - blocks[f].size());
        for (std::size_t g = 0; g < folds; ++g)
            if (g != f) fit_idx.insert(fit_idx.end(), blocks[g].begin(), blocks[g].end());
        std::sort(fit_idx.begin(), fit_idx.end());
        const Dataset fit = train.subset(fit_idx);

        std::vector<std::size_t> wrong(grid.size(), 0);
        for (std::size_t i : blocks[f]) {
            const ConstVec x = train.features(i);
            std::size_t k_max = 1;
            for (std::size_t c = 0; c < rules.size(); ++c) {
                ks[c] = fit.size() == 1 ? 1 : resolve_k(rules[c], x, fit.size(), d);
                k_max = std::max(k_max, ks[c]);
            }
            const auto ord = k_nearest(fit, x, k_max);
            ones_prefix.assign(k_max + 1, 0);
            for (std::size_t j = 0; j < k_max; ++j)
                ones_prefix[j + 1] = ones_prefix[j] + (fit.label(ord.indices[j]) == 1);
            for (std::size_t c = 0; c < rules.size(); ++c) {
                const Label predicted = 2 * ones_prefix[ks[c]] >= ks[c] ? 1 : 0;
                wrong[c] += predicted != train.label(i);
            }
        }
        for (std::size_t c = 0; c < grid.size(); ++c)
            out.fold_errors[c][f] = static_cast<double>(wrong[c]) / static_cast<double>(blocks[f].size());
    }
    for (std::size_t c = 0; c < grid.size(); ++c)
        out.mean_error[c] = std::accumulate(out.fold_errors[c].begin(), out.fold_errors[c].end(), 0.0) /
                            static_cast<double>(folds);
    pick_best(out);
    return out;
}

}  // namespace lknn
