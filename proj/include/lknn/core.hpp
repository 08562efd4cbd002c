#pragma once

// Value types shared by every module: labelled datasets, unlabelled point
// sets, the library's error type and the counter-based random streams.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lknn {

using Label = int;
using Vector = std::vector<double>;
using ConstVec = std::span<const double>;

enum class ErrorCode {
    EmptyInput,
    LengthMismatch,
    DimensionMismatch,
    OutOfRange,
    NonFinite,
    Degenerate,
    Unsupported,
    InvalidArgument,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "empty input";
        case ErrorCode::LengthMismatch: return "length mismatch";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::OutOfRange: return "out of range";
        case ErrorCode::NonFinite: return "non-finite value";
        case ErrorCode::Degenerate: return "degenerate input";
        case ErrorCode::Unsupported: return "unsupported";
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::Io: return "i/o error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct Sample {
    Vector features;
    Label label = 0;
};

/// Ordered collection of points in R^d stored row-major.
class PointSet {
public:
    PointSet() = default;

    PointSet(std::size_t dim, Vector flat) : dim_(dim), data_(std::move(flat)) {
        if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "point dimension must be >= 1");
        if (data_.size() % dim_ != 0)
            throw Error(ErrorCode::DimensionMismatch, "flat buffer is not a multiple of dim");
    }

    static PointSet from_rows(const std::vector<Vector>& rows) {
        if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no points");
        const std::size_t d = rows.front().size();
        Vector flat;
        flat.reserve(rows.size() * d);
        for (const auto& r : rows) {
            if (r.size() != d) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return PointSet(d, std::move(flat));
    }

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return size() == 0; }

    ConstVec operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    const Vector& flat() const noexcept { return data_; }

    void push_back(ConstVec x) {
        if (dim_ == 0) dim_ = x.size();
        if (x.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "point dimension differs");
        data_.insert(data_.end(), x.begin(), x.end());
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t dim_ = 0;
    Vector data_;
};

/// Labelled training data. Insertion order is preserved and used for tie-breaking.
class Dataset {
public:
    Dataset() = default;

    Dataset(PointSet points, std::vector<Label> labels)
        : points_(std::move(points)), labels_(std::move(labels)) {
        if (points_.size() != labels_.size())
            throw Error(ErrorCode::LengthMismatch, "features and labels differ in length");
        for (Label y : labels_)
            if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "label must be 0 or 1");
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return points_.dim(); }
    bool empty() const noexcept { return labels_.empty(); }

    ConstVec features(std::size_t i) const { return points_[i]; }
    Label label(std::size_t i) const { return labels_[i]; }
    Sample sample(std::size_t i) const {
        auto f = features(i);
        return {Vector(f.begin(), f.end()), labels_[i]};
    }

    const PointSet& points() const noexcept { return points_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }

    /// Rows `idx` in the given order.
    Dataset subset(std::span<const std::size_t> idx) const {
        Vector flat;
        flat.reserve(idx.size() * dim());
        std::vector<Label> ys;
        ys.reserve(idx.size());
        for (std::size_t i : idx) {
            auto f = features(i);
            flat.insert(flat.end(), f.begin(), f.end());
            ys.push_back(labels_[i]);
        }
        return Dataset(PointSet(dim(), std::move(flat)), std::move(ys));
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    PointSet points_;
    std::vector<Label> labels_;
};

inline Dataset build_dataset(const std::vector<Vector>& features, const std::vector<Label>& labels) {
    if (features.empty() && labels.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
    if (features.size() != labels.size())
        throw Error(ErrorCode::LengthMismatch, "features and labels differ in length");
    const std::size_t d = features.front().size();
    if (d == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional features");
    for (const auto& f : features)
        if (f.size() != d) throw Error(ErrorCode::DimensionMismatch, "inconsistent feature dimension");
    return Dataset(PointSet::from_rows(features), labels);
}

inline Dataset build_dataset(const std::vector<Sample>& samples) {
    std::vector<Vector> xs;
    std::vector<Label> ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& s : samples) {
        xs.push_back(s.features);
        ys.push_back(s.label);
    }
    return build_dataset(xs, ys);
}

inline void require_dim(ConstVec x, std::size_t d, const char* what) {
    if (x.size() != d)
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": expected dimension " + std::to_string(d) + ", got " +
                        std::to_string(x.size()));
}

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: draw i is mix64(key + (i + 1) * gamma), so the
/// whole sequence is a pure function of (master_seed, stream_index).
/// Satisfies UniformRandomBitGenerator. Single owner; do not share across threads.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_seed_(master_seed), stream_index_(stream_index),
          key_(detail::mix64(detail::mix64(master_seed ^ 0x6A09E667F3BCC909ULL) +
                             detail::mix64(stream_index + detail::golden_gamma))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::golden_gamma);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return 1.0 - uniform(); }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw Error(ErrorCode::InvalidArgument, "below(0)");
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t r;
        do r = (*this)();
        while (r >= limit);
        return r % bound;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal by Box-Muller; consumes exactly two draws.
    double normal() noexcept {
        const double u1 = uniform_open0();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Independent child stream, e.g. one per purpose inside a repetition.
    RngStream split(std::uint64_t sub_index) const { return RngStream(key_, sub_index); }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }
    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    return RngStream(master_seed, stream_index);
}

}  // namespace lknn
