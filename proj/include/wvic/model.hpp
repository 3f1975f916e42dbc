#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wvic/error.hpp"

namespace wvic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using BitVector = std::vector<std::uint8_t>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

/// Scales v to unit Euclidean length. Throws DataError("degenerate feature")
/// for an all-zero (or non-finite) vector.
Vector normalize_feature(const Vector& v);

/// One located individual in a frame. The feature is unit-normalized on
/// construction, so every inner product between features is a cosine.
class Detection {
public:
    Detection(Point2 coordinate, const Vector& feature, std::optional<std::int64_t> gt_id = std::nullopt);

    const Point2& coordinate() const { return coordinate_; }
    const Vector& feature() const { return feature_; }
    const std::optional<std::int64_t>& gt_id() const { return gt_id_; }
    Eigen::Index dim() const { return feature_.size(); }

    bool operator==(const Detection& other) const;

private:
    Point2 coordinate_;
    Vector feature_;
    std::optional<std::int64_t> gt_id_;
};

struct FrameRecord {
    int frame_index = 1;
    double timestamp = 0.0;
    std::vector<Detection> detections;
    BitVector inflow;   // 1: absent from the previous sampled frame
    BitVector outflow;  // 1: absent from the next sampled frame

    std::size_t size() const { return detections.size(); }
    bool operator==(const FrameRecord&) const = default;
};

struct DetectionStream {
    std::vector<FrameRecord> frames;
    double delta = 3.0;

    bool empty() const { return frames.empty(); }
    /// Feature dimension shared by all detections, or 0 when the stream has none.
    Eigen::Index feature_dim() const;
    bool has_gt_ids() const;

    /// Checks label lengths, timestamp spacing and dimension consistency.
    /// Throws DataError naming the first offending frame.
    void validate() const;

    bool operator==(const DetectionStream&) const = default;
};

/// Number of individuals shared by a frame pair: zeros in the earlier frame's
/// outflow bits, which must equal the zeros in the later frame's inflow bits.
/// Throws DataError("inconsistent weak labels") otherwise.
int shared_count(std::span<const std::uint8_t> outflow_prev, std::span<const std::uint8_t> inflow_curr);

/// Similarity matrix of a frame pair with rows/columns reordered so the shared
/// individuals come first:
///
///     S = [ s0  s1 ]   rows: shared(prev) | outflow(prev)
///         [ s2  s3 ]   cols: shared(curr) | inflow(curr)
///
/// perm_prev[r] is the original detection index of block row r (same for
/// perm_curr and columns).
class SimilarityBlocks {
public:
    SimilarityBlocks() = default;
    SimilarityBlocks(Matrix full, int shared, std::vector<int> perm_prev, std::vector<int> perm_curr);

    int shared() const { return shared_; }
    Eigen::Index rows() const { return full_.rows(); }
    Eigen::Index cols() const { return full_.cols(); }
    const Matrix& full() const { return full_; }
    const std::vector<int>& perm_prev() const { return perm_prev_; }
    const std::vector<int>& perm_curr() const { return perm_curr_; }

    Matrix s0() const { return full_.topLeftCorner(shared_, shared_); }
    Matrix s1() const { return full_.topRightCorner(shared_, cols() - shared_); }
    Matrix s2() const { return full_.bottomLeftCorner(rows() - shared_, shared_); }
    Matrix s3() const { return full_.bottomRightCorner(rows() - shared_, cols() - shared_); }

    /// The similarity matrix in original detection order.
    Matrix original_order() const;

private:
    Matrix full_;
    int shared_ = 0;
    std::vector<int> perm_prev_;
    std::vector<int> perm_curr_;
};

/// Stable partition: entries whose flag is 0 first, original order kept in each group.
std::vector<int> stable_flag_order(std::span<const std::uint8_t> flags);

SimilarityBlocks partition_similarity(const FrameRecord& prev, const FrameRecord& curr);

} // namespace wvic
