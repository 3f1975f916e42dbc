#include "wvic/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wvic {

Vector normalize_feature(const Vector& v) {
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DataError("degenerate feature");
    }
    // already-unit vectors pass through bit-for-bit so normalization is idempotent
    if (std::abs(norm - 1.0) <= 1e-14) {
        return v;
    }
    return v / norm;
}

Detection::Detection(Point2 coordinate, const Vector& feature, std::optional<std::int64_t> gt_id)
    : coordinate_(coordinate), feature_(normalize_feature(feature)), gt_id_(gt_id) {
    if (gt_id_ && *gt_id_ < 0) {
        throw DataError("negative gt id " + std::to_string(*gt_id_));
    }
}

bool Detection::operator==(const Detection& other) const {
    return coordinate_ == other.coordinate_ && gt_id_ == other.gt_id_ &&
           feature_.size() == other.feature_.size() && feature_ == other.feature_;
}

Eigen::Index DetectionStream::feature_dim() const {
    for (const auto& frame : frames) {
        if (!frame.detections.empty()) {
            return frame.detections.front().dim();
        }
    }
    return 0;
}

bool DetectionStream::has_gt_ids() const {
    for (const auto& frame : frames) {
        for (const auto& det : frame.detections) {
            if (!det.gt_id()) {
                return false;
            }
        }
    }
    return true;
}

void DetectionStream::validate() const {
    if (!(delta > 0.0)) {
        throw DataError("sampling interval must be positive");
    }
    const Eigen::Index dim = feature_dim();
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& f = frames[k];
        const std::string where = "frame " + std::to_string(f.frame_index);
        if (f.frame_index < 1) {
            throw DataError(where + ": frame index must be >= 1");
        }
        if (f.inflow.size() != f.size() || f.outflow.size() != f.size()) {
            throw DataError(where + ": label length differs from detection count");
        }
        for (const auto& det : f.detections) {
            if (det.dim() != dim) {
                throw DataError(where + ": feature dimension mismatch");
            }
        }
        if (k > 0) {
            const double gap = f.timestamp - frames[k - 1].timestamp;
            if (!(gap > 0.0) || std::abs(gap - delta) > 1e-6 * std::max(1.0, delta)) {
                throw DataError(where + ": timestamps not spaced by delta");
            }
        }
    }
}

int shared_count(std::span<const std::uint8_t> outflow_prev, std::span<const std::uint8_t> inflow_curr) {
    auto zeros = [](std::span<const std::uint8_t> bits) {
        int n = 0;
        for (auto b : bits) {
            n += b == 0 ? 1 : 0;
        }
        return n;
    };
    const int m = zeros(outflow_prev);
    if (m != zeros(inflow_curr)) {
        throw DataError("inconsistent weak labels");
    }
    return m;
}

std::vector<int> stable_flag_order(std::span<const std::uint8_t> flags) {
    std::vector<int> order;
    order.reserve(flags.size());
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < flags.size(); ++k) {
            if ((flags[k] != 0) == (pass == 1)) {
                order.push_back(static_cast<int>(k));
            }
        }
    }
    return order;
}

SimilarityBlocks::SimilarityBlocks(Matrix full, int shared, std::vector<int> perm_prev, std::vector<int> perm_curr)
    : full_(std::move(full)), shared_(shared), perm_prev_(std::move(perm_prev)), perm_curr_(std::move(perm_curr)) {
    if (shared_ < 0 || shared_ > full_.rows() || shared_ > full_.cols()) {
        throw DataError("shared count exceeds similarity matrix size");
    }
    auto is_bijection = [](const std::vector<int>& perm, Eigen::Index n) {
        if (static_cast<Eigen::Index>(perm.size()) != n) {
            return false;
        }
        std::vector<bool> seen(perm.size(), false);
        for (int p : perm) {
            if (p < 0 || p >= n || seen[p]) {
                return false;
            }
            seen[p] = true;
        }
        return true;
    };
    if (!is_bijection(perm_prev_, full_.rows()) || !is_bijection(perm_curr_, full_.cols())) {
        throw DataError("block permutation is not a bijection");
    }
}

Matrix SimilarityBlocks::original_order() const {
    Matrix out(rows(), cols());
    for (Eigen::Index r = 0; r < rows(); ++r) {
        for (Eigen::Index c = 0; c < cols(); ++c) {
            out(perm_prev_[r], perm_curr_[c]) = full_(r, c);
        }
    }
    return out;
}

SimilarityBlocks partition_similarity(const FrameRecord& prev, const FrameRecord& curr) {
    if (prev.outflow.size() != prev.size() || curr.inflow.size() != curr.size()) {
        throw DataError("label length differs from detection count");
    }
    const int m = shared_count(prev.outflow, curr.inflow);
    auto perm_prev = stable_flag_order(prev.outflow);
    auto perm_curr = stable_flag_order(curr.inflow);

    const auto n_prev = static_cast<Eigen::Index>(prev.size());
    const auto n_curr = static_cast<Eigen::Index>(curr.size());
    Matrix s(n_prev, n_curr);
    for (Eigen::Index r = 0; r < n_prev; ++r) {
        const auto& a = prev.detections[perm_prev[r]].feature();
        for (Eigen::Index c = 0; c < n_curr; ++c) {
            const auto& b = curr.detections[perm_curr[c]].feature();
            if (a.size() != b.size()) {
                throw DataError("feature dimension mismatch");
            }
            s(r, c) = std::clamp(a.dot(b), -1.0, 1.0);
        }
    }
    return SimilarityBlocks(std::move(s), m, std::move(perm_prev), std::move(perm_curr));
}

} // namespace wvic
