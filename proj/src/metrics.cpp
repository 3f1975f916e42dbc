#include "wvic/metrics.hpp"

#include <cmath>

#include "wvic/error.hpp"

namespace wvic {

namespace {

void require_nonempty(std::span<const VideoResult> results) {
    if (results.empty()) {
        throw DataError("no video results");
    }
}

} // namespace

double mae(std::span<const VideoResult> results) {
    require_nonempty(results);
    double sum = 0.0;
    for (const auto& r : results) {
        sum += std::abs(r.gt_count - r.pred_count);
    }
    return sum / static_cast<double>(results.size());
}

double mse(std::span<const VideoResult> results) {
    require_nonempty(results);
    double sum = 0.0;
    for (const auto& r : results) {
        const double e = r.gt_count - r.pred_count;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(results.size()));
}

double wrae(std::span<const VideoResult> results) {
    require_nonempty(results);
    double total_length = 0.0;
    double weighted = 0.0;
    for (const auto& r : results) {
        if (!(r.gt_count >= 1.0)) {
            throw DataError("video '" + r.video_id + "' has ground-truth count below 1");
        }
        if (!(r.length > 0.0)) {
            throw DataError("video '" + r.video_id + "' has non-positive length");
        }
        total_length += r.length;
        weighted += r.length * std::abs(r.gt_count - r.pred_count) / r.gt_count;
    }
    return 100.0 * (weighted / total_length);
}

} // namespace wvic
