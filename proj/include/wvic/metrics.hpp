#pragma once

#include <span>
#include <string>

namespace wvic {

struct VideoResult {
    std::string video_id;
    double length = 1.0;  // T_i, any consistent unit
    double gt_count = 1.0;
    double pred_count = 0.0;
    std::string group;  // optional bucketing key
};

/// Mean absolute count error.
double mae(std::span<const VideoResult> results);

/// Root of the mean squared count error (reported as "MSE" by convention in
/// crowd counting tables).
double mse(std::span<const VideoResult> results);

/// Length-weighted relative absolute error, in percent.
double wrae(std::span<const VideoResult> results);

} // namespace wvic
