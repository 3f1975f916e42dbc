#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "wvic/model.hpp"

namespace wvic {

enum class TemplateAggregator { Max, Min, Mean };

TemplateAggregator parse_aggregator(const std::string& name);
std::string to_string(TemplateAggregator aggregator);

struct McpConfig {
    double zeta = 0.7;  // matching-cost threshold above which a detection is inflow
    int ttlmax = 3;     // sampled steps an identity may go unseen and still be remembered
    int memmax = 5;     // templates kept per identity
    TemplateAggregator aggregator = TemplateAggregator::Max;

    void validate() const;
};

/// Stored appearance of one remembered identity. Templates are kept oldest
/// first and evicted FIFO once memmax is reached.
struct TemplateEntry {
    std::int64_t entry_id = 0;
    std::deque<Vector> templates;
    int ttl = 0;
};

struct MemoryState {
    std::vector<TemplateEntry> entries;
    std::int64_t next_entry_id = 0;
};

/// Aggregate over the entry's templates of (1 - <f, g>). Result in [0, 2].
double template_cost(const Vector& feature, const TemplateEntry& entry, TemplateAggregator aggregator);

struct StepReport {
    int frame_index = 0;
    int inflow_count = 0;
    std::vector<std::pair<int, std::int64_t>> associations;  // (detection index, entry id)
    std::vector<std::int64_t> new_entry_ids;

    bool operator==(const StepReport&) const = default;
};

struct StepResult {
    MemoryState memory;
    StepReport report;
};

/// One sampled step of the count predictor:
///   1. cost(detection, entry) via template_cost; 2. one-to-one assignment;
///   3. a detection is inflow if unmatched or its matched cost exceeds zeta;
///   4. associated entries receive the detection's feature and ttl = ttlmax;
///   5. other entries age by one step and are forgotten once they have gone
///      unseen for more than ttlmax steps; 6. each inflow opens a new entry.
StepResult step(const MemoryState& memory, const std::vector<Detection>& detections, const McpConfig& cfg,
                int frame_index = 0);

struct CountReport {
    std::vector<StepReport> per_step;
    std::int64_t total = 0;

    bool operator==(const CountReport&) const = default;
};

/// Total unique count of a sampled stream: detections of the first frame plus
/// the inflow of every later step. An empty stream counts 0.
CountReport count_video(const DetectionStream& stream, const McpConfig& cfg);

} // namespace wvic
