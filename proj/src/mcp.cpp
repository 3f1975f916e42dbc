#include "wvic/mcp.hpp"

#include <algorithm>
#include <cmath>

#include "wvic/assign.hpp"

namespace wvic {

TemplateAggregator parse_aggregator(const std::string& name) {
    if (name == "max") {
        return TemplateAggregator::Max;
    }
    if (name == "min") {
        return TemplateAggregator::Min;
    }
    if (name == "mean") {
        return TemplateAggregator::Mean;
    }
    throw DataError("unknown template aggregator '" + name + "'");
}

std::string to_string(TemplateAggregator aggregator) {
    switch (aggregator) {
    case TemplateAggregator::Max:
        return "max";
    case TemplateAggregator::Min:
        return "min";
    case TemplateAggregator::Mean:
        return "mean";
    }
    return "max";
}

void McpConfig::validate() const {
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
        throw DataError("zeta must be a non-negative finite threshold");
    }
    if (ttlmax < 0) {
        throw DataError("ttlmax must be >= 0");
    }
    if (memmax < 1) {
        throw DataError("memmax must be >= 1");
    }
}

double template_cost(const Vector& feature, const TemplateEntry& entry, TemplateAggregator aggregator) {
    if (entry.templates.empty()) {
        throw DataError("template entry has no templates");
    }
    double acc = aggregator == TemplateAggregator::Min ? 2.0 : 0.0;
    for (const auto& g : entry.templates) {
        if (g.size() != feature.size()) {
            throw DataError("feature dimension mismatch");
        }
        const double cost = std::clamp(1.0 - feature.dot(g), 0.0, 2.0);
        switch (aggregator) {
        case TemplateAggregator::Max:
            acc = std::max(acc, cost);
            break;
        case TemplateAggregator::Min:
            acc = std::min(acc, cost);
            break;
        case TemplateAggregator::Mean:
            acc += cost;
            break;
        }
    }
    if (aggregator == TemplateAggregator::Mean) {
        acc /= static_cast<double>(entry.templates.size());
    }
    return acc;
}

StepResult step(const MemoryState& memory, const std::vector<Detection>& detections, const McpConfig& cfg,
                int frame_index) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(detections.size());
    const auto entries = static_cast<Eigen::Index>(memory.entries.size());

    Matrix cost(n, entries);
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index e = 0; e < entries; ++e) {
            cost(u, e) = template_cost(detections[u].feature(), memory.entries[e], cfg.aggregator);
        }
    }
    const Assignment match = hungarian(cost);

    StepResult out;
    out.report.frame_index = frame_index;
    out.memory.next_entry_id = memory.next_entry_id;

    std::vector<int> det_for_entry(entries, -1);
    std::vector<char> inflow(n, 1);
    for (const auto& [u, e] : match.pairs) {
        if (cost(u, e) <= cfg.zeta) {
            det_for_entry[e] = u;
            inflow[u] = 0;
        }
    }

    for (Eigen::Index e = 0; e < entries; ++e) {
        TemplateEntry entry = memory.entries[e];
        const int u = det_for_entry[e];
        if (u >= 0) {
            entry.templates.push_back(detections[u].feature());
            while (static_cast<int>(entry.templates.size()) > cfg.memmax) {
                entry.templates.pop_front();
            }
            entry.ttl = cfg.ttlmax;
            out.report.associations.emplace_back(u, entry.entry_id);
        } else if (entry.ttl > 0) {
            --entry.ttl;
        } else {
            continue;  // unseen for more than ttlmax steps
        }
        out.memory.entries.push_back(std::move(entry));
    }
    std::sort(out.report.associations.begin(), out.report.associations.end());

    for (Eigen::Index u = 0; u < n; ++u) {
        if (!inflow[u]) {
            continue;
        }
        TemplateEntry entry;
        entry.entry_id = out.memory.next_entry_id++;
        entry.templates.push_back(detections[u].feature());
        entry.ttl = cfg.ttlmax;
        out.report.new_entry_ids.push_back(entry.entry_id);
        out.memory.entries.push_back(std::move(entry));
        ++out.report.inflow_count;
    }
    return out;
}

CountReport count_video(const DetectionStream& stream, const McpConfig& cfg) {
    cfg.validate();
    CountReport report;
    MemoryState memory;
    for (const auto& frame : stream.frames) {
        auto result = step(memory, frame.detections, cfg, frame.frame_index);
        report.total += result.report.inflow_count;
        report.per_step.push_back(std::move(result.report));
        memory = std::move(result.memory);
    }
    return report;
}

} // namespace wvic
