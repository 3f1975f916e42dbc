#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wvic/mcp.hpp"
#include "wvic/model.hpp"

namespace wvic {

inline constexpr int kStreamSchema = 1;

/// JSON Lines stream file. Line 1 is the header
///   {"schema":1,"dim":D,"delta":seconds}
/// and every following line one frame
///   {"frame":k,"t":sec,"det":[{"x":..,"y":..,"f":[..],"id":..}],"in":[..],"out":[..]}
/// Keys are written in this fixed order; doubles use the shortest text that
/// parses back to the same value, so parse(write(s)) == s.
void write_stream(const DetectionStream& stream, std::ostream& out);
void write_stream(const DetectionStream& stream, const std::filesystem::path& path);

/// Throws DataError with the 1-based line number of the first bad record.
DetectionStream parse_stream(std::istream& in);
DetectionStream parse_stream(const std::filesystem::path& path);

/// Count report written by `wvic count` and read back by `wvic eval`.
struct CountReportFile {
    std::string video_id;
    int num_frames = 0;
    double delta = 0.0;
    std::optional<std::int64_t> gt_count;
    McpConfig config;
    CountReport report;
};

void write_count_report(const CountReportFile& file, std::ostream& out);
CountReportFile parse_count_report(std::istream& in);
CountReportFile parse_count_report(const std::filesystem::path& path);

} // namespace wvic
