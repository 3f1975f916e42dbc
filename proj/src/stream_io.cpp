#include "wvic/stream_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wvic {

using Json = nlohmann::ordered_json;

namespace {

std::string dump(const Json& j) {
    return j.dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

BitVector parse_bits(const Json& j, const char* key) {
    const auto& arr = j.at(key);
    if (!arr.is_array()) {
        throw DataError(std::string("'") + key + "' is not an array");
    }
    BitVector bits;
    bits.reserve(arr.size());
    for (const auto& b : arr) {
        if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
            throw DataError(std::string("'") + key + "' holds a value other than 0/1");
        }
        bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
    }
    return bits;
}

FrameRecord parse_frame(const Json& j, Eigen::Index dim) {
    FrameRecord frame;
    frame.frame_index = j.at("frame").get<int>();
    frame.timestamp = j.at("t").get<double>();
    for (const auto& d : j.at("det")) {
        const auto& f = d.at("f");
        if (!f.is_array() || static_cast<Eigen::Index>(f.size()) != dim) {
            throw DataError("feature length " + std::to_string(f.size()) + " differs from header dim " +
                            std::to_string(dim));
        }
        Vector feature(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            feature[k] = f[k].get<double>();
        }
        std::optional<std::int64_t> id;
        if (d.contains("id") && !d["id"].is_null()) {
            id = d["id"].get<std::int64_t>();
        }
        frame.detections.emplace_back(Point2{d.at("x").get<double>(), d.at("y").get<double>()}, feature, id);
    }
    frame.inflow = parse_bits(j, "in");
    frame.outflow = parse_bits(j, "out");
    if (frame.inflow.size() != frame.size() || frame.outflow.size() != frame.size()) {
        throw DataError("label length differs from detection count");
    }
    return frame;
}

} // namespace

void write_stream(const DetectionStream& stream, std::ostream& out) {
    Json header;
    header["schema"] = kStreamSchema;
    header["dim"] = stream.feature_dim();
    header["delta"] = stream.delta;
    out << dump(header) << '\n';
    for (const auto& frame : stream.frames) {
        Json j;
        j["frame"] = frame.frame_index;
        j["t"] = frame.timestamp;
        Json dets = Json::array();
        for (const auto& det : frame.detections) {
            Json d;
            d["x"] = det.coordinate().x;
            d["y"] = det.coordinate().y;
            d["f"] = std::vector<double>(det.feature().data(), det.feature().data() + det.feature().size());
            if (det.gt_id()) {
                d["id"] = *det.gt_id();
            }
            dets.push_back(std::move(d));
        }
        j["det"] = std::move(dets);
        j["in"] = std::vector<int>(frame.inflow.begin(), frame.inflow.end());
        j["out"] = std::vector<int>(frame.outflow.begin(), frame.outflow.end());
        out << dump(j) << '\n';
    }
    if (!out) {
        throw DataError("write failed");
    }
}

void write_stream(const DetectionStream& stream, const std::filesystem::path& path) {
    auto out = open_out(path);
    try {
        write_stream(stream, out);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

DetectionStream parse_stream(std::istream& in) {
    DetectionStream stream;
    std::string line;
    int line_no = 0;
    Eigen::Index dim = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const Json j = Json::parse(line);
            if (!have_header) {
                const int schema = j.at("schema").get<int>();
                if (schema != kStreamSchema) {
                    throw DataError("unknown schema version " + std::to_string(schema));
                }
                dim = j.at("dim").get<Eigen::Index>();
                stream.delta = j.at("delta").get<double>();
                have_header = true;
            } else {
                stream.frames.push_back(parse_frame(j, dim));
            }
        } catch (const Json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) {
        throw DataError("line 1: missing stream header");
    }
    stream.validate();
    return stream;
}

DetectionStream parse_stream(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return parse_stream(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_count_report(const CountReportFile& file, std::ostream& out) {
    Json j;
    j["schema"] = kStreamSchema;
    j["video"] = file.video_id;
    j["frames"] = file.num_frames;
    j["delta"] = file.delta;
    j["total"] = file.report.total;
    if (file.gt_count) {
        j["gt_count"] = *file.gt_count;
    } else {
        j["gt_count"] = nullptr;
    }
    j["config"] = Json{{"zeta", file.config.zeta},
                       {"ttlmax", file.config.ttlmax},
                       {"memmax", file.config.memmax},
                       {"aggregator", to_string(file.config.aggregator)}};
    Json steps = Json::array();
    for (const auto& s : file.report.per_step) {
        Json assoc = Json::array();
        for (const auto& [det, entry] : s.associations) {
            assoc.push_back(Json::array({det, entry}));
        }
        steps.push_back(Json{{"frame", s.frame_index},
                             {"inflow", s.inflow_count},
                             {"assoc", std::move(assoc)},
                             {"new", s.new_entry_ids}});
    }
    j["steps"] = std::move(steps);
    out << dump(j) << '\n';
}

CountReportFile parse_count_report(std::istream& in) {
    CountReportFile file;
    try {
        const Json j = Json::parse(in);
        if (j.at("schema").get<int>() != kStreamSchema) {
            throw DataError("unknown report schema");
        }
        file.video_id = j.at("video").get<std::string>();
        file.num_frames = j.at("frames").get<int>();
        file.delta = j.at("delta").get<double>();
        file.report.total = j.at("total").get<std::int64_t>();
        if (!j.at("gt_count").is_null()) {
            file.gt_count = j["gt_count"].get<std::int64_t>();
        }
        const auto& c = j.at("config");
        file.config.zeta = c.at("zeta").get<double>();
        file.config.ttlmax = c.at("ttlmax").get<int>();
        file.config.memmax = c.at("memmax").get<int>();
        file.config.aggregator = parse_aggregator(c.at("aggregator").get<std::string>());
        for (const auto& s : j.at("steps")) {
            StepReport step;
            step.frame_index = s.at("frame").get<int>();
            step.inflow_count = s.at("inflow").get<int>();
            for (const auto& a : s.at("assoc")) {
                step.associations.emplace_back(a.at(0).get<int>(), a.at(1).get<std::int64_t>());
            }
            step.new_entry_ids = s.at("new").get<std::vector<std::int64_t>>();
            file.report.per_step.push_back(std::move(step));
        }
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed count report: ") + e.what());
    }
    return file;
}

CountReportFile parse_count_report(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return parse_count_report(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace wvic
