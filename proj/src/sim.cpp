#include "wvic/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

namespace wvic {

void SimConfig::validate() const {
    if (num_identities < 0) {
        throw DataError("num_identities must be >= 0");
    }
    if (num_frames < 1) {
        throw DataError("num_frames must be >= 1");
    }
    if (feature_dim < 2) {
        throw DataError("feature_dim must be >= 2");
    }
    if (!(delta > 0.0)) {
        throw DataError("delta must be positive");
    }
    if (!(feature_noise_sigma >= 0.0) || !(walk_step_sigma >= 0.0)) {
        throw DataError("noise scales must be non-negative");
    }
    if (!(reentry_probability >= 0.0 && reentry_probability <= 1.0)) {
        throw DataError("reentry_probability must lie in [0, 1]");
    }
    if (max_absence_steps < 1) {
        throw DataError("max_absence_steps must be >= 1");
    }
    if (!(max_base_similarity > 0.0)) {
        throw DataError("max_base_similarity must be positive");
    }
    if (!(scene_width > 0.0 && scene_height > 0.0)) {
        throw DataError("scene size must be positive");
    }
}

WeakLabels derive_weak_labels(std::span<const std::int64_t> prev_ids, std::span<const std::int64_t> curr_ids) {
    const std::unordered_set<std::int64_t> prev(prev_ids.begin(), prev_ids.end());
    const std::unordered_set<std::int64_t> curr(curr_ids.begin(), curr_ids.end());
    WeakLabels out;
    for (auto id : curr_ids) {
        out.inflow_curr.push_back(prev.contains(id) ? 0 : 1);
    }
    for (auto id : prev_ids) {
        out.outflow_prev.push_back(curr.contains(id) ? 0 : 1);
    }
    return out;
}

namespace {

std::vector<std::int64_t> ids_of(const FrameRecord& frame) {
    std::vector<std::int64_t> ids;
    ids.reserve(frame.size());
    for (const auto& det : frame.detections) {
        if (!det.gt_id()) {
            throw DataError("frame " + std::to_string(frame.frame_index) + ": detection without gt id");
        }
        ids.push_back(*det.gt_id());
    }
    return ids;
}

Vector random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    do {
        for (int k = 0; k < dim; ++k) {
            v[k] = normal(rng);
        }
    } while (v.norm() == 0.0);
    return v.normalized();
}

std::vector<Vector> base_features(std::mt19937_64& rng, int count, const SimConfig& cfg) {
    constexpr int kMaxAttempts = 100000;
    std::vector<Vector> out;
    out.reserve(count);
    for (int id = 0; id < count; ++id) {
        int attempts = 0;
        for (;;) {
            Vector candidate = random_unit(rng, cfg.feature_dim);
            const bool separated = std::all_of(out.begin(), out.end(), [&](const Vector& other) {
                return std::abs(candidate.dot(other)) < cfg.max_base_similarity;
            });
            if (separated) {
                out.push_back(std::move(candidate));
                break;
            }
            if (++attempts >= kMaxAttempts) {
                throw DataError("cannot place " + std::to_string(count) + " base features below similarity " +
                                std::to_string(cfg.max_base_similarity));
            }
        }
    }
    return out;
}

PresenceSpans draw_lifespan(std::mt19937_64& rng, const SimConfig& cfg) {
    if (cfg.entry_exit_model == EntryExitModel::Persistent) {
        return {{1, cfg.num_frames}};
    }
    std::uniform_int_distribution<int> frame(1, cfg.num_frames);
    int t_in = frame(rng);
    int t_out = frame(rng);
    if (t_in > t_out) {
        std::swap(t_in, t_out);
    }
    std::bernoulli_distribution reenter(cfg.reentry_probability);
    if (!reenter(rng) || t_out - t_in < 2) {
        return {{t_in, t_out}};
    }
    const int longest = std::min(cfg.max_absence_steps, t_out - t_in - 1);
    const int gap = std::uniform_int_distribution<int>(1, longest)(rng);
    const int gap_start = std::uniform_int_distribution<int>(t_in + 1, t_out - gap)(rng);
    return {{t_in, gap_start - 1}, {gap_start + gap, t_out}};
}

} // namespace

void label_from_gt(DetectionStream& stream) {
    auto& frames = stream.frames;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        frames[k].inflow.assign(frames[k].size(), 1);
        frames[k].outflow.assign(frames[k].size(), 1);
    }
    for (std::size_t k = 1; k < frames.size(); ++k) {
        auto labels = derive_weak_labels(ids_of(frames[k - 1]), ids_of(frames[k]));
        frames[k].inflow = std::move(labels.inflow_curr);
        frames[k - 1].outflow = std::move(labels.outflow_prev);
    }
}

DetectionStream generate_scene(const SimConfig& cfg) {
    cfg.validate();
    // schedule draws use a stream separate from rendering so that the same
    // seed yields the same lifespans regardless of feature dimension
    std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dULL);
    std::vector<PresenceSpans> schedule;
    schedule.reserve(cfg.num_identities);
    for (int id = 0; id < cfg.num_identities; ++id) {
        schedule.push_back(draw_lifespan(rng, cfg));
    }
    return generate_scene(cfg, schedule);
}

DetectionStream generate_scene(const SimConfig& cfg, const std::vector<PresenceSpans>& schedule) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const int identities = static_cast<int>(schedule.size());
    const auto bases = base_features(rng, identities, cfg);

    std::uniform_real_distribution<double> ux(0.0, cfg.scene_width);
    std::uniform_real_distribution<double> uy(0.0, cfg.scene_height);
    std::vector<Point2> position(identities);
    for (auto& p : position) {
        p = {ux(rng), uy(rng)};
    }

    std::normal_distribution<double> step(0.0, 1.0);
    DetectionStream stream;
    stream.delta = cfg.delta;
    for (int f = 1; f <= cfg.num_frames; ++f) {
        FrameRecord frame;
        frame.frame_index = f;
        frame.timestamp = (f - 1) * cfg.delta;
        for (int id = 0; id < identities; ++id) {
            auto& p = position[id];
            if (f > 1) {
                p.x = std::clamp(p.x + cfg.walk_step_sigma * step(rng), 0.0, cfg.scene_width);
                p.y = std::clamp(p.y + cfg.walk_step_sigma * step(rng), 0.0, cfg.scene_height);
            }
            const bool present = std::any_of(schedule[id].begin(), schedule[id].end(),
                                             [f](const auto& span) { return span.first <= f && f <= span.second; });
            if (!present) {
                continue;
            }
            Vector observed = bases[id];
            if (cfg.feature_noise_sigma > 0.0) {
                for (Eigen::Index k = 0; k < observed.size(); ++k) {
                    observed[k] += cfg.feature_noise_sigma * step(rng);
                }
            }
            frame.detections.emplace_back(p, observed, id);
        }
        std::shuffle(frame.detections.begin(), frame.detections.end(), rng);
        stream.frames.push_back(std::move(frame));
    }
    label_from_gt(stream);
    return stream;
}

std::int64_t gt_unique_count(const DetectionStream& stream) {
    std::set<std::int64_t> ids;
    for (const auto& frame : stream.frames) {
        for (auto id : ids_of(frame)) {
            ids.insert(id);
        }
    }
    return static_cast<std::int64_t>(ids.size());
}

} // namespace wvic

namespace wvic {

SimilarityBlocks random_similarity_blocks(std::mt19937_64& rng, int rows, int cols, int shared, int dim,
                                          double noise) {
    if (shared < 0 || shared > rows || shared > cols || dim < 1) {
        throw DataError("invalid random block shape");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> prev, curr;
    for (int r = 0; r < rows; ++r) {
        prev.push_back(random_unit(rng, dim));
    }
    std::vector<int> partner(shared);
    for (int k = 0; k < shared; ++k) {
        partner[k] = k;
    }
    std::shuffle(partner.begin(), partner.end(), rng);
    for (int c = 0; c < cols; ++c) {
        if (c < shared) {
            Vector v = prev[partner[c]];
            for (int k = 0; k < dim; ++k) {
                v[k] += noise * normal(rng);
            }
            curr.push_back(normalize_feature(v));
        } else {
            curr.push_back(random_unit(rng, dim));
        }
    }
    Matrix s(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            s(r, c) = prev[r].dot(curr[c]);
        }
    }
    std::vector<int> perm_prev(rows), perm_curr(cols);
    for (int r = 0; r < rows; ++r) {
        perm_prev[r] = r;
    }
    for (int c = 0; c < cols; ++c) {
        perm_curr[c] = c;
    }
    return SimilarityBlocks(std::move(s), shared, std::move(perm_prev), std::move(perm_curr));
}

} // namespace wvic
