#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wvic/model.hpp"

namespace wvic {

enum class EntryExitModel {
    Uniform,     // lifespan [t_in, t_out] drawn uniformly over the frame range
    Persistent,  // every identity is present in every frame
};

struct SimConfig {
    int num_identities = 20;
    int num_frames = 30;
    double delta = 3.0;
    int feature_dim = 64;
    double feature_noise_sigma = 0.0;
    EntryExitModel entry_exit_model = EntryExitModel::Uniform;
    /// Chance that an identity leaves mid-lifespan and comes back.
    double reentry_probability = 0.0;
    /// Longest absence (in sampled steps) of a re-entering identity.
    int max_absence_steps = 3;
    /// Base features are resampled until every pairwise |cosine| is below this.
    double max_base_similarity = 1.0;
    double scene_width = 1920.0;
    double scene_height = 1080.0;
    double walk_step_sigma = 15.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Inclusive 1-based frame ranges in which one identity is visible.
using PresenceSpans = std::vector<std::pair<int, int>>;

struct WeakLabels {
    BitVector inflow_curr;
    BitVector outflow_prev;
};

/// inflow(u) = 1 iff curr detection u's id is absent from prev;
/// outflow(u) = 1 iff prev detection u's id is absent from curr.
WeakLabels derive_weak_labels(std::span<const std::int64_t> prev_ids, std::span<const std::int64_t> curr_ids);

/// Rewrites every frame's inflow/outflow bits from gt ids. The first frame's
/// inflow and the last frame's outflow are all ones.
void label_from_gt(DetectionStream& stream);

/// Seeded scene: identities with base unit features, random-walk positions,
/// noisy observed features and weak labels derived from gt ids.
DetectionStream generate_scene(const SimConfig& cfg);

/// Same as generate_scene but with caller-provided presence spans, one entry
/// per identity (cfg.num_identities is ignored).
DetectionStream generate_scene(const SimConfig& cfg, const std::vector<PresenceSpans>& schedule);

/// Number of distinct gt ids in the stream. Throws DataError if any detection lacks one.
std::int64_t gt_unique_count(const DetectionStream& stream);

} // namespace wvic

#include <random>

namespace wvic {

/// Similarity blocks of two random frames of unit features in `dim`
/// dimensions: `rows` x `cols` with `shared` shared individuals. Shared pairs
/// are correlated (curr feature = prev feature + noise of scale `noise`).
SimilarityBlocks random_similarity_blocks(std::mt19937_64& rng, int rows, int cols, int shared, int dim,
                                          double noise = 0.5);

} // namespace wvic
