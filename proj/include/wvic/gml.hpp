#pragma once

#include <utility>
#include <vector>

#include "wvic/assign.hpp"
#include "wvic/model.hpp"

namespace wvic {

/// Soft m x m matching between the shared groups of a frame pair.
struct TransportPlan {
    Matrix omega;
    bool converged = false;
    int iterations_used = 0;
    double marginal_error = 0.0;  // max |row/col sum - 1| at exit

    bool empty() const { return omega.size() == 0; }
};

struct LossConfig {
    /// Multiplicative scale applied to similarities inside the exponent (1/gamma).
    double temperature = 10.0;
    double hinge_threshold = 0.1;
    double sinkhorn_reg = 0.05;
    int sinkhorn_max_iters = 500;
    double sinkhorn_tol = 1e-6;

    /// Throws DataError on out-of-range fields.
    void validate() const;
};

/// Contrastive similarity of every shared pair. For u, v < m:
///
///   C(u,v) = e(u,v) / (sum_u' e(u',v) + sum_v' e(u,v') - e(u,v)),  e = exp(t * S)
///
/// where the sums run over the full similarity matrix, so the outflow and
/// inflow rows/columns act as negatives. Throws DataError("no shared
/// individuals") when m = 0.
Matrix contrastive_similarity(const SimilarityBlocks& blocks, double temperature);

/// Entropic balanced OT between uniform unit marginals, log-domain updates.
/// Throws NumericalError("invalid cost matrix") on non-finite input.
TransportPlan sinkhorn(const Matrix& cost, double reg, int max_iters, double tol);

/// Nearest permutation to a soft plan: greedy row argmax, falling back to a
/// maximum-weight assignment when two rows claim the same column.
/// Returns perm with perm[row] = col.
std::vector<int> round_to_permutation(const Matrix& omega);

struct ContrastiveLoss {
    double loss = 0.0;  // raw / m
    double raw = 0.0;   // -sum(Omega .* C)
    TransportPlan plan;
};

ContrastiveLoss soft_contrastive_loss(const SimilarityBlocks& blocks, const LossConfig& cfg);

/// Contrastive loss with the latent plan replaced by a known association
/// (permutation on the m shared rows), normalized by m.
double supervised_contrastive_loss(const SimilarityBlocks& blocks, const std::vector<int>& association,
                                   const LossConfig& cfg);

/// Mean of max(0, s3 - theta); 0 for an empty block.
double hinge_loss(const Matrix& s3, double theta);

struct PairLoss {
    double contrastive = 0.0;
    double hinge = 0.0;
    double total() const { return contrastive + hinge; }
};

PairLoss pair_loss(const SimilarityBlocks& blocks, const LossConfig& cfg);

/// Sum over frame pairs of (normalized contrastive loss + hinge loss).
double gml_loss(const std::vector<SimilarityBlocks>& pairs, const LossConfig& cfg);

/// Normalized contrastive loss for a fixed plan plus the hinge loss.
double frozen_plan_loss(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg);

/// Gradient of frozen_plan_loss with respect to every entry of blocks.full()
/// (block order), with omega held at the converged Sinkhorn plan.
Matrix loss_gradient(const SimilarityBlocks& blocks, const LossConfig& cfg);
Matrix loss_gradient(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg);

/// Central finite differences of frozen_plan_loss over every entry of the
/// full similarity matrix.
Matrix finite_difference_gradient(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg,
                                  double step = 1e-5);

/// Entrywise |a - b| / max(|a|, |b|, floor), maximized over the matrix.
double max_relative_error(const Matrix& a, const Matrix& b, double floor = 1e-8);

struct PairMatching {
    int prev_frame = 0;  // frame_index values
    int curr_frame = 0;
    std::vector<std::pair<int, int>> matches;  // (detection in prev, detection in curr), original order
};

struct PseudoTrajectory {
    int id = 0;
    std::vector<std::pair<int, int>> points;  // (frame_index, detection index)
};

struct PseudoTrajectories {
    std::vector<PairMatching> pairs;
    std::vector<PseudoTrajectory> trajectories;
};

/// Pseudo trajectory labels: per adjacent pair, solve the transport plan and
/// take a one-to-one match on (1 - Omega); chain matches across pairs. Each
/// trajectory id is its first appearance order.
PseudoTrajectories pseudo_trajectories(const DetectionStream& stream, const LossConfig& cfg);

} // namespace wvic
