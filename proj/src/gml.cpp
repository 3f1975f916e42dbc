#include "wvic/gml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace wvic {

void LossConfig::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw DataError("temperature must be positive");
    }
    if (!(hinge_threshold >= 0.0 && hinge_threshold < 1.0)) {
        throw DataError("hinge threshold must lie in [0, 1)");
    }
    if (!(sinkhorn_reg > 0.0) || !std::isfinite(sinkhorn_reg)) {
        throw DataError("sinkhorn regularization must be positive");
    }
    if (sinkhorn_max_iters < 1) {
        throw DataError("sinkhorn iteration budget must be >= 1");
    }
    if (!(sinkhorn_tol > 0.0)) {
        throw DataError("sinkhorn tolerance must be positive");
    }
}

namespace {

// log of the denominator of C(u,v) for every shared pair, computed from
// per-row and per-column log-sum-exps of t*S.
struct LogDenominators {
    Matrix log_den;  // m x m
    Matrix log_num;  // m x m, t * S(u,v)
};

double log_sub_exp(double a, double b) {
    // log(exp(a) - exp(b)) for a >= b
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    return a + std::log1p(-std::exp(b - a));
}

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) {
        return hi;
    }
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

LogDenominators log_denominators(const SimilarityBlocks& blocks, double temperature) {
    const int m = blocks.shared();
    if (m == 0) {
        throw DataError("no shared individuals");
    }
    const Matrix z = temperature * blocks.full();
    Vector row_lse(m), col_lse(m);
    for (int u = 0; u < m; ++u) {
        const double hi = z.row(u).maxCoeff();
        row_lse[u] = hi + std::log((z.row(u).array() - hi).exp().sum());
    }
    for (int v = 0; v < m; ++v) {
        const double hi = z.col(v).maxCoeff();
        col_lse[v] = hi + std::log((z.col(v).array() - hi).exp().sum());
    }
    LogDenominators out{Matrix(m, m), z.topLeftCorner(m, m)};
    for (int u = 0; u < m; ++u) {
        for (int v = 0; v < m; ++v) {
            // row sum + column sum counts e(u,v) twice; drop one copy. The
            // subtraction is taken from the larger of the two sums, which
            // always contains e(u,v), so no cancellation below log(e(u,v)).
            const double a = row_lse[u];
            const double b = col_lse[v];
            const double zuv = z(u, v);
            out.log_den(u, v) = a >= b ? log_add_exp(log_sub_exp(a, zuv), b) : log_add_exp(a, log_sub_exp(b, zuv));
        }
    }
    return out;
}

double logsumexp(const Eigen::Ref<const Vector>& x) {
    const double hi = x.maxCoeff();
    if (!std::isfinite(hi)) {
        return hi;
    }
    return hi + std::log((x.array() - hi).exp().sum());
}

} // namespace

Matrix contrastive_similarity(const SimilarityBlocks& blocks, double temperature) {
    const auto d = log_denominators(blocks, temperature);
    return (d.log_num - d.log_den).array().exp().min(1.0).matrix();
}

namespace {

// Entropic OT dual in scaled potentials (a, b) = (f, g) / reg with log kernel
// K = -cost / reg. The plan is P = exp(K + a 1' + 1 b'), and the dual
//   psi(a, b) = sum(a) + sum(b) - sum(P)
// is maximized exactly when P has unit row and column sums.
class EntropicDual {
public:
    explicit EntropicDual(Matrix log_kernel)
        : k_(std::move(log_kernel)), a_(Vector::Zero(k_.rows())), b_(Vector::Zero(k_.rows())), buffer_(k_.rows()) {}

    Eigen::Index size() const { return k_.rows(); }

    void update_rows() {
        for (Eigen::Index u = 0; u < size(); ++u) {
            buffer_ = k_.row(u).transpose() + b_;
            a_[u] = -logsumexp(buffer_);
        }
    }

    void update_cols() {
        for (Eigen::Index v = 0; v < size(); ++v) {
            buffer_ = k_.col(v) + a_;
            b_[v] = -logsumexp(buffer_);
        }
    }

    Matrix plan() const { return ((k_.colwise() + a_).rowwise() + b_.transpose()).array().exp().matrix(); }

    double objective(const Vector& a, const Vector& b) const {
        const double mass = ((k_.colwise() + a).rowwise() + b.transpose()).array().exp().sum();
        return a.sum() + b.sum() - mass;
    }

    static double marginal_error(const Matrix& p) {
        const double rows = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
        const double cols = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
        return std::max(rows, cols);
    }

    // One damped Newton ascent step on psi. The last column potential is held
    // fixed to remove the (a + s, b - s) null direction. Returns false when no
    // ascent step could be taken.
    bool newton_step() {
        const Eigen::Index m = size();
        const Matrix p = plan();
        const Vector r = p.rowwise().sum();
        const Vector c = p.colwise().sum().transpose();
        const Eigen::Index n = 2 * m - 1;
        Matrix h = Matrix::Zero(n, n);
        Vector grad(n);
        h.topLeftCorner(m, m).diagonal() = r;
        h.block(0, m, m, m - 1) = p.leftCols(m - 1);
        h.block(m, 0, m - 1, m) = p.leftCols(m - 1).transpose();
        h.bottomRightCorner(m - 1, m - 1).diagonal() = c.head(m - 1);
        grad.head(m) = Vector::Ones(m) - r;
        grad.tail(m - 1) = Vector::Ones(m - 1) - c.head(m - 1);
        h.diagonal().array() += 1e-12 * std::max(1.0, h.diagonal().maxCoeff());

        const Vector step = h.ldlt().solve(grad);
        if (!step.allFinite()) {
            return false;
        }
        const double slope = grad.dot(step);
        if (!(slope > 0.0)) {
            return false;
        }
        const double base = objective(a_, b_);
        double t = 1.0;
        for (int tries = 0; tries < 40; ++tries, t *= 0.5) {
            Vector a = a_ + t * step.head(m);
            Vector b = b_;
            b.head(m - 1) += t * step.tail(m - 1);
            const double value = objective(a, b);
            if (std::isfinite(value) && value >= base + 1e-4 * t * slope) {
                a_ = std::move(a);
                b_ = std::move(b);
                return true;
            }
        }
        return false;
    }

private:
    Matrix k_;
    Vector a_;
    Vector b_;
    Vector buffer_;
};

// Plain scaling iterations run first; if they stall, Newton steps on the same
// dual take over. Both share the fixed point.
constexpr int kScalingIters = 200;

} // namespace

TransportPlan sinkhorn(const Matrix& cost, double reg, int max_iters, double tol) {
    if (cost.rows() != cost.cols()) {
        throw DataError("sinkhorn expects a square cost matrix");
    }
    if (!cost.allFinite()) {
        throw NumericalError("invalid cost matrix");
    }
    if (!(reg > 0.0) || max_iters < 1 || !(tol > 0.0)) {
        throw DataError("invalid sinkhorn parameters");
    }
    TransportPlan plan;
    if (cost.rows() == 0) {
        plan.converged = true;
        return plan;
    }

    EntropicDual dual(-cost / reg);
    double err = std::numeric_limits<double>::infinity();
    int it = 0;
    bool newton = false;
    while (it < max_iters) {
        ++it;
        if (newton && !dual.newton_step()) {
            newton = false;  // fall back to scaling for this iteration
        }
        dual.update_rows();
        dual.update_cols();
        err = EntropicDual::marginal_error(dual.plan());
        if (err < tol) {
            break;
        }
        if (it >= kScalingIters && dual.size() > 1) {
            newton = true;
        }
    }

    plan.omega = dual.plan().array().min(1.0).matrix();
    if (!plan.omega.allFinite()) {
        throw NumericalError("sinkhorn produced non-finite plan");
    }
    plan.marginal_error = EntropicDual::marginal_error(plan.omega);
    plan.iterations_used = it;
    plan.converged = plan.marginal_error < tol;
    return plan;
}

std::vector<int> round_to_permutation(const Matrix& omega) {
    const auto m = static_cast<int>(omega.rows());
    std::vector<int> perm(m);
    std::vector<char> claimed(omega.cols(), 0);
    bool conflict = false;
    for (int u = 0; u < m; ++u) {
        Eigen::Index best = 0;
        omega.row(u).maxCoeff(&best);
        perm[u] = static_cast<int>(best);
        conflict = conflict || claimed[best];
        claimed[best] = 1;
    }
    if (!conflict) {
        return perm;
    }
    const Assignment a = hungarian(-omega);
    for (const auto& [r, c] : a.pairs) {
        perm[r] = c;
    }
    return perm;
}

ContrastiveLoss soft_contrastive_loss(const SimilarityBlocks& blocks, const LossConfig& cfg) {
    cfg.validate();
    ContrastiveLoss out;
    const int m = blocks.shared();
    if (m == 0) {
        out.plan.converged = true;
        return out;
    }
    const Matrix c = contrastive_similarity(blocks, cfg.temperature);
    const Matrix cost = Matrix::Ones(m, m) - c;
    out.plan = sinkhorn(cost, cfg.sinkhorn_reg, cfg.sinkhorn_max_iters, cfg.sinkhorn_tol);
    out.raw = -(out.plan.omega.array() * c.array()).sum();
    out.loss = out.raw / m;
    return out;
}

double supervised_contrastive_loss(const SimilarityBlocks& blocks, const std::vector<int>& association,
                                   const LossConfig& cfg) {
    cfg.validate();
    const int m = blocks.shared();
    if (static_cast<int>(association.size()) != m) {
        throw DataError("association length differs from shared count");
    }
    std::vector<char> seen(m, 0);
    for (int v : association) {
        if (v < 0 || v >= m || seen[v]) {
            throw DataError("association is not a bijection");
        }
        seen[v] = 1;
    }
    if (m == 0) {
        return 0.0;
    }
    const Matrix c = contrastive_similarity(blocks, cfg.temperature);
    double sum = 0.0;
    for (int u = 0; u < m; ++u) {
        sum += c(u, association[u]);
    }
    return -sum / m;
}

double hinge_loss(const Matrix& s3, double theta) {
    if (s3.size() == 0) {
        return 0.0;
    }
    return (s3.array() - theta).max(0.0).sum() / static_cast<double>(s3.size());
}

PairLoss pair_loss(const SimilarityBlocks& blocks, const LossConfig& cfg) {
    return PairLoss{soft_contrastive_loss(blocks, cfg).loss, hinge_loss(blocks.s3(), cfg.hinge_threshold)};
}

double gml_loss(const std::vector<SimilarityBlocks>& pairs, const LossConfig& cfg) {
    double total = 0.0;
    for (const auto& blocks : pairs) {
        total += pair_loss(blocks, cfg).total();
    }
    return total;
}

double frozen_plan_loss(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg) {
    const int m = blocks.shared();
    double contrastive = 0.0;
    if (m > 0) {
        if (omega.rows() != m || omega.cols() != m) {
            throw DataError("plan size differs from shared count");
        }
        const Matrix c = contrastive_similarity(blocks, cfg.temperature);
        contrastive = -(omega.array() * c.array()).sum() / m;
    }
    return contrastive + hinge_loss(blocks.s3(), cfg.hinge_threshold);
}

Matrix loss_gradient(const SimilarityBlocks& blocks, const LossConfig& cfg) {
    const auto plan = soft_contrastive_loss(blocks, cfg).plan;
    return loss_gradient(blocks, plan.omega, cfg);
}

Matrix loss_gradient(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg) {
    cfg.validate();
    const int m = blocks.shared();
    const Eigen::Index rows = blocks.rows();
    const Eigen::Index cols = blocks.cols();
    if (m == 0) {
        throw DataError("no shared individuals");
    }
    if (omega.rows() != m || omega.cols() != m) {
        throw DataError("plan size differs from shared count");
    }
    const double t = cfg.temperature;
    const auto d = log_denominators(blocks, t);
    const Matrix c = (d.log_num - d.log_den).array().exp().matrix();
    const Matrix weight = omega.cwiseProduct(c);  // Omega .* C

    // Contribution of a perturbed entry S(a,b) through the denominators:
    //   - t * e(a,b) * (sum_u W(u,b) [b<m] + sum_v W(a,v) [a<m] - W(a,b) [a,b<m])
    // with W = Omega .* C / D. Every e(a,b)/D(u,v) ratio is taken in log space.
    const Matrix z = t * blocks.full();
    Matrix grad = Matrix::Zero(rows, cols);
    for (Eigen::Index a = 0; a < rows; ++a) {
        for (Eigen::Index b = 0; b < cols; ++b) {
            double acc = 0.0;
            if (b < m) {
                for (int u = 0; u < m; ++u) {
                    if (u != a) {
                        acc += weight(u, b) * std::exp(z(a, b) - d.log_den(u, b));
                    }
                }
            }
            if (a < m) {
                for (int v = 0; v < m; ++v) {
                    if (v != b) {
                        acc += weight(a, v) * std::exp(z(a, b) - d.log_den(a, v));
                    }
                }
            }
            double g = -t * acc;
            if (a < m && b < m) {
                g += t * weight(a, b) * (1.0 - c(a, b));
            }
            grad(a, b) = -g / m;
        }
    }

    const Eigen::Index n3 = (rows - m) * (cols - m);
    if (n3 > 0) {
        for (Eigen::Index a = m; a < rows; ++a) {
            for (Eigen::Index b = m; b < cols; ++b) {
                if (blocks.full()(a, b) > cfg.hinge_threshold) {
                    grad(a, b) += 1.0 / static_cast<double>(n3);
                }
            }
        }
    }
    return grad;
}

Matrix finite_difference_gradient(const SimilarityBlocks& blocks, const Matrix& omega, const LossConfig& cfg,
                                  double step) {
    Matrix grad(blocks.rows(), blocks.cols());
    for (Eigen::Index a = 0; a < blocks.rows(); ++a) {
        for (Eigen::Index b = 0; b < blocks.cols(); ++b) {
            Matrix plus = blocks.full();
            Matrix minus = blocks.full();
            plus(a, b) += step;
            minus(a, b) -= step;
            const SimilarityBlocks bp(plus, blocks.shared(), blocks.perm_prev(), blocks.perm_curr());
            const SimilarityBlocks bm(minus, blocks.shared(), blocks.perm_prev(), blocks.perm_curr());
            grad(a, b) = (frozen_plan_loss(bp, omega, cfg) - frozen_plan_loss(bm, omega, cfg)) / (2.0 * step);
        }
    }
    return grad;
}

double max_relative_error(const Matrix& a, const Matrix& b, double floor) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DataError("gradient shapes differ");
    }
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double x = a.data()[k];
        const double y = b.data()[k];
        const double scale = std::max({std::abs(x), std::abs(y), floor});
        worst = std::max(worst, std::abs(x - y) / scale);
    }
    return worst;
}

PseudoTrajectories pseudo_trajectories(const DetectionStream& stream, const LossConfig& cfg) {
    cfg.validate();
    PseudoTrajectories out;
    // trajectory id of each detection in the previous frame
    std::vector<int> prev_ids;
    auto open_trajectory = [&](int frame_index, int det) {
        const int id = static_cast<int>(out.trajectories.size());
        out.trajectories.push_back(PseudoTrajectory{id, {{frame_index, det}}});
        return id;
    };

    for (std::size_t k = 0; k < stream.frames.size(); ++k) {
        const auto& curr = stream.frames[k];
        std::vector<int> curr_ids(curr.size(), -1);
        if (k > 0) {
            const auto& prev = stream.frames[k - 1];
            const auto blocks = partition_similarity(prev, curr);
            PairMatching pm{prev.frame_index, curr.frame_index, {}};
            const int m = blocks.shared();
            if (m > 0) {
                const auto loss = soft_contrastive_loss(blocks, cfg);
                const Matrix cost = Matrix::Ones(m, m) - loss.plan.omega;
                const Assignment a = hungarian(cost);
                for (const auto& [r, c] : a.pairs) {
                    pm.matches.emplace_back(blocks.perm_prev()[r], blocks.perm_curr()[c]);
                }
                std::sort(pm.matches.begin(), pm.matches.end());
            }
            for (const auto& [p, c] : pm.matches) {
                const int id = prev_ids[p];
                curr_ids[c] = id;
                out.trajectories[id].points.emplace_back(curr.frame_index, c);
            }
            out.pairs.push_back(std::move(pm));
        }
        for (std::size_t d = 0; d < curr.size(); ++d) {
            if (curr_ids[d] < 0) {
                curr_ids[d] = open_trajectory(curr.frame_index, static_cast<int>(d));
            }
        }
        prev_ids = std::move(curr_ids);
    }
    return out;
}

} // namespace wvic
