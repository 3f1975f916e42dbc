#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "wvic/error.hpp"
#include "wvic/metrics.hpp"

using namespace wvic;

namespace {

std::vector<VideoResult> results(std::vector<double> lengths, std::vector<double> gt, std::vector<double> pred) {
    std::vector<VideoResult> out;
    for (std::size_t k = 0; k < gt.size(); ++k) {
        out.push_back({"v" + std::to_string(k), lengths[k], gt[k], pred[k], ""});
    }
    return out;
}

} // namespace

TEST(Metrics, PerfectPredictions) {
    const auto r = results({5, 7}, {10, 20}, {10, 20});
    EXPECT_EQ(mae(r), 0.0);
    EXPECT_EQ(mse(r), 0.0);
    EXPECT_EQ(wrae(r), 0.0);
}

TEST(Metrics, SingleVideo) {
    const auto r = results({4}, {10}, {13});
    EXPECT_EQ(mae(r), 3.0);
    EXPECT_EQ(mse(r), 3.0);
    EXPECT_DOUBLE_EQ(wrae(r), 30.0);
}

TEST(Metrics, TwoVideoHandExample) {
    const auto r = results({10, 30}, {100, 200}, {90, 210});
    EXPECT_EQ(mae(r), 10.0);
    EXPECT_EQ(mse(r), 10.0);
    EXPECT_EQ(wrae(r), 6.25);
}

TEST(Metrics, Errors) {
    EXPECT_THROW(mae({}), DataError);
    EXPECT_THROW(mse({}), DataError);
    EXPECT_THROW(wrae({}), DataError);
    EXPECT_THROW(wrae(results({1}, {0}, {1})), DataError);
}

TEST(Metrics, WraeScaleInvariantConvexCombination) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> len(1, 100), cnt(1, 300);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 9;
        std::vector<double> t, n, p;
        for (int i = 0; i < k; ++i) {
            t.push_back(len(rng));
            n.push_back(std::round(cnt(rng)));
            p.push_back(std::round(cnt(rng)));
        }
        const auto r = results(t, n, p);
        const double base = wrae(r);
        auto scaled = r;
        const double factor = len(rng);
        for (auto& v : scaled) {
            v.length *= factor;
        }
        EXPECT_NEAR(wrae(scaled), base, 1e-9 * std::max(1.0, base));

        double lo = 1e300, hi = 0.0;
        for (const auto& v : r) {
            const double rel = 100.0 * std::abs(v.gt_count - v.pred_count) / v.gt_count;
            lo = std::min(lo, rel);
            hi = std::max(hi, rel);
        }
        EXPECT_GE(base, lo - 1e-9);
        EXPECT_LE(base, hi + 1e-9);
        EXPECT_LE(mae(r), mse(r) + 1e-9);
    }
}
