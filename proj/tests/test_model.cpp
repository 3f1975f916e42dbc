#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "wvic/model.hpp"

using namespace wvic;

namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double x : values) {
        v[k++] = x;
    }
    return v;
}

FrameRecord frame_of(std::vector<Vector> features, BitVector inflow, BitVector outflow) {
    FrameRecord f;
    for (auto& v : features) {
        f.detections.emplace_back(Point2{}, v);
    }
    f.inflow = std::move(inflow);
    f.outflow = std::move(outflow);
    return f;
}

Vector random_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector v(dim);
    for (int k = 0; k < dim; ++k) {
        v[k] = n(rng);
    }
    return v;
}

} // namespace

TEST(NormalizeFeature, ThreeFourFive) {
    const Vector out = normalize_feature(vec({3, 4}));
    EXPECT_DOUBLE_EQ(out[0], 0.6);
    EXPECT_DOUBLE_EQ(out[1], 0.8);
}

TEST(NormalizeFeature, AlreadyUnitPassesThrough) {
    const Vector in = vec({1, 0, 0});
    EXPECT_EQ(normalize_feature(in), in);
}

TEST(NormalizeFeature, ZeroVectorIsDegenerate) {
    try {
        normalize_feature(vec({0, 0}));
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "degenerate feature");
    }
}

TEST(NormalizeFeature, UnitNormAndIdempotent) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        const Vector v = random_vector(rng, 1 + k % 17) * std::pow(10.0, k % 7 - 3);
        const Vector once = normalize_feature(v);
        EXPECT_NEAR(once.norm(), 1.0, 1e-12);
        EXPECT_EQ(normalize_feature(once), once);
    }
}

TEST(SharedCount, Consistent) {
    const BitVector out{0, 0, 1}, in{0, 0, 1, 1};
    EXPECT_EQ(shared_count(out, in), 2);
    EXPECT_EQ(shared_count(BitVector{0, 0, 0}, BitVector{0, 0, 0}), 3);
    EXPECT_EQ(shared_count(BitVector{1, 1}, BitVector{1, 1, 1}), 0);
}

TEST(SharedCount, InconsistentLabels) {
    try {
        shared_count(BitVector{0, 0, 1}, BitVector{0, 1, 1});
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "inconsistent weak labels");
    }
}

TEST(PartitionSimilarity, IdenticalSingleIndividual) {
    const auto b = partition_similarity(frame_of({vec({1, 0})}, {1}, {0}), frame_of({vec({1, 0})}, {0}, {1}));
    EXPECT_EQ(b.shared(), 1);
    ASSERT_EQ(b.s0().rows(), 1);
    EXPECT_DOUBLE_EQ(b.s0()(0, 0), 1.0);
    EXPECT_EQ(b.s1().size(), 0);
    EXPECT_EQ(b.s2().size(), 0);
    EXPECT_EQ(b.s3().size(), 0);
}

TEST(PartitionSimilarity, OrthogonalSingleIndividual) {
    const auto b = partition_similarity(frame_of({vec({1, 0})}, {1}, {0}), frame_of({vec({0, 1})}, {0}, {1}));
    EXPECT_DOUBLE_EQ(b.s0()(0, 0), 0.0);
}

TEST(PartitionSimilarity, RandomFourByFiveMatchesInnerProducts) {
    std::mt19937_64 rng(42);
    std::vector<Vector> prev, curr;
    for (int k = 0; k < 4; ++k) {
        prev.push_back(random_vector(rng, 6));
    }
    for (int k = 0; k < 5; ++k) {
        curr.push_back(random_vector(rng, 6));
    }
    // prev: detections 1,2,3 shared; curr: detections 0,2,4 shared
    const auto fp = frame_of(prev, {1, 1, 1, 1}, {1, 0, 0, 0});
    const auto fc = frame_of(curr, {0, 1, 0, 1, 0}, {1, 1, 1, 1, 1});
    const auto b = partition_similarity(fp, fc);
    EXPECT_EQ(b.shared(), 3);
    EXPECT_EQ(b.s0().rows(), 3);
    EXPECT_EQ(b.s0().cols(), 3);
    EXPECT_EQ(b.s1().rows(), 3);
    EXPECT_EQ(b.s1().cols(), 2);
    EXPECT_EQ(b.s2().rows(), 1);
    EXPECT_EQ(b.s2().cols(), 3);
    EXPECT_EQ(b.s3().rows(), 1);
    EXPECT_EQ(b.s3().cols(), 2);
    EXPECT_EQ(b.perm_prev(), (std::vector<int>{1, 2, 3, 0}));
    EXPECT_EQ(b.perm_curr(), (std::vector<int>{0, 2, 4, 1, 3}));

    const Matrix original = b.original_order();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 5; ++c) {
            double direct = 0.0;
            const Vector a = prev[r] / prev[r].norm();
            const Vector d = curr[c] / curr[c].norm();
            for (int k = 0; k < 6; ++k) {
                direct += a[k] * d[k];
            }
            EXPECT_NEAR(original(r, c), direct, 1e-14);
        }
    }
}

TEST(PartitionSimilarity, InconsistentLabelsPropagate) {
    EXPECT_THROW(partition_similarity(frame_of({vec({1, 0})}, {1}, {0}), frame_of({vec({1, 0})}, {1}, {1})),
                 DataError);
}

TEST(PartitionSimilarity, OrderInvarianceAndBounds) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_prev = 1 + static_cast<int>(rng() % 7);
        const int n_curr = 1 + static_cast<int>(rng() % 7);
        const int m = static_cast<int>(rng() % (std::min(n_prev, n_curr) + 1));
        std::vector<Vector> prev, curr;
        BitVector out(n_prev, 1), in(n_curr, 1);
        for (int k = 0; k < n_prev; ++k) {
            prev.push_back(random_vector(rng, 4));
        }
        for (int k = 0; k < n_curr; ++k) {
            curr.push_back(random_vector(rng, 4));
        }
        std::fill(out.begin(), out.begin() + m, 0);
        std::fill(in.begin(), in.begin() + m, 0);
        std::shuffle(out.begin(), out.end(), rng);
        std::shuffle(in.begin(), in.end(), rng);
        const auto b = partition_similarity(frame_of(prev, BitVector(n_prev, 1), out), frame_of(curr, in, BitVector(n_curr, 1)));

        EXPECT_EQ(b.shared(), m);
        EXPECT_LE(b.full().maxCoeff(), 1.0);
        EXPECT_GE(b.full().minCoeff(), -1.0);

        // shuffling detections (with their labels) permutes the original-order
        // matrix accordingly and leaves the block matrix a reordering of it
        std::vector<int> p(n_prev), q(n_curr);
        std::iota(p.begin(), p.end(), 0);
        std::iota(q.begin(), q.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
        std::shuffle(q.begin(), q.end(), rng);
        std::vector<Vector> prev2, curr2;
        BitVector out2, in2;
        for (int k : p) {
            prev2.push_back(prev[k]);
            out2.push_back(out[k]);
        }
        for (int k : q) {
            curr2.push_back(curr[k]);
            in2.push_back(in[k]);
        }
        const auto b2 = partition_similarity(frame_of(prev2, BitVector(n_prev, 1), out2),
                                             frame_of(curr2, in2, BitVector(n_curr, 1)));
        const Matrix o1 = b.original_order();
        const Matrix o2 = b2.original_order();
        for (int r = 0; r < n_prev; ++r) {
            for (int c = 0; c < n_curr; ++c) {
                EXPECT_EQ(o2(r, c), o1(p[r], q[c]));
            }
        }
    }
}

TEST(DetectionStream, ValidateCatchesBadSpacingAndLabels) {
    DetectionStream s;
    s.delta = 3.0;
    s.frames.push_back(frame_of({vec({1, 0})}, {1}, {0}));
    s.frames.push_back(frame_of({vec({1, 0})}, {0}, {1}));
    s.frames[0].frame_index = 1;
    s.frames[1].frame_index = 2;
    s.frames[1].timestamp = 3.0;
    EXPECT_NO_THROW(s.validate());

    auto bad_time = s;
    bad_time.frames[1].timestamp = 4.0;
    EXPECT_THROW(bad_time.validate(), DataError);

    auto bad_labels = s;
    bad_labels.frames[1].inflow.push_back(0);
    EXPECT_THROW(bad_labels.validate(), DataError);

    auto bad_dim = s;
    bad_dim.frames[1].detections[0] = Detection(Point2{}, vec({1, 0, 0}));
    EXPECT_THROW(bad_dim.validate(), DataError);
}
