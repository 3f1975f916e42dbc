#include <gtest/gtest.h>

#include <random>
#include <numeric>
#include <set>

#include "wvic/assign.hpp"

using namespace wvic;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double x : row) {
            m(r, c++) = x;
        }
        ++r;
    }
    return m;
}

Matrix random_cost(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        m.data()[k] = u(rng);
    }
    return m;
}

void expect_valid(const Assignment& a, const Matrix& cost) {
    std::set<int> rows, cols;
    double total = 0.0;
    for (const auto& [r, c] : a.pairs) {
        EXPECT_TRUE(rows.insert(r).second);
        EXPECT_TRUE(cols.insert(c).second);
        total += cost(r, c);
    }
    EXPECT_EQ(static_cast<Eigen::Index>(a.pairs.size()), std::min(cost.rows(), cost.cols()));
    EXPECT_EQ(a.pairs.size() + a.unmatched_rows.size(), static_cast<std::size_t>(cost.rows()));
    EXPECT_DOUBLE_EQ(total, a.total_cost);
}

} // namespace

TEST(Hungarian, ZeroDiagonal) {
    const auto a = hungarian(mat({{0, 1}, {1, 0}}));
    EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
    EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Hungarian, Forced) {
    const auto a = hungarian(mat({{5}}));
    EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 0}}));
    EXPECT_EQ(a.total_cost, 5.0);
}

TEST(Hungarian, EmptyMatrix) {
    const auto a = hungarian(Matrix(0, 0));
    EXPECT_TRUE(a.pairs.empty());
    EXPECT_EQ(a.total_cost, 0.0);
    const auto b = hungarian(Matrix(3, 0));
    EXPECT_EQ(b.unmatched_rows, (std::vector<int>{0, 1, 2}));
}

TEST(Hungarian, MoreRowsThanColumns) {
    const auto a = hungarian(mat({{9, 9}, {1, 9}, {9, 2}}));
    EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{1, 0}, {2, 1}}));
    EXPECT_EQ(a.unmatched_rows, (std::vector<int>{0}));
    EXPECT_EQ(a.total_cost, 3.0);
}

TEST(Hungarian, RejectsNonFinite) {
    EXPECT_THROW(hungarian(mat({{0, std::numeric_limits<double>::quiet_NaN()}})), NumericalError);
}

TEST(BruteForce, Examples) {
    EXPECT_EQ(brute_force_assignment(mat({{0, 1}, {1, 0}})).total_cost, 0.0);
    const auto a = brute_force_assignment(mat({{3, 1, 2}}));
    EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 1}}));
    EXPECT_EQ(a.total_cost, 1.0);
}

TEST(BruteForce, SizeGuard) {
    try {
        brute_force_assignment(Matrix::Zero(9, 9));
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "oracle size limit");
    }
    EXPECT_NO_THROW(brute_force_assignment(Matrix::Zero(1, 12)));
}

TEST(Hungarian, AgreesWithBruteForce) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 7);
        const int cols = 1 + static_cast<int>(rng() % 8);
        const Matrix cost = random_cost(rng, rows, cols);
        const auto h = hungarian(cost);
        const auto b = brute_force_assignment(cost);
        expect_valid(h, cost);
        expect_valid(b, cost);
        EXPECT_NEAR(h.total_cost, b.total_cost, 1e-12) << rows << "x" << cols;
    }
}

TEST(Hungarian, SixBySixSelfConsistency) {
    std::mt19937_64 rng(66);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix cost = random_cost(rng, 6, 6);
        EXPECT_NEAR(hungarian(cost).total_cost, brute_force_assignment(cost).total_cost, 1e-12);
    }
}

TEST(Hungarian, BeatsRandomMatchings) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 2 + static_cast<int>(rng() % 10);
        const int cols = 2 + static_cast<int>(rng() % 10);
        const Matrix cost = random_cost(rng, rows, cols);
        const double best = hungarian(cost).total_cost;
        std::vector<int> cols_perm(cols);
        std::iota(cols_perm.begin(), cols_perm.end(), 0);
        std::vector<int> rows_perm(rows);
        std::iota(rows_perm.begin(), rows_perm.end(), 0);
        for (int k = 0; k < 1000; ++k) {
            std::shuffle(cols_perm.begin(), cols_perm.end(), rng);
            std::shuffle(rows_perm.begin(), rows_perm.end(), rng);
            double total = 0.0;
            for (int j = 0; j < std::min(rows, cols); ++j) {
                total += cost(rows_perm[j], cols_perm[j]);
            }
            EXPECT_LE(best, total + 1e-12);
        }
    }
}

TEST(Hungarian, ScaleInvariantArgmin) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 7);
        const int cols = 1 + static_cast<int>(rng() % 7);
        const Matrix cost = random_cost(rng, rows, cols);
        const double scale = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
        const auto a = hungarian(cost);
        const Matrix scaled = scale * cost;
        double rescored = 0.0;
        for (const auto& [r, c] : a.pairs) {
            rescored += scaled(r, c);
        }
        EXPECT_NEAR(rescored, brute_force_assignment(scaled).total_cost, 1e-9 * scale);
    }
}

TEST(Hungarian, Deterministic) {
    std::mt19937_64 rng(8);
    const Matrix cost = random_cost(rng, 40, 55);
    const auto a = hungarian(cost);
    const auto b = hungarian(cost);
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_EQ(a.total_cost, b.total_cost);
}
