#pragma once

#include <utility>
#include <vector>

#include "wvic/model.hpp"

namespace wvic {

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
    double total_cost = 0.0;
    std::vector<int> unmatched_rows;

    /// Column matched to `row`, or -1.
    int col_of(int row) const;
};

/// Minimum-cost one-to-one matching on a rectangular cost matrix.
///
/// Every row is matched when rows <= cols; otherwise exactly `cols` rows are
/// matched and the rest are listed in unmatched_rows. Rectangular input is
/// padded to square with a sentinel cost that no real edge can lose to.
/// O(n^3) shortest-augmenting-path implementation with dual potentials.
Assignment hungarian(const Matrix& cost);

/// Largest min(rows, cols) accepted by brute_force_assignment.
inline constexpr int kBruteForceLimit = 8;

/// Exhaustive enumeration of every injection from the smaller side into the
/// larger one. Test oracle for hungarian; throws DataError("oracle size limit")
/// when min(rows, cols) > kBruteForceLimit.
Assignment brute_force_assignment(const Matrix& cost);

} // namespace wvic
