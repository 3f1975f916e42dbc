#include "wvic/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wvic {

int Assignment::col_of(int row) const {
    for (const auto& [r, c] : pairs) {
        if (r == row) {
            return c;
        }
    }
    return -1;
}

namespace {

void check_finite(const Matrix& cost) {
    if (!cost.allFinite()) {
        throw NumericalError("invalid cost matrix");
    }
}

Assignment finish(const Matrix& cost, const std::vector<int>& col_for_row) {
    Assignment out;
    for (int r = 0; r < static_cast<int>(cost.rows()); ++r) {
        const int c = col_for_row[r];
        if (c >= 0 && c < cost.cols()) {
            out.pairs.emplace_back(r, c);
            out.total_cost += cost(r, c);
        } else {
            out.unmatched_rows.push_back(r);
        }
    }
    return out;
}

} // namespace

Assignment hungarian(const Matrix& cost) {
    check_finite(cost);
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) {
        Assignment out;
        for (int r = 0; r < rows; ++r) {
            out.unmatched_rows.push_back(r);
        }
        return out;
    }

    const int n = std::max(rows, cols);
    double sentinel = 0.0;
    if (rows != cols) {
        const double max_abs = cost.cwiseAbs().maxCoeff();
        sentinel = (max_abs + 1.0) * (n + 1);
    }
    auto at = [&](int r, int c) { return (r < rows && c < cols) ? cost(r, c) : sentinel; };

    // 1-based potentials; match_col[c] is the row assigned to column c.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
    std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int r = 1; r <= n; ++r) {
        match_col[0] = r;
        int c0 = 0;
        std::fill(min_slack.begin(), min_slack.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[c0] = 1;
            const int r0 = match_col[c0];
            double delta = kInf;
            int c1 = 0;
            for (int c = 1; c <= n; ++c) {
                if (used[c]) {
                    continue;
                }
                const double reduced = at(r0 - 1, c - 1) - u[r0] - v[c];
                if (reduced < min_slack[c]) {
                    min_slack[c] = reduced;
                    way[c] = c0;
                }
                if (min_slack[c] < delta) {
                    delta = min_slack[c];
                    c1 = c;
                }
            }
            for (int c = 0; c <= n; ++c) {
                if (used[c]) {
                    u[match_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_slack[c] -= delta;
                }
            }
            c0 = c1;
        } while (match_col[c0] != 0);
        do {
            const int c1 = way[c0];
            match_col[c0] = match_col[c1];
            c0 = c1;
        } while (c0 != 0);
    }

    std::vector<int> col_for_row(rows, -1);
    for (int c = 1; c <= n; ++c) {
        const int r = match_col[c] - 1;
        if (r < rows && c - 1 < cols) {
            col_for_row[r] = c - 1;
        }
    }
    return finish(cost, col_for_row);
}

namespace {

struct Enumerator {
    const Matrix& cost;
    bool transposed;
    int small;
    int large;
    std::vector<int> current;
    std::vector<char> taken;
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();

    double edge(int s, int l) const { return transposed ? cost(l, s) : cost(s, l); }

    void run(int depth, double partial) {
        if (depth == small) {
            if (partial < best_cost) {
                best_cost = partial;
                best = current;
            }
            return;
        }
        for (int l = 0; l < large; ++l) {
            if (taken[l]) {
                continue;
            }
            taken[l] = 1;
            current[depth] = l;
            run(depth + 1, partial + edge(depth, l));
            taken[l] = 0;
        }
    }
};

} // namespace

Assignment brute_force_assignment(const Matrix& cost) {
    check_finite(cost);
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (std::min(rows, cols) > kBruteForceLimit) {
        throw DataError("oracle size limit");
    }
    if (rows == 0 || cols == 0) {
        return hungarian(cost);
    }
    const bool transposed = rows > cols;
    Enumerator e{cost, transposed, std::min(rows, cols), std::max(rows, cols), {}, {}, {}};
    e.current.assign(e.small, -1);
    e.taken.assign(e.large, 0);
    e.run(0, 0.0);

    std::vector<int> col_for_row(rows, -1);
    for (int s = 0; s < e.small; ++s) {
        if (transposed) {
            col_for_row[e.best[s]] = s;
        } else {
            col_for_row[s] = e.best[s];
        }
    }
    return finish(cost, col_for_row);
}

} // namespace wvic
