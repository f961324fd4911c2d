#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/types.hpp"

// Stage 2: assign a CP degree to each atomic group so that the makespan
// (maximum group execution time) is minimized under the total rank budget.
//
// DP[i][j] is the minimum makespan for the first i groups using exactly j
// ranks. The candidate degree for group i ranges from its d_min up to
// j minus the ranks reserved for the preceding groups' minima; rows skip
// column ranges that cannot leave enough ranks for the remaining groups.
// The answer takes the minimum of the last row over all j up to N, since a
// flat cost curve can make fewer ranks tie with the full budget. Degrees are
// recovered by backtracking the choice table from the winning column.

namespace cpsched {

struct DPSolution {
    std::vector<int> degrees;             // one per group, input order
    double makespan = 0.0;                // seconds
    std::uint64_t table_cells_evaluated = 0;  // inner-loop iterations
};

namespace detail {

inline std::vector<int> group_min_degrees(std::span<const AtomicGroup> groups) {
    std::vector<int> d_min;
    d_min.reserve(groups.size());
    for (const auto& g : groups) d_min.push_back(g.d_min);
    return d_min;
}

inline void check_feasible(std::span<const AtomicGroup> groups, const ClusterSpec& cluster) {
    if (groups.empty()) throw ValidationError("solver: group list must be non-empty");
    long long total_min = 0;
    for (const auto& g : groups) total_min += g.d_min;
    if (total_min > cluster.num_ranks)
        throw InfeasibleError("solver: sum of minimum degrees " + std::to_string(total_min) +
                              " exceeds rank budget " + std::to_string(cluster.num_ranks));
}

// Cost table: cost[i][d] = estimated total time of group i at degree d,
// filled for d in [d_min_i, N]. Precomputing keeps the DP loop at O(1) per
// cell.
inline std::vector<std::vector<double>> cost_table(std::span<const AtomicGroup> groups,
                                                   const ClusterSpec& cluster,
                                                   const CostCoefficients& coeffs) {
    const int n = cluster.num_ranks;
    std::vector<std::vector<double>> cost(groups.size(),
                                          std::vector<double>(static_cast<std::size_t>(n) + 1,
                                                              0.0));
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto sums = group_sums(std::span<const SequenceSpec>(groups[i].sequences));
        for (int d = groups[i].d_min; d <= n; ++d)
            cost[i][static_cast<std::size_t>(d)] =
                time_from_sums(sums, d, cluster, coeffs).total;
    }
    return cost;
}

}  // namespace detail

inline DPSolution solve(std::span<const AtomicGroup> groups, const ClusterSpec& cluster,
                        const CostCoefficients& coeffs) {
    detail::check_feasible(groups, cluster);

    const int k_groups = static_cast<int>(groups.size());
    const int n = cluster.num_ranks;
    const double inf = std::numeric_limits<double>::infinity();
    const auto d_min = detail::group_min_degrees(groups);
    const auto cost = detail::cost_table(groups, cluster, coeffs);

    // prefix_min[i] = sum of d_min over the first i groups.
    std::vector<int> prefix_min(static_cast<std::size_t>(k_groups) + 1, 0);
    for (int i = 0; i < k_groups; ++i) prefix_min[i + 1] = prefix_min[i] + d_min[i];
    const int total_min = prefix_min[k_groups];

    std::vector<std::vector<double>> dp(
        static_cast<std::size_t>(k_groups) + 1,
        std::vector<double>(static_cast<std::size_t>(n) + 1, inf));
    std::vector<std::vector<int>> path(
        static_cast<std::size_t>(k_groups) + 1,
        std::vector<int>(static_cast<std::size_t>(n) + 1, 0));
    dp[0][0] = 0.0;

    std::uint64_t cells = 0;
    for (int i = 1; i <= k_groups; ++i) {
        const int reserve_remaining = total_min - prefix_min[i];
        const int j_lo = prefix_min[i];
        const int j_hi = n - reserve_remaining;
        for (int j = j_lo; j <= j_hi; ++j) {
            double best = inf;
            int best_d = 0;
            const int d_hi = j - prefix_min[i - 1];
            for (int d = d_min[i - 1]; d <= d_hi; ++d) {
                ++cells;
                const double prev = dp[i - 1][j - d];
                const double here = cost[i - 1][d];
                const double value = prev > here ? prev : here;
                if (value < best) {  // strict: ties keep the smaller degree
                    best = value;
                    best_d = d;
                }
            }
            dp[i][j] = best;
            path[i][j] = best_d;
        }
    }

    // Fewer ranks can tie with the full budget when the cost curve is flat;
    // take the best column of the last row (smaller j wins ties).
    int best_j = -1;
    double best_value = inf;
    for (int j = total_min; j <= n; ++j) {
        if (dp[k_groups][j] < best_value) {
            best_value = dp[k_groups][j];
            best_j = j;
        }
    }
    if (best_j < 0)
        throw InfeasibleError("solver: no feasible allocation found");  // unreachable given pre

    DPSolution solution;
    solution.degrees.assign(static_cast<std::size_t>(k_groups), 0);
    int j = best_j;
    for (int i = k_groups; i >= 1; --i) {
        const int d = path[i][j];
        solution.degrees[static_cast<std::size_t>(i) - 1] = d;
        j -= d;
    }

    double makespan = 0.0;
    for (int i = 0; i < k_groups; ++i) {
        const double t = cost[i][solution.degrees[static_cast<std::size_t>(i)]];
        if (t > makespan) makespan = t;
    }
    solution.makespan = makespan;
    solution.table_cells_evaluated = cells;
    return solution;
}

// Exhaustive search over all degree vectors with d_i >= d_min_i and
// sum d_i <= N. Validation oracle for small instances; guarded by limits.
struct BruteForceLimits {
    int max_groups = 6;
    int max_ranks = 12;
};

inline DPSolution brute_force_optimal(std::span<const AtomicGroup> groups,
                                      const ClusterSpec& cluster,
                                      const CostCoefficients& coeffs,
                                      const BruteForceLimits& limits = {}) {
    detail::check_feasible(groups, cluster);
    if (static_cast<int>(groups.size()) > limits.max_groups ||
        cluster.num_ranks > limits.max_ranks)
        throw ValidationError("brute force limited to " + std::to_string(limits.max_groups) +
                              " groups and " + std::to_string(limits.max_ranks) +
                              " ranks; got " + std::to_string(groups.size()) + " groups, " +
                              std::to_string(cluster.num_ranks) + " ranks");

    const int k_groups = static_cast<int>(groups.size());
    const int n = cluster.num_ranks;
    const auto d_min = detail::group_min_degrees(groups);
    const auto cost = detail::cost_table(groups, cluster, coeffs);

    std::vector<int> suffix_min(static_cast<std::size_t>(k_groups) + 1, 0);
    for (int i = k_groups - 1; i >= 0; --i) suffix_min[i] = suffix_min[i + 1] + d_min[i];

    DPSolution best;
    best.makespan = std::numeric_limits<double>::infinity();
    std::vector<int> current(static_cast<std::size_t>(k_groups), 0);
    std::uint64_t evaluated = 0;

    auto recurse = [&](auto&& self, int i, int ranks_left, double running_max) -> void {
        if (i == k_groups) {
            ++evaluated;
            if (running_max < best.makespan) {
                best.makespan = running_max;
                best.degrees = current;
            }
            return;
        }
        const int d_hi = ranks_left - suffix_min[i + 1];
        for (int d = d_min[i]; d <= d_hi; ++d) {
            current[static_cast<std::size_t>(i)] = d;
            const double t = cost[i][d];
            self(self, i + 1, ranks_left - d, t > running_max ? t : running_max);
        }
    };
    recurse(recurse, 0, n, 0.0);

    best.table_cells_evaluated = evaluated;
    return best;
}

}  // namespace cpsched
