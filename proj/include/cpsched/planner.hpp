#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/dp_solver.hpp"
#include "cpsched/packer.hpp"
#include "cpsched/types.hpp"

// End-to-end pipeline: split a global batch into token-balanced micro-batches,
// pack each into atomic groups, solve for CP degrees, and lay the groups out
// on ranks. Micro-batches are independent and executed sequentially.

namespace cpsched {

// Longest-processing-time-first split: sequences in descending length order
// go to the currently lightest micro-batch. The token budget only sizes the
// number of micro-batches; it is not a hard per-batch cap.
inline std::vector<MicroBatch> plan_micro_batches(
    std::span<const SequenceSpec> global_batch, std::int64_t token_budget,
    std::optional<int> num_micro_batches_hint = std::nullopt) {
    if (global_batch.empty())
        throw ValidationError("micro-batch planner: global batch must be non-empty");

    std::int64_t total_tokens = 0;
    std::int64_t max_len = 0;
    for (const auto& s : global_batch) {
        total_tokens += s.length;
        max_len = std::max(max_len, s.length);
    }

    int count;
    if (num_micro_batches_hint) {
        count = *num_micro_batches_hint;
        if (count < 1)
            throw ValidationError("micro-batch planner: hint must be >= 1");
    } else {
        if (token_budget < 1)
            throw ValidationError("micro-batch planner: token budget must be >= 1");
        if (max_len > token_budget)
            throw ValidationError(
                "micro-batch planner: a sequence of length " + std::to_string(max_len) +
                " exceeds the token budget " + std::to_string(token_budget) +
                " and no micro-batch count hint was given");
        count = static_cast<int>((total_tokens + token_budget - 1) / token_budget);
    }
    count = std::min<int>(count, static_cast<int>(global_batch.size()));
    if (count < 1) count = 1;

    std::vector<const SequenceSpec*> order;
    order.reserve(global_batch.size());
    for (const auto& s : global_batch) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const SequenceSpec* a, const SequenceSpec* b) {
        if (a->length != b->length) return a->length > b->length;
        return a->id < b->id;
    });

    std::vector<std::vector<SequenceSpec>> buckets(static_cast<std::size_t>(count));
    std::vector<std::int64_t> load(static_cast<std::size_t>(count), 0);
    for (const SequenceSpec* s : order) {
        std::size_t lightest = 0;
        for (std::size_t i = 1; i < load.size(); ++i)
            if (load[i] < load[lightest]) lightest = i;
        buckets[lightest].push_back(*s);
        load[lightest] += s->length;
    }

    std::vector<MicroBatch> result;
    result.reserve(buckets.size());
    for (auto& b : buckets)
        if (!b.empty()) result.emplace_back(std::move(b));
    return result;
}

// Lays out one group per degree entry on concrete ranks. Groups are placed
// largest-degree first; a group no wider than a node goes to the node with
// the least sufficient free capacity, so small rings stay on one node
// whenever capacity permits. Wider (or unplaceable) groups take the lowest
// free ranks across nodes.
inline std::vector<std::vector<int>> assign_ranks(std::span<const int> degrees,
                                                  const ClusterSpec& cluster) {
    long long total = 0;
    for (int d : degrees) {
        if (d < 1) throw ValidationError("assign_ranks: degrees must be >= 1");
        total += d;
    }
    if (total > cluster.num_ranks)
        throw ValidationError("assign_ranks: degrees sum " + std::to_string(total) +
                              " exceeds rank budget " + std::to_string(cluster.num_ranks));

    const int nodes = cluster.num_nodes();
    std::vector<int> next_free(static_cast<std::size_t>(nodes));   // next free rank per node
    std::vector<int> free_count(static_cast<std::size_t>(nodes));  // free ranks per node
    for (int nd = 0; nd < nodes; ++nd) {
        next_free[nd] = nd * cluster.ranks_per_node;
        free_count[nd] =
            std::min(cluster.ranks_per_node, cluster.num_ranks - nd * cluster.ranks_per_node);
    }

    std::vector<std::size_t> order(degrees.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&degrees](std::size_t a, std::size_t b) {
        if (degrees[a] != degrees[b]) return degrees[a] > degrees[b];
        return a < b;
    });

    auto take_from_node = [&](int nd, int count, std::vector<int>& out) {
        for (int i = 0; i < count; ++i) out.push_back(next_free[nd]++);
        free_count[nd] -= count;
    };

    std::vector<std::vector<int>> result(degrees.size());
    for (std::size_t gi : order) {
        const int d = degrees[gi];
        std::vector<int> ranks;
        ranks.reserve(static_cast<std::size_t>(d));

        int chosen = -1;
        if (d <= cluster.ranks_per_node) {
            for (int nd = 0; nd < nodes; ++nd) {
                if (free_count[nd] < d) continue;
                if (chosen < 0 || free_count[nd] < free_count[chosen]) chosen = nd;
            }
        }
        if (chosen >= 0) {
            take_from_node(chosen, d, ranks);
        } else {
            int remaining = d;  // span nodes, lowest free ranks first
            for (int nd = 0; nd < nodes && remaining > 0; ++nd) {
                const int take = std::min(remaining, free_count[nd]);
                take_from_node(nd, take, ranks);
                remaining -= take;
            }
        }
        result[gi] = std::move(ranks);
    }
    return result;
}

struct PlanOptions {
    // Micro-batch sizing: an explicit count wins over a token budget; with
    // neither, the planner picks the smallest count that keeps every
    // micro-batch feasible (sum of group minimum degrees within the rank
    // budget).
    std::optional<int> num_micro_batches;
    std::optional<std::int64_t> token_budget;
    // Post-pass that grows degrees into idle ranks while the estimated time
    // strictly improves. Off by default; the solver's answer already attains
    // the optimal makespan.
    bool absorb_slack = false;
};

struct MicroBatchPlanStats {
    int micro_batch_index = 0;
    int num_groups = 0;
    std::uint64_t dp_cells_evaluated = 0;
};

// Mirrors a communication-group pool: distinct (degree, rank set) shapes
// across the emitted plans versus total group count. Informational only.
struct GroupShapeStats {
    std::size_t total_groups = 0;
    std::size_t distinct_shapes = 0;
};

struct PlanResult {
    std::vector<SchedulePlan> plans;
    std::vector<MicroBatchPlanStats> stats;
    GroupShapeStats shape_stats;
};

namespace detail {

inline bool micro_batch_feasible(const MicroBatch& mb, const ClusterSpec& cluster,
                                 const CostCoefficients& coeffs) {
    const auto groups = pack_bfd(mb, cluster, coeffs);
    long long total_min = 0;
    for (const auto& g : groups) total_min += g.d_min;
    return total_min <= cluster.num_ranks;
}

// Smallest micro-batch count whose packing fits the rank budget everywhere.
inline std::vector<MicroBatch> auto_micro_batches(std::span<const SequenceSpec> global_batch,
                                                  const ClusterSpec& cluster,
                                                  const CostCoefficients& coeffs) {
    double total_mem = 0.0;
    for (const auto& s : global_batch)
        total_mem += static_cast<double>(s.length) * coeffs.mem_per_token +
                     coeffs.mem_model_states;
    const double cluster_capacity =
        cluster.mem_budget_per_rank * static_cast<double>(cluster.num_ranks);
    int count = std::max(1, static_cast<int>(std::ceil(total_mem / cluster_capacity)));

    const int max_count = static_cast<int>(global_batch.size());
    for (; count <= max_count; ++count) {
        auto mbs = plan_micro_batches(global_batch, /*token_budget=*/1, count);
        bool ok = true;
        for (const auto& mb : mbs)
            if (!micro_batch_feasible(mb, cluster, coeffs)) {
                ok = false;
                break;
            }
        if (ok) return mbs;
    }
    // Even singleton micro-batches failed: some sequence cannot fit the
    // cluster; let the packer raise the precise error.
    auto mbs = plan_micro_batches(global_batch, 1, max_count);
    for (const auto& mb : mbs) pack_bfd(mb, cluster, coeffs);
    throw InfeasibleError("planner: global batch infeasible at any micro-batch count");
}

inline void absorb_slack_into_degrees(std::vector<int>& degrees,
                                      std::span<const AtomicGroup> groups,
                                      const ClusterSpec& cluster,
                                      const CostCoefficients& coeffs) {
    int slack = cluster.num_ranks;
    for (int d : degrees) slack -= d;
    while (slack > 0) {
        int best_group = -1;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            const int d = degrees[i];
            if (d >= cluster.num_ranks) continue;
            const double now = estimate_time(groups[i], d, cluster, coeffs).total;
            const double grown = estimate_time(groups[i], d + 1, cluster, coeffs).total;
            const double gain = now - grown;
            if (gain > best_gain) {
                best_gain = gain;
                best_group = static_cast<int>(i);
            }
        }
        if (best_group < 0) break;  // no strict improvement anywhere
        degrees[static_cast<std::size_t>(best_group)] += 1;
        --slack;
    }
}

}  // namespace detail

// Plans one micro-batch that has already been packed and solved.
inline SchedulePlan make_plan(int micro_batch_index, std::span<const AtomicGroup> groups,
                              std::span<const int> degrees, const ClusterSpec& cluster,
                              const CostCoefficients& coeffs) {
    const auto rank_sets = assign_ranks(degrees, cluster);

    std::vector<bool> used(static_cast<std::size_t>(cluster.num_ranks), false);
    std::vector<CPGroupAssignment> assignments;
    assignments.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double t = estimate_time(groups[i], degrees[i], cluster, coeffs).total;
        for (int r : rank_sets[i]) used[static_cast<std::size_t>(r)] = true;
        assignments.emplace_back(groups[i], degrees[i], rank_sets[i], t);
    }
    std::vector<int> idle;
    for (int r = 0; r < cluster.num_ranks; ++r)
        if (!used[static_cast<std::size_t>(r)]) idle.push_back(r);

    return SchedulePlan(micro_batch_index, std::move(assignments), std::move(idle));
}

inline PlanResult plan(std::span<const SequenceSpec> global_batch, const ClusterSpec& cluster,
                       const CostCoefficients& coeffs, const PlanOptions& options = {}) {
    coeffs.validate();

    std::vector<MicroBatch> micro_batches;
    if (options.num_micro_batches) {
        micro_batches =
            plan_micro_batches(global_batch, /*token_budget=*/1, options.num_micro_batches);
    } else if (options.token_budget) {
        micro_batches = plan_micro_batches(global_batch, *options.token_budget);
    } else {
        micro_batches = detail::auto_micro_batches(global_batch, cluster, coeffs);
    }

    PlanResult result;
    std::set<std::pair<int, std::vector<int>>> shapes;
    for (std::size_t mi = 0; mi < micro_batches.size(); ++mi) {
        const int index = static_cast<int>(mi);
        try {
            const auto groups = pack_bfd(micro_batches[mi], cluster, coeffs);
            auto solution = solve(groups, cluster, coeffs);
            if (options.absorb_slack)
                detail::absorb_slack_into_degrees(solution.degrees, groups, cluster, coeffs);

            auto mb_plan = make_plan(index, groups, solution.degrees, cluster, coeffs);
            for (const auto& a : mb_plan.assignments)
                shapes.emplace(a.degree, a.rank_ids);
            result.shape_stats.total_groups += mb_plan.assignments.size();

            result.stats.push_back(MicroBatchPlanStats{
                index, static_cast<int>(groups.size()), solution.table_cells_evaluated});
            result.plans.push_back(std::move(mb_plan));
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("micro-batch " + std::to_string(index) + ": " + e.what());
        }
    }
    result.shape_stats.distinct_shapes = shapes.size();
    return result;
}

}  // namespace cpsched
