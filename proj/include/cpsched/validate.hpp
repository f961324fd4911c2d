#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/types.hpp"

// Plan-level constraint checking: per-group memory against the per-rank
// budget times the degree, exclusive assignment of every batch sequence,
// total rank budget, and rank-set disjointness/range. Dangling sequence or
// rank references come back as violations, not exceptions.

namespace cpsched {

struct Violation {
    std::string code;     // stable machine-readable identifier
    std::string message;  // human-readable description
};

inline std::vector<Violation> validate_plan(const SchedulePlan& plan, const MicroBatch& batch,
                                            const ClusterSpec& cluster,
                                            const CostCoefficients& coeffs) {
    std::vector<Violation> out;
    auto add = [&out](std::string code, std::string message) {
        out.push_back(Violation{std::move(code), std::move(message)});
    };

    std::unordered_set<std::string> batch_ids;
    for (const auto& s : batch.sequences) batch_ids.insert(s.id);

    std::unordered_map<std::string, int> assigned_count;
    std::unordered_map<int, int> rank_use;
    int total_degree = 0;

    for (std::size_t gi = 0; gi < plan.assignments.size(); ++gi) {
        const auto& a = plan.assignments[gi];
        const std::string where = "group " + std::to_string(gi);

        for (const auto& s : a.group.sequences) {
            assigned_count[s.id] += 1;
            if (!batch_ids.count(s.id))
                add("sequence_unknown",
                    where + ": sequence '" + s.id + "' is not part of the micro-batch");
        }

        total_degree += a.degree;
        for (int r : a.rank_ids) {
            rank_use[r] += 1;
            if (r < 0 || r >= cluster.num_ranks)
                add("rank_out_of_range",
                    where + ": rank " + std::to_string(r) + " outside [0, " +
                        std::to_string(cluster.num_ranks) + ")");
        }

        const double mem = estimate_memory(a.group, coeffs);
        const double budget = cluster.mem_budget_per_rank * static_cast<double>(a.degree);
        if (mem > budget)
            add("memory_exceeded", where + ": memory " + std::to_string(mem) +
                                       " exceeds budget " + std::to_string(budget) +
                                       " at degree " + std::to_string(a.degree));
    }

    for (const auto& s : batch.sequences) {
        auto it = assigned_count.find(s.id);
        if (it == assigned_count.end())
            add("sequence_unassigned", "sequence '" + s.id + "' unassigned");
        else if (it->second > 1)
            add("sequence_double_assigned",
                "sequence '" + s.id + "' assigned " + std::to_string(it->second) + " times");
    }

    // Deterministic report order for ranks.
    std::map<int, int> rank_use_sorted(rank_use.begin(), rank_use.end());
    for (const auto& [rank, uses] : rank_use_sorted)
        if (uses > 1)
            add("rank_double_assigned",
                "rank " + std::to_string(rank) + " double-assigned (" +
                    std::to_string(uses) + " groups)");

    if (total_degree > cluster.num_ranks)
        add("rank_budget_exceeded", "total degree " + std::to_string(total_degree) +
                                        " exceeds rank budget " +
                                        std::to_string(cluster.num_ranks));

    return out;
}

}  // namespace cpsched
