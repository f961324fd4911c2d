#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/packer.hpp"
#include "cpsched/planner.hpp"
#include "cpsched/types.hpp"
#include "cpsched/validate.hpp"

// Static-parallelism baselines and a deterministic cost simulator. The
// simulator is the ground truth of this project: it re-derives every group
// time from the cost model and never trusts stored predictions.

namespace cpsched {

struct SimReport {
    std::string plan_source;
    std::vector<std::vector<double>> per_group_time;  // [plan][group], seconds
    std::vector<double> per_plan_makespan;            // max within each plan
    double makespan = 0.0;            // sum across sequential plans
    double total_rank_seconds = 0.0;  // num_ranks * makespan
    double busy_rank_seconds = 0.0;   // sum of degree * time over all groups
    double idle_fraction = 0.0;       // 1 - busy / total
};

// Uniform-degree baseline: the same memory-aware BFD packing, confined to a
// fixed degree d, executed in synchronous waves of floor(N/d) concurrent
// groups. Each wave becomes one plan; waves run sequentially on the same
// ranks, so simulation adds their makespans. Groups are dealt to waves in
// descending time order, which minimizes the sum of wave maxima and gives
// the baseline its best case.
inline std::vector<SchedulePlan> static_plan(const MicroBatch& batch, int uniform_degree,
                                             const ClusterSpec& cluster,
                                             const CostCoefficients& coeffs) {
    if (uniform_degree < 1)
        throw ValidationError("static baseline: degree must be >= 1");
    if (uniform_degree > cluster.num_ranks)
        throw InfeasibleError("static baseline: degree " + std::to_string(uniform_degree) +
                              " exceeds rank budget " + std::to_string(cluster.num_ranks));
    for (const auto& s : batch.sequences) {
        const int need = min_degree(s, cluster, coeffs);
        if (need > uniform_degree)
            throw InfeasibleError("static baseline: sequence '" + s.id + "' needs degree " +
                                  std::to_string(need) + " > uniform degree " +
                                  std::to_string(uniform_degree));
    }

    auto bins = detail::best_fit_decreasing(
        batch.sequences, coeffs,
        [&](const SequenceSpec&, int) {
            return static_cast<double>(uniform_degree) * cluster.mem_budget_per_rank;
        },
        [&](const SequenceSpec&) { return 1; });

    std::vector<AtomicGroup> groups;
    groups.reserve(bins.size());
    for (auto& bin : bins) {
        auto members = std::move(bin.members);
        const int d_min = min_degree(std::span<const SequenceSpec>(members), cluster, coeffs);
        groups.emplace_back(std::move(members), d_min);
    }

    std::vector<std::size_t> order(groups.size());
    std::vector<double> times(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        order[i] = i;
        times[i] = estimate_time(groups[i], uniform_degree, cluster, coeffs).total;
    }
    std::sort(order.begin(), order.end(), [&times](std::size_t a, std::size_t b) {
        if (times[a] != times[b]) return times[a] > times[b];
        return a < b;
    });

    const std::size_t slots =
        static_cast<std::size_t>(cluster.num_ranks / uniform_degree);
    std::vector<SchedulePlan> waves;
    for (std::size_t start = 0; start < order.size(); start += slots) {
        const std::size_t end = std::min(order.size(), start + slots);
        std::vector<int> degrees(end - start, uniform_degree);
        const auto rank_sets = assign_ranks(degrees, cluster);

        std::vector<bool> used(static_cast<std::size_t>(cluster.num_ranks), false);
        std::vector<CPGroupAssignment> assignments;
        assignments.reserve(end - start);
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t gi = order[k];
            for (int r : rank_sets[k - start]) used[static_cast<std::size_t>(r)] = true;
            assignments.emplace_back(groups[gi], uniform_degree, rank_sets[k - start],
                                     times[gi]);
        }
        std::vector<int> idle;
        for (int r = 0; r < cluster.num_ranks; ++r)
            if (!used[static_cast<std::size_t>(r)]) idle.push_back(r);
        waves.emplace_back(static_cast<int>(waves.size()), std::move(assignments),
                           std::move(idle));
    }
    return waves;
}

// Evaluates a sequence of plans under the cost model. Each plan is first
// validated against its own embedded sequences (rank overlap, double
// assignment, memory, rank budget); violations abort the simulation.
inline SimReport simulate(std::span<const SchedulePlan> plans, const ClusterSpec& cluster,
                          const CostCoefficients& coeffs, std::string plan_source = "") {
    if (plans.empty()) throw ValidationError("simulate: no plans given");

    SimReport report;
    report.plan_source = std::move(plan_source);

    for (const auto& plan : plans) {
        std::vector<SequenceSpec> embedded;
        for (const auto& a : plan.assignments)
            for (const auto& s : a.group.sequences) embedded.push_back(s);
        // Duplicate ids inside one plan are a violation, not a type error,
        // so deduplicate before building the reference batch.
        std::sort(embedded.begin(), embedded.end(),
                  [](const SequenceSpec& a, const SequenceSpec& b) { return a.id < b.id; });
        embedded.erase(std::unique(embedded.begin(), embedded.end(),
                                   [](const SequenceSpec& a, const SequenceSpec& b) {
                                       return a.id == b.id;
                                   }),
                       embedded.end());
        const auto violations =
            validate_plan(plan, MicroBatch(embedded), cluster, coeffs);
        if (!violations.empty()) {
            std::string msg = "simulate: plan " + std::to_string(plan.micro_batch_index) +
                              " failed validation:";
            for (const auto& v : violations) msg += "\n  [" + v.code + "] " + v.message;
            throw ValidationError(msg);
        }

        std::vector<double> group_times;
        group_times.reserve(plan.assignments.size());
        double plan_makespan = 0.0;
        for (const auto& a : plan.assignments) {
            const double t = estimate_time(a.group, a.degree, cluster, coeffs).total;
            group_times.push_back(t);
            plan_makespan = std::max(plan_makespan, t);
            report.busy_rank_seconds += static_cast<double>(a.degree) * t;
        }
        report.per_group_time.push_back(std::move(group_times));
        report.per_plan_makespan.push_back(plan_makespan);
        report.makespan += plan_makespan;
    }

    report.total_rank_seconds = static_cast<double>(cluster.num_ranks) * report.makespan;
    report.idle_fraction =
        report.total_rank_seconds > 0.0
            ? 1.0 - report.busy_rank_seconds / report.total_rank_seconds
            : 0.0;
    return report;
}

struct MicroBatchShape {
    int micro_batch_index = 0;
    std::vector<std::pair<int, int>> degree_counts;  // (degree, count), degree descending

    std::string to_string() const {
        std::string s = "<";
        for (std::size_t i = 0; i < degree_counts.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(degree_counts[i].first) + "x" +
                 std::to_string(degree_counts[i].second);
        }
        return s + ">";
    }
};

inline MicroBatchShape plan_shape(const SchedulePlan& plan) {
    std::map<int, int, std::greater<int>> counts;
    for (const auto& a : plan.assignments) counts[a.degree] += 1;
    MicroBatchShape shape;
    shape.micro_batch_index = plan.micro_batch_index;
    shape.degree_counts.assign(counts.begin(), counts.end());
    return shape;
}

struct StaticOutcome {
    int degree = 0;
    bool feasible = false;
    std::string note;  // infeasibility reason when skipped
    SimReport report;
};

struct ComparisonReport {
    SimReport dynamic_report;
    std::vector<MicroBatchShape> dynamic_shapes;
    GroupShapeStats dynamic_shape_stats;
    std::vector<StaticOutcome> statics;
    int best_static_degree = -1;
    double best_static_makespan = std::numeric_limits<double>::quiet_NaN();
    double speedup = std::numeric_limits<double>::quiet_NaN();  // best static / dynamic
};

// Runs the dynamic planner and every candidate uniform degree on the same
// workload, simulates all of them, and reports the speedup of the dynamic
// plan over the best static configuration. Infeasible degrees are skipped
// and flagged.
inline ComparisonReport compare(std::span<const SequenceSpec> batch,
                                const ClusterSpec& cluster, const CostCoefficients& coeffs,
                                std::span<const int> static_degrees,
                                const PlanOptions& options = {}) {
    ComparisonReport report;

    const auto dynamic = plan(batch, cluster, coeffs, options);
    report.dynamic_report = simulate(dynamic.plans, cluster, coeffs, "dynamic");
    report.dynamic_shape_stats = dynamic.shape_stats;
    for (const auto& p : dynamic.plans) report.dynamic_shapes.push_back(plan_shape(p));

    MicroBatch whole(std::vector<SequenceSpec>(batch.begin(), batch.end()));
    for (int d : static_degrees) {
        StaticOutcome outcome;
        outcome.degree = d;
        try {
            const auto waves = static_plan(whole, d, cluster, coeffs);
            outcome.report = simulate(waves, cluster, coeffs, "static:" + std::to_string(d));
            outcome.feasible = true;
            if (report.best_static_degree < 0 ||
                outcome.report.makespan < report.best_static_makespan) {
                report.best_static_degree = d;
                report.best_static_makespan = outcome.report.makespan;
            }
        } catch (const InfeasibleError& e) {
            outcome.feasible = false;
            outcome.note = e.what();
        }
        report.statics.push_back(std::move(outcome));
    }

    if (report.best_static_degree >= 0 && report.dynamic_report.makespan > 0.0)
        report.speedup = report.best_static_makespan / report.dynamic_report.makespan;
    return report;
}

}  // namespace cpsched
