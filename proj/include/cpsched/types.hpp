#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cpsched/errors.hpp"

// Core domain types shared by the cost model, packer, solver and simulator.
// Constructors validate field invariants and throw ValidationError on
// violation; instances are treated as immutable after construction and are
// safe to share across threads. Cross-object constraints (rank disjointness,
// exclusive sequence assignment, memory limits) are checked by validate_plan
// in validate.hpp, not here, so that deliberately broken plans can be built
// in tests and loaded-then-rejected from files.

namespace cpsched {

namespace detail {

inline void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

inline bool finite(double x) { return std::isfinite(x); }

}  // namespace detail

// One input sequence: token length plus the attention-mask efficiency factor.
// mask_efficiency = 0 means pure causal attention; larger values add
// full-attention work on top (1 doubles the quadratic term).
struct SequenceSpec {
    std::string id;
    std::int64_t length = 1;
    double mask_efficiency = 0.0;

    SequenceSpec(std::string id_, std::int64_t length_, double mask_efficiency_ = 0.0)
        : id(std::move(id_)), length(length_), mask_efficiency(mask_efficiency_) {
        detail::require(!id.empty(), "sequence id must be non-empty");
        detail::require(length >= 1, "sequence '" + id + "': length must be >= 1, got " +
                                         std::to_string(length));
        detail::require(detail::finite(mask_efficiency) && mask_efficiency >= 0.0,
                        "sequence '" + id + "': mask_efficiency must be finite and >= 0");
    }
};

// Fixed pool of ranks. One rank is a complete model replica; TP/PP layout
// inside a rank is opaque here. mem_budget_per_rank is in abstract
// activation-capacity units, bandwidths in tokens-equivalent per second.
struct ClusterSpec {
    int num_ranks = 1;
    double mem_budget_per_rank = 1.0;
    int ranks_per_node = 1;
    double intra_node_bandwidth = 1.0;
    double inter_node_bandwidth = 1.0;

    ClusterSpec(int num_ranks_, double mem_budget_per_rank_, int ranks_per_node_,
                double intra_node_bandwidth_, double inter_node_bandwidth_)
        : num_ranks(num_ranks_),
          mem_budget_per_rank(mem_budget_per_rank_),
          ranks_per_node(ranks_per_node_),
          intra_node_bandwidth(intra_node_bandwidth_),
          inter_node_bandwidth(inter_node_bandwidth_) {
        detail::require(num_ranks >= 1, "cluster: num_ranks must be >= 1");
        detail::require(detail::finite(mem_budget_per_rank) && mem_budget_per_rank > 0.0,
                        "cluster: mem_budget_per_rank must be finite and > 0");
        detail::require(ranks_per_node >= 1, "cluster: ranks_per_node must be >= 1");
        detail::require(detail::finite(intra_node_bandwidth) && intra_node_bandwidth > 0.0,
                        "cluster: intra_node_bandwidth must be finite and > 0");
        detail::require(detail::finite(inter_node_bandwidth) && inter_node_bandwidth > 0.0,
                        "cluster: inter_node_bandwidth must be finite and > 0");
        detail::require(inter_node_bandwidth <= intra_node_bandwidth,
                        "cluster: inter_node_bandwidth must be <= intra_node_bandwidth");
    }

    int num_nodes() const { return (num_ranks + ranks_per_node - 1) / ranks_per_node; }

    int node_of_rank(int rank) const { return rank / ranks_per_node; }
};

// Profiled constants of the memory and time estimators. Aggregate by design:
// construct with designated initializers, then run validate() (io and the
// profiler do this at every boundary).
//
//   compute  = (1/d) * sum_k [alpha1*(1+eta_k)*L_k^2 + alpha2*L_k] + beta1
//   comm     = (1/v) * sum_k [alpha3*L_k] + beta2          (zero at d = 1)
//   attention analogues use the *_attn coefficients with the same forms
//   memory   = sum_k [L_k * mem_per_token] + mem_model_states
struct CostCoefficients {
    double alpha1 = 0.0;  // sec per token^2
    double alpha2 = 0.0;  // sec per token
    double beta1 = 0.0;   // sec, fixed compute overhead per group
    double alpha3 = 0.0;  // comm volume per token (divided by bandwidth)
    double beta2 = 0.0;   // sec, fixed comm overhead per group
    double alpha1_attn = 0.0;
    double alpha2_attn = 0.0;
    double beta1_attn = 0.0;
    double alpha3_attn = 0.0;
    double beta2_attn = 0.0;
    double mem_per_token = 0.0;      // capacity units per token
    double mem_model_states = 0.0;   // capacity units, constant per group

    void validate() const {
        const std::pair<const char*, double> fields[] = {
            {"alpha1", alpha1},           {"alpha2", alpha2},
            {"beta1", beta1},             {"alpha3", alpha3},
            {"beta2", beta2},             {"alpha1_attn", alpha1_attn},
            {"alpha2_attn", alpha2_attn}, {"beta1_attn", beta1_attn},
            {"alpha3_attn", alpha3_attn}, {"beta2_attn", beta2_attn},
            {"mem_per_token", mem_per_token},
            {"mem_model_states", mem_model_states},
        };
        for (const auto& [name, value] : fields) {
            detail::require(detail::finite(value) && value >= 0.0,
                            std::string("coefficients: ") + name +
                                " must be finite and >= 0");
        }
        // Attention terms are sub-components of the totals.
        detail::require(alpha1_attn <= alpha1,
                        "coefficients: alpha1_attn must be <= alpha1");
        detail::require(alpha3_attn <= alpha3,
                        "coefficients: alpha3_attn must be <= alpha3");
    }

    CostCoefficients validated() const {
        validate();
        return *this;
    }
};

namespace detail {

inline void require_unique_ids(const std::vector<SequenceSpec>& seqs, const std::string& what) {
    std::unordered_set<std::string> seen;
    seen.reserve(seqs.size());
    for (const auto& s : seqs) {
        if (!seen.insert(s.id).second)
            throw ValidationError(what + ": duplicate sequence id '" + s.id + "'");
    }
}

}  // namespace detail

// A set of sequences scheduled together in one planning round.
struct MicroBatch {
    std::vector<SequenceSpec> sequences;

    explicit MicroBatch(std::vector<SequenceSpec> sequences_)
        : sequences(std::move(sequences_)) {
        detail::require(!sequences.empty(), "micro-batch must be non-empty");
        detail::require_unique_ids(sequences, "micro-batch");
    }

    std::size_t size() const { return sequences.size(); }
};

// Stage-1 packing output: sequences co-scheduled as one unit, annotated with
// the minimum CP degree that satisfies the memory constraint.
struct AtomicGroup {
    std::vector<SequenceSpec> sequences;
    std::int64_t total_tokens = 0;  // sum of member lengths
    int d_min = 1;

    AtomicGroup(std::vector<SequenceSpec> sequences_, int d_min_)
        : sequences(std::move(sequences_)), d_min(d_min_) {
        detail::require(!sequences.empty(), "atomic group must be non-empty");
        detail::require_unique_ids(sequences, "atomic group");
        detail::require(d_min >= 1, "atomic group: d_min must be >= 1");
        total_tokens = 0;
        for (const auto& s : sequences) total_tokens += s.length;
    }

    std::vector<std::string> sequence_ids() const {
        std::vector<std::string> ids;
        ids.reserve(sequences.size());
        for (const auto& s : sequences) ids.push_back(s.id);
        return ids;
    }
};

// One CP group of the final plan: an atomic group run at `degree` on the
// listed ranks. Rank-range validity against the cluster and disjointness
// across assignments are plan-level checks (validate_plan).
struct CPGroupAssignment {
    AtomicGroup group;
    int degree = 1;
    std::vector<int> rank_ids;
    double predicted_time = 0.0;  // seconds

    CPGroupAssignment(AtomicGroup group_, int degree_, std::vector<int> rank_ids_,
                      double predicted_time_)
        : group(std::move(group_)),
          degree(degree_),
          rank_ids(std::move(rank_ids_)),
          predicted_time(predicted_time_) {
        detail::require(degree >= 1, "assignment: degree must be >= 1");
        detail::require(degree >= group.d_min,
                        "assignment: degree " + std::to_string(degree) +
                            " below group d_min " + std::to_string(group.d_min));
        detail::require(rank_ids.size() == static_cast<std::size_t>(degree),
                        "assignment: rank_ids size " + std::to_string(rank_ids.size()) +
                            " must equal degree " + std::to_string(degree));
        std::unordered_set<int> seen;
        for (int r : rank_ids) {
            detail::require(r >= 0, "assignment: rank ids must be >= 0");
            detail::require(seen.insert(r).second,
                            "assignment: duplicate rank id " + std::to_string(r));
        }
        detail::require(detail::finite(predicted_time) && predicted_time >= 0.0,
                        "assignment: predicted_time must be finite and >= 0");
    }
};

// The solver's answer for one micro-batch. makespan is derived from the
// assignments (maximum predicted time), never caller-supplied.
struct SchedulePlan {
    int micro_batch_index = 0;
    std::vector<CPGroupAssignment> assignments;
    std::vector<int> idle_ranks;  // ranks left unassigned by the solver
    double makespan = 0.0;        // seconds

    SchedulePlan(int micro_batch_index_, std::vector<CPGroupAssignment> assignments_,
                 std::vector<int> idle_ranks_ = {})
        : micro_batch_index(micro_batch_index_),
          assignments(std::move(assignments_)),
          idle_ranks(std::move(idle_ranks_)) {
        detail::require(micro_batch_index >= 0, "plan: micro_batch_index must be >= 0");
        detail::require(!assignments.empty(), "plan: assignments must be non-empty");
        std::unordered_set<int> seen;
        for (int r : idle_ranks) {
            detail::require(r >= 0, "plan: idle rank ids must be >= 0");
            detail::require(seen.insert(r).second,
                            "plan: duplicate idle rank id " + std::to_string(r));
        }
        makespan = 0.0;
        for (const auto& a : assignments) makespan = std::max(makespan, a.predicted_time);
    }

    int ranks_used() const {
        int total = 0;
        for (const auto& a : assignments) total += a.degree;
        return total;
    }
};

}  // namespace cpsched
