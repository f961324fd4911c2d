#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "cpsched/types.hpp"

// Memory and execution-time estimators for a CP group.
//
// Per-sequence compute terms are divided by the CP degree (the sequence is
// split evenly into degree chunks); the ring-communication linear term is
// not, since each rank forwards nearly the whole KV volume around the ring
// regardless of degree. A group of degree 1 has no ring and therefore no
// communication cost at all.

namespace cpsched {

struct TimeBreakdown {
    double compute = 0.0;       // seconds
    double comm = 0.0;          // seconds
    double attn_compute = 0.0;  // seconds, attention-only share of compute
    double attn_comm = 0.0;     // seconds, attention-only share of comm
    double total = 0.0;         // compute + comm - min(attn_compute, attn_comm)
    // True when raw attention terms exceeded their parents and were clamped
    // so that total >= max(compute, comm) always holds.
    bool overlap_clamped = false;
};

// Group memory estimate in capacity units: activation memory per token for
// every member plus the constant model-state term, charged once per group.
inline double estimate_memory(std::span<const SequenceSpec> sequences,
                              const CostCoefficients& coeffs) {
    double activation = 0.0;
    for (const auto& s : sequences)
        activation += static_cast<double>(s.length) * coeffs.mem_per_token;
    return activation + coeffs.mem_model_states;
}

inline double estimate_memory(const AtomicGroup& group, const CostCoefficients& coeffs) {
    return estimate_memory(std::span<const SequenceSpec>(group.sequences), coeffs);
}

// Smallest CP degree whose aggregate memory budget fits the given sequences:
// ceil(memory / per-rank budget), clamped to >= 1. Throws InfeasibleError
// when that degree exceeds the cluster size.
inline int min_degree(std::span<const SequenceSpec> sequences, const ClusterSpec& cluster,
                      const CostCoefficients& coeffs) {
    const double mem = estimate_memory(sequences, coeffs);
    const double ratio = mem / cluster.mem_budget_per_rank;
    int d = static_cast<int>(std::ceil(ratio));
    if (d < 1) d = 1;
    if (d > cluster.num_ranks) {
        std::string ids;
        for (const auto& s : sequences) ids += (ids.empty() ? "" : ",") + s.id;
        throw InfeasibleError("memory " + std::to_string(mem) + " for {" + ids +
                              "} needs degree " + std::to_string(d) +
                              ", exceeds cluster capacity of " +
                              std::to_string(cluster.num_ranks) + " ranks");
    }
    return d;
}

inline int min_degree(const SequenceSpec& sequence, const ClusterSpec& cluster,
                      const CostCoefficients& coeffs) {
    return min_degree(std::span<const SequenceSpec>(&sequence, 1), cluster, coeffs);
}

inline int min_degree(const AtomicGroup& group, const ClusterSpec& cluster,
                      const CostCoefficients& coeffs) {
    return min_degree(std::span<const SequenceSpec>(group.sequences), cluster, coeffs);
}

// P2P bandwidth available to a ring of `degree` ranks under contiguous
// placement: intra-node when the ring fits in one node, otherwise the
// bottleneck inter-node link. Degree 1 has no ring; returns +inf.
inline double group_bandwidth(int degree, const ClusterSpec& cluster) {
    if (degree < 1) throw ValidationError("group_bandwidth: degree must be >= 1");
    if (degree == 1) return std::numeric_limits<double>::infinity();
    return degree <= cluster.ranks_per_node ? cluster.intra_node_bandwidth
                                            : cluster.inter_node_bandwidth;
}

// Bandwidth for an explicit rank set: intra-node only when all ranks share a
// node. Planning uses the degree-based rule above; this overload serves
// diagnostics on concrete placements.
inline double group_bandwidth(std::span<const int> rank_ids, const ClusterSpec& cluster) {
    if (rank_ids.empty()) throw ValidationError("group_bandwidth: empty rank set");
    if (rank_ids.size() == 1) return std::numeric_limits<double>::infinity();
    const int node = cluster.node_of_rank(rank_ids.front());
    for (int r : rank_ids)
        if (cluster.node_of_rank(r) != node) return cluster.inter_node_bandwidth;
    return cluster.intra_node_bandwidth;
}

namespace detail {

// Shared regressor sums: sum_k (1+eta_k)*L_k^2 and sum_k L_k. The attention
// analogues reuse the same sums with their own coefficients.
struct GroupSums {
    double weighted_sq = 0.0;
    double linear = 0.0;
};

inline GroupSums group_sums(std::span<const SequenceSpec> sequences) {
    GroupSums sums;
    for (const auto& s : sequences) {
        const double len = static_cast<double>(s.length);
        sums.weighted_sq += (1.0 + s.mask_efficiency) * len * len;
        sums.linear += len;
    }
    return sums;
}

inline TimeBreakdown time_from_sums(const GroupSums& sums, int degree,
                                    const ClusterSpec& cluster,
                                    const CostCoefficients& coeffs) {
    TimeBreakdown t;
    const double inv_d = 1.0 / static_cast<double>(degree);
    t.compute = inv_d * (coeffs.alpha1 * sums.weighted_sq + coeffs.alpha2 * sums.linear) +
                coeffs.beta1;
    double attn_compute = inv_d * (coeffs.alpha1_attn * sums.weighted_sq +
                                   coeffs.alpha2_attn * sums.linear) +
                          coeffs.beta1_attn;
    double attn_comm = 0.0;
    if (degree == 1) {
        t.comm = 0.0;  // no ring, no communication
    } else {
        const double v = group_bandwidth(degree, cluster);
        t.comm = coeffs.alpha3 * sums.linear / v + coeffs.beta2;
        attn_comm = coeffs.alpha3_attn * sums.linear / v + coeffs.beta2_attn;
    }
    // Attention is a sub-component of each parent term; clamp pathological
    // coefficient combinations so total >= max(compute, comm) always holds.
    if (attn_compute > t.compute) {
        attn_compute = t.compute;
        t.overlap_clamped = true;
    }
    if (attn_comm > t.comm) {
        attn_comm = t.comm;
        t.overlap_clamped = true;
    }
    t.attn_compute = attn_compute;
    t.attn_comm = attn_comm;
    t.total = t.compute + t.comm - std::min(attn_compute, attn_comm);
    return t;
}

}  // namespace detail

// Execution-time estimate of a group under the given CP degree. Ring
// communication of attention overlaps attention compute, so the smaller of
// the two is excluded from the total.
inline TimeBreakdown estimate_time(const AtomicGroup& group, int degree,
                                   const ClusterSpec& cluster,
                                   const CostCoefficients& coeffs) {
    if (degree < 1) throw ValidationError("estimate_time: degree must be >= 1");
    if (degree < group.d_min)
        throw InfeasibleError("estimate_time: degree " + std::to_string(degree) +
                              " below group d_min " + std::to_string(group.d_min) +
                              " (memory infeasible)");
    return detail::time_from_sums(
        detail::group_sums(std::span<const SequenceSpec>(group.sequences)), degree, cluster,
        coeffs);
}

// Single-sequence form used by the profiler: a group holding one sequence of
// the given length and mask efficiency.
inline TimeBreakdown estimate_time_single(std::int64_t length, double mask_efficiency,
                                          int degree, const ClusterSpec& cluster,
                                          const CostCoefficients& coeffs) {
    if (degree < 1) throw ValidationError("estimate_time_single: degree must be >= 1");
    const double len = static_cast<double>(length);
    detail::GroupSums sums;
    sums.weighted_sq = (1.0 + mask_efficiency) * len * len;
    sums.linear = len;
    return detail::time_from_sums(sums, degree, cluster, coeffs);
}

}  // namespace cpsched
