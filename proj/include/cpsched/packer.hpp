#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/types.hpp"

// Stage 1: memory-aware Best-Fit Decreasing. Sequences are sorted by
// descending memory requirement; each either opens a new bin sized by its
// own minimum CP degree (capacity d_min * E) or joins the open bin with the
// smallest sufficient headroom. Bin capacity is frozen when the bin opens;
// packing only fills headroom and never raises a group's d_min.

namespace cpsched {

namespace detail {

struct Bin {
    std::vector<SequenceSpec> members;
    double capacity = 0.0;  // capacity units
    double used = 0.0;      // includes the model-state constant, charged once
    int d_min = 1;

    double headroom() const { return capacity - used; }
};

// Shared BFD core. open_capacity decides the capacity of a bin opened by a
// given sequence; open_degree its d_min annotation. Ties on headroom go to
// the lowest bin index; sort ties break by sequence id ascending.
template <typename CapacityFn, typename DegreeFn>
std::vector<Bin> best_fit_decreasing(std::vector<SequenceSpec> sequences,
                                     const CostCoefficients& coeffs,
                                     CapacityFn open_capacity, DegreeFn open_degree) {
    std::sort(sequences.begin(), sequences.end(),
              [&coeffs](const SequenceSpec& a, const SequenceSpec& b) {
                  const double ma = estimate_memory(std::span<const SequenceSpec>(&a, 1), coeffs);
                  const double mb = estimate_memory(std::span<const SequenceSpec>(&b, 1), coeffs);
                  if (ma != mb) return ma > mb;
                  return a.id < b.id;
              });

    std::vector<Bin> bins;
    for (auto& seq : sequences) {
        const double activation =
            static_cast<double>(seq.length) * coeffs.mem_per_token;

        std::size_t best = bins.size();
        double best_headroom = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bins.size(); ++i) {
            const double hr = bins[i].headroom();
            if (activation <= hr && hr < best_headroom) {
                best_headroom = hr;
                best = i;
            }
        }

        if (best == bins.size()) {
            Bin bin;
            bin.d_min = open_degree(seq);
            bin.capacity = open_capacity(seq, bin.d_min);
            bin.used = estimate_memory(std::span<const SequenceSpec>(&seq, 1), coeffs);
            bin.members.push_back(std::move(seq));
            bins.push_back(std::move(bin));
        } else {
            bins[best].used += activation;
            bins[best].members.push_back(std::move(seq));
        }
    }
    return bins;
}

}  // namespace detail

// Packs a micro-batch of K sequences into K' <= K atomic groups. Errors out
// when a single sequence cannot fit the cluster even at full degree.
inline std::vector<AtomicGroup> pack_bfd(const MicroBatch& batch, const ClusterSpec& cluster,
                                         const CostCoefficients& coeffs) {
    auto bins = detail::best_fit_decreasing(
        batch.sequences, coeffs,
        [&](const SequenceSpec&, int d_min) {
            return static_cast<double>(d_min) * cluster.mem_budget_per_rank;
        },
        [&](const SequenceSpec& seq) { return min_degree(seq, cluster, coeffs); });

    std::vector<AtomicGroup> groups;
    groups.reserve(bins.size());
    for (auto& bin : bins) groups.emplace_back(std::move(bin.members), bin.d_min);
    return groups;
}

}  // namespace cpsched
