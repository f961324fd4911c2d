#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "cpsched/packer.hpp"
#include "test_helpers.hpp"

using namespace cpsched;

namespace {

// Reference best-fit-decreasing, written directly from the rule: sort by
// descending memory, open a bin sized d_min * E or join the fullest
// sufficient bin. Independent of the production data layout.
std::vector<std::vector<std::string>> reference_bfd(const MicroBatch& batch,
                                                    const ClusterSpec& cluster,
                                                    const CostCoefficients& coeffs) {
    struct Item {
        std::string id;
        double activation;
        double memory;
    };
    std::vector<Item> items;
    for (const auto& s : batch.sequences) {
        const double act = static_cast<double>(s.length) * coeffs.mem_per_token;
        items.push_back({s.id, act, act + coeffs.mem_model_states});
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.memory != b.memory) return a.memory > b.memory;
        return a.id < b.id;
    });

    struct RefBin {
        std::vector<std::string> ids;
        double free;
    };
    std::vector<RefBin> bins;
    for (const auto& item : items) {
        int best = -1;
        for (int i = 0; i < static_cast<int>(bins.size()); ++i) {
            if (bins[i].free < item.activation) continue;
            if (best < 0 || bins[i].free < bins[best].free) best = i;
        }
        if (best < 0) {
            const double d_min = std::max(
                1.0, std::ceil(item.memory / cluster.mem_budget_per_rank));
            bins.push_back({{item.id},
                            d_min * cluster.mem_budget_per_rank - item.memory});
        } else {
            bins[best].ids.push_back(item.id);
            bins[best].free -= item.activation;
        }
    }
    std::vector<std::vector<std::string>> out;
    for (auto& b : bins) out.push_back(std::move(b.ids));
    return out;
}

CostCoefficients token_coeffs(double mem_model_states = 0.0) {
    CostCoefficients c;
    c.mem_per_token = 1.0;
    c.mem_model_states = mem_model_states;
    return c;
}

}  // namespace

TEST_CASE("hand-traced packing: 12 opens a 2-rank bin, 3 best-fits back in") {
    ClusterSpec cluster(8, 10.0, 8, 5.0, 5.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 12), SequenceSpec("b", 5), SequenceSpec("c", 4),
                      SequenceSpec("d", 3)});

    const auto groups = pack_bfd(batch, cluster, coeffs);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].sequence_ids() == std::vector<std::string>{"a", "b", "d"});
    CHECK(groups[0].d_min == 2);
    CHECK(groups[0].total_tokens == 20);
    CHECK(groups[1].sequence_ids() == std::vector<std::string>{"c"});
    CHECK(groups[1].d_min == 1);
}

TEST_CASE("a single sequence packs into a single group") {
    ClusterSpec cluster(8, 10.0, 8, 5.0, 5.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("only", 37)});
    const auto groups = pack_bfd(batch, cluster, coeffs);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].d_min == 4);  // ceil(37 / 10)
    CHECK(groups[0].sequences.size() == 1);
}

TEST_CASE("sequences that exactly fill a rank leave no headroom") {
    ClusterSpec cluster(8, 10.0, 8, 5.0, 5.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 10), SequenceSpec("b", 10), SequenceSpec("c", 10)});
    const auto groups = pack_bfd(batch, cluster, coeffs);
    REQUIRE(groups.size() == 3);
    for (const auto& g : groups) {
        CHECK(g.sequences.size() == 1);
        CHECK(g.d_min == 1);
    }
}

TEST_CASE("a sequence too big for the cluster is an error") {
    ClusterSpec cluster(4, 10.0, 4, 5.0, 5.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 41)});
    CHECK_THROWS_AS(pack_bfd(batch, cluster, coeffs), InfeasibleError);
}

TEST_CASE("packing properties hold on random workloads") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const int count = static_cast<int>(rng.int_in(1, 60));
        const auto sequences = testutil::random_sequences(rng, count, 1, 4000);
        const double budget = rng.uniform(500.0, 6000.0);
        ClusterSpec cluster(64, budget, 8, 10.0, 10.0);
        const auto coeffs = token_coeffs(rng.uniform(0.0, budget / 4.0));
        MicroBatch batch{sequences};

        const auto groups = pack_bfd(batch, cluster, coeffs);

        // Partition: every sequence in exactly one group.
        std::multiset<std::string> seen;
        for (const auto& g : groups)
            for (const auto& s : g.sequences) seen.insert(s.id);
        CHECK(seen.size() == sequences.size());
        for (const auto& s : sequences) CHECK(seen.count(s.id) == 1);

        // Capacity: group memory within d_min * E; d_min consistent.
        long long sum_group_min = 0;
        for (const auto& g : groups) {
            const double mem = estimate_memory(g, coeffs);
            CHECK(mem <= g.d_min * cluster.mem_budget_per_rank + 1e-9);
            CHECK(g.d_min == min_degree(g, cluster, coeffs));
            sum_group_min += g.d_min;
        }

        // Never more groups than sequences, never more total demand.
        CHECK(groups.size() <= sequences.size());
        long long sum_seq_min = 0;
        for (const auto& s : sequences) sum_seq_min += min_degree(s, cluster, coeffs);
        CHECK(sum_group_min <= sum_seq_min);

        // Grouping agrees with the reference implementation.
        const auto reference = reference_bfd(batch, cluster, coeffs);
        REQUIRE(groups.size() == reference.size());
        for (std::size_t i = 0; i < groups.size(); ++i)
            CHECK(groups[i].sequence_ids() == reference[i]);
    }
}

TEST_CASE("packing is deterministic and order-insensitive") {
    Rng rng(29);
    const auto sequences = testutil::random_sequences(rng, 40, 1, 3000);
    ClusterSpec cluster(64, 2000.0, 8, 10.0, 10.0);
    const auto coeffs = token_coeffs(100.0);

    const auto first = pack_bfd(MicroBatch{sequences}, cluster, coeffs);
    const auto second = pack_bfd(MicroBatch{sequences}, cluster, coeffs);

    auto shuffled = sequences;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const auto third = pack_bfd(MicroBatch{shuffled}, cluster, coeffs);

    REQUIRE(first.size() == second.size());
    REQUIRE(first.size() == third.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].sequence_ids() == second[i].sequence_ids());
        CHECK(first[i].sequence_ids() == third[i].sequence_ids());
        CHECK(first[i].d_min == third[i].d_min);
    }
}
