#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "cpsched/dp_solver.hpp"
#include "test_helpers.hpp"

using namespace cpsched;

namespace {

// With alpha2 = 1 and everything else zero, a group's time is exactly
// total_tokens / degree, which makes solver examples easy to read.
CostCoefficients workload_per_degree() {
    CostCoefficients c;
    c.alpha2 = 1.0;
    return c;
}

AtomicGroup group_of(const std::string& id, std::int64_t tokens, int d_min = 1) {
    return AtomicGroup({SequenceSpec(id, tokens)}, d_min);
}

}  // namespace

TEST_CASE("equal workloads split the rank budget evenly") {
    ClusterSpec cluster(4, 1e9, 4, 10.0, 10.0);
    const auto coeffs = workload_per_degree();
    std::vector<AtomicGroup> groups{group_of("g0", 8), group_of("g1", 8)};

    const auto solution = solve(groups, cluster, coeffs);
    CHECK(solution.degrees == std::vector<int>{2, 2});
    CHECK(solution.makespan == doctest::Approx(4.0).epsilon(1e-12));

    const auto oracle = brute_force_optimal(groups, cluster, coeffs);
    CHECK(solution.makespan == oracle.makespan);
}

TEST_CASE("uneven workloads get non-uniform degrees") {
    ClusterSpec cluster(4, 1e9, 4, 10.0, 10.0);
    const auto coeffs = workload_per_degree();
    std::vector<AtomicGroup> groups{group_of("g0", 9), group_of("g1", 3)};

    const auto solution = solve(groups, cluster, coeffs);
    // [3,1] reaches makespan 3; the even split [2,2] would sit at 4.5.
    CHECK(solution.degrees == std::vector<int>{3, 1});
    CHECK(solution.makespan == doctest::Approx(3.0).epsilon(1e-12));

    const auto oracle = brute_force_optimal(groups, cluster, coeffs);
    CHECK(solution.makespan == oracle.makespan);
}

TEST_CASE("a single group takes the whole budget under monotone cost") {
    ClusterSpec cluster(6, 1e9, 6, 10.0, 10.0);
    const auto coeffs = workload_per_degree();
    std::vector<AtomicGroup> groups{group_of("g0", 12)};

    const auto solution = solve(groups, cluster, coeffs);
    CHECK(solution.degrees == std::vector<int>{6});
    CHECK(solution.makespan == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("infeasible demand raises the same error in both solvers") {
    ClusterSpec cluster(3, 1e9, 3, 10.0, 10.0);
    const auto coeffs = workload_per_degree();
    std::vector<AtomicGroup> groups{group_of("g0", 8, 2), group_of("g1", 8, 2)};

    CHECK_THROWS_AS(solve(groups, cluster, coeffs), InfeasibleError);
    CHECK_THROWS_AS(brute_force_optimal(groups, cluster, coeffs), InfeasibleError);
}

TEST_CASE("brute force refuses oversized instances") {
    ClusterSpec cluster(16, 1e9, 8, 10.0, 10.0);
    const auto coeffs = workload_per_degree();
    std::vector<AtomicGroup> groups;
    for (int i = 0; i < 8; ++i) groups.push_back(group_of("g" + std::to_string(i), 4));
    CHECK_THROWS_AS(brute_force_optimal(groups, cluster, coeffs), ValidationError);
    // raising the limits makes the same instance acceptable
    CHECK_NOTHROW(brute_force_optimal(groups, cluster, coeffs, BruteForceLimits{8, 16}));
}

TEST_CASE("solver matches exhaustive search on random instances") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto instance = testutil::random_solver_instance(rng);
        const auto fast = solve(instance.groups, instance.cluster, instance.coeffs);
        const auto oracle =
            brute_force_optimal(instance.groups, instance.cluster, instance.coeffs);
        CHECK(fast.makespan == oracle.makespan);  // exact: same cost evaluations

        // returned degrees are feasible and reproduce the makespan
        int total = 0;
        double recomputed = 0.0;
        for (std::size_t i = 0; i < instance.groups.size(); ++i) {
            CHECK(fast.degrees[i] >= instance.groups[i].d_min);
            total += fast.degrees[i];
            recomputed = std::max(
                recomputed, estimate_time(instance.groups[i], fast.degrees[i],
                                          instance.cluster, instance.coeffs)
                                .total);
        }
        CHECK(total <= instance.cluster.num_ranks);
        CHECK(recomputed == fast.makespan);
    }
}

TEST_CASE("a bigger rank budget never hurts") {
    Rng rng(37);
    for (int trial = 0; trial < 150; ++trial) {
        const auto instance = testutil::random_solver_instance(rng);
        const auto base = solve(instance.groups, instance.cluster, instance.coeffs);
        ClusterSpec bigger(instance.cluster.num_ranks + 1,
                           instance.cluster.mem_budget_per_rank,
                           instance.cluster.ranks_per_node,
                           instance.cluster.intra_node_bandwidth,
                           instance.cluster.inter_node_bandwidth);
        const auto grown = solve(instance.groups, bigger, instance.coeffs);
        CHECK(grown.makespan <= base.makespan);
    }
}

TEST_CASE("makespan is invariant under group permutation") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const auto instance = testutil::random_solver_instance(rng);
        const auto base = solve(instance.groups, instance.cluster, instance.coeffs);

        auto shuffled = instance.groups;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        const auto permuted = solve(shuffled, instance.cluster, instance.coeffs);
        CHECK(permuted.makespan == base.makespan);
    }
}

TEST_CASE("cell count stays within the K'N^2 envelope") {
    const auto coeffs = workload_per_degree();
    Rng rng(43);
    for (int n : {8, 16, 32, 64}) {
        ClusterSpec cluster(n, 1e9, 8, 10.0, 10.0);
        for (int kprime : {1, 2, 4, 8}) {
            if (kprime > n) continue;
            std::vector<AtomicGroup> groups;
            for (int i = 0; i < kprime; ++i)
                groups.push_back(group_of("g" + std::to_string(i), rng.int_in(100, 999)));
            const auto solution = solve(groups, cluster, coeffs);
            const auto bound = static_cast<std::uint64_t>(kprime) *
                               static_cast<std::uint64_t>(n) *
                               static_cast<std::uint64_t>(n);
            CHECK(solution.table_cells_evaluated <= bound);
        }
    }
}

TEST_CASE("ties prefer fewer ranks") {
    // Flat cost: beta1 only, so every degree ties; the solver should keep
    // every group at its minimum degree.
    ClusterSpec cluster(12, 1e9, 12, 10.0, 10.0);
    CostCoefficients c;
    c.beta1 = 0.5;
    std::vector<AtomicGroup> groups{group_of("g0", 10), group_of("g1", 10)};
    const auto solution = solve(groups, cluster, c);
    CHECK(solution.degrees == std::vector<int>{1, 1});
}
