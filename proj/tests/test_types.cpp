#include <doctest.h>

#include <limits>

#include "cpsched/cost_model.hpp"
#include "cpsched/types.hpp"
#include "cpsched/validate.hpp"

using namespace cpsched;

namespace {

CostCoefficients token_coeffs() {
    CostCoefficients c;
    c.alpha2 = 1.0;
    c.mem_per_token = 1.0;
    return c;
}

bool has_code(const std::vector<Violation>& violations, const std::string& code) {
    for (const auto& v : violations)
        if (v.code == code) return true;
    return false;
}

}  // namespace

TEST_CASE("field invariants are rejected at construction") {
    CHECK_THROWS_AS(SequenceSpec("", 10), ValidationError);
    CHECK_THROWS_AS(SequenceSpec("a", 0), ValidationError);
    CHECK_THROWS_AS(SequenceSpec("a", -5), ValidationError);
    CHECK_THROWS_AS(SequenceSpec("a", 10, -0.1), ValidationError);
    CHECK_THROWS_AS(SequenceSpec("a", 10, std::numeric_limits<double>::infinity()),
                    ValidationError);
    CHECK_NOTHROW(SequenceSpec("a", 1, 0.0));

    CHECK_THROWS_AS(ClusterSpec(0, 1.0, 1, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(ClusterSpec(4, 0.0, 1, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(ClusterSpec(4, 1.0, 0, 1.0, 1.0), ValidationError);
    // inter-node bandwidth may not exceed intra-node
    CHECK_THROWS_AS(ClusterSpec(4, 1.0, 2, 1.0, 2.0), ValidationError);
    CHECK_NOTHROW(ClusterSpec(4, 1.0, 2, 2.0, 2.0));

    CostCoefficients c;
    c.alpha1 = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = CostCoefficients{};
    c.alpha1 = 1e-9;
    c.alpha1_attn = 2e-9;  // attention exceeds parent
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = CostCoefficients{};
    c.alpha3 = 0.5;
    c.alpha3_attn = 0.6;
    CHECK_THROWS_AS(c.validate(), ValidationError);

    CHECK_THROWS_AS(MicroBatch({}), ValidationError);
    CHECK_THROWS_AS(MicroBatch({SequenceSpec("a", 1), SequenceSpec("a", 2)}),
                    ValidationError);

    CHECK_THROWS_AS(AtomicGroup({}, 1), ValidationError);
    CHECK_THROWS_AS(AtomicGroup({SequenceSpec("a", 5)}, 0), ValidationError);

    AtomicGroup group({SequenceSpec("a", 5), SequenceSpec("b", 3)}, 2);
    CHECK(group.total_tokens == 8);
    CHECK(group.sequence_ids() == std::vector<std::string>{"a", "b"});

    // degree below the group's minimum
    CHECK_THROWS_AS(CPGroupAssignment(group, 1, {0}, 1.0), ValidationError);
    // rank list size must equal degree
    CHECK_THROWS_AS(CPGroupAssignment(group, 2, {0}, 1.0), ValidationError);
    CHECK_THROWS_AS(CPGroupAssignment(group, 2, {0, 0}, 1.0), ValidationError);
    CHECK_THROWS_AS(CPGroupAssignment(group, 2, {0, -1}, 1.0), ValidationError);
    CHECK_THROWS_AS(CPGroupAssignment(group, 2, {0, 1}, -1.0), ValidationError);
    CHECK_NOTHROW(CPGroupAssignment(group, 2, {0, 1}, 1.0));

    CHECK_THROWS_AS(SchedulePlan(0, {}), ValidationError);
    CPGroupAssignment a(group, 2, {0, 1}, 1.5);
    CHECK_THROWS_AS(SchedulePlan(-1, {a}), ValidationError);
    CHECK_THROWS_AS(SchedulePlan(0, {a}, {2, 2}), ValidationError);
}

TEST_CASE("plan makespan is derived from assignment times") {
    AtomicGroup g1({SequenceSpec("a", 5)}, 1);
    AtomicGroup g2({SequenceSpec("b", 9)}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(g1, 1, {0}, 2.0),
                          CPGroupAssignment(g2, 1, {1}, 5.0)});
    CHECK(plan.makespan == 5.0);
    CHECK(plan.ranks_used() == 2);
}

TEST_CASE("validate_plan flags a double-assigned rank") {
    ClusterSpec cluster(4, 100.0, 4, 10.0, 10.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 10), SequenceSpec("b", 10)});

    AtomicGroup ga({batch.sequences[0]}, 1);
    AtomicGroup gb({batch.sequences[1]}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(ga, 2, {0, 1}, 1.0),
                          CPGroupAssignment(gb, 2, {1, 2}, 1.0)});

    const auto violations = validate_plan(plan, batch, cluster, coeffs);
    CHECK(has_code(violations, "rank_double_assigned"));
}

TEST_CASE("validate_plan flags an unassigned sequence") {
    ClusterSpec cluster(4, 100.0, 4, 10.0, 10.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 10), SequenceSpec("b", 10)});

    AtomicGroup ga({batch.sequences[0]}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(ga, 1, {0}, 1.0)});

    const auto violations = validate_plan(plan, batch, cluster, coeffs);
    CHECK(has_code(violations, "sequence_unassigned"));
}

TEST_CASE("validate_plan reports dangling references as violations") {
    ClusterSpec cluster(2, 100.0, 2, 10.0, 10.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 10)});

    AtomicGroup ga({batch.sequences[0]}, 1);
    AtomicGroup stranger({SequenceSpec("zz", 10)}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(ga, 1, {0}, 1.0),
                          CPGroupAssignment(stranger, 1, {5}, 1.0)});

    const auto violations = validate_plan(plan, batch, cluster, coeffs);
    CHECK(has_code(violations, "sequence_unknown"));
    CHECK(has_code(violations, "rank_out_of_range"));
}

TEST_CASE("validate_plan enforces memory and rank budgets") {
    ClusterSpec cluster(2, 10.0, 2, 10.0, 10.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 25), SequenceSpec("b", 4)});

    // 25 tokens at degree 1 exceed the 10-unit budget.
    AtomicGroup heavy({batch.sequences[0]}, 1);
    AtomicGroup light({batch.sequences[1]}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(heavy, 1, {0}, 1.0),
                          CPGroupAssignment(light, 2, {1, 2}, 1.0)});

    const auto violations = validate_plan(plan, batch, cluster, coeffs);
    CHECK(has_code(violations, "memory_exceeded"));
    CHECK(has_code(violations, "rank_budget_exceeded"));
    CHECK(has_code(violations, "rank_out_of_range"));
}

TEST_CASE("validate_plan accepts a correct plan") {
    ClusterSpec cluster(4, 100.0, 4, 10.0, 10.0);
    const auto coeffs = token_coeffs();
    MicroBatch batch({SequenceSpec("a", 10), SequenceSpec("b", 10)});

    AtomicGroup ga({batch.sequences[0]}, 1);
    AtomicGroup gb({batch.sequences[1]}, 1);
    SchedulePlan plan(0, {CPGroupAssignment(ga, 1, {0}, 1.0),
                          CPGroupAssignment(gb, 2, {1, 2}, 1.0)});

    CHECK(validate_plan(plan, batch, cluster, coeffs).empty());
}
