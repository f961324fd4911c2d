#pragma once

#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cpsched/baselines.hpp"
#include "cpsched/errors.hpp"
#include "cpsched/planner.hpp"
#include "cpsched/profiler_fit.hpp"
#include "cpsched/types.hpp"
#include "cpsched/workload.hpp"

// JSON file formats for batches, traces, plans, reports and workload
// configs. Parsing is strict: every object lists its allowed keys, unknown
// or missing fields fail with the JSON path, and schema strings are
// versioned. Plan files are additionally checked for structural validity
// (rank overlap, duplicate sequences, stored derived values) on load.

namespace cpsched::io {

using json = nlohmann::json;

inline constexpr const char* kBatchSchema = "cpsched.batch/1";
inline constexpr const char* kClusterSchema = "cpsched.cluster/1";
inline constexpr const char* kCoeffsSchema = "cpsched.coeffs/1";
inline constexpr const char* kTraceSchema = "cpsched.trace/1";
inline constexpr const char* kPlanSchema = "cpsched.plan/1";
inline constexpr const char* kReportSchema = "cpsched.report/1";
inline constexpr const char* kWorkloadSchema = "cpsched.workload/1";
inline constexpr const char* kCompareSchema = "cpsched.compare/1";
inline constexpr const char* kFitSchema = "cpsched.fit/1";

namespace detail {

// Navigation helper carrying the JSON path for error messages.
class Cursor {
public:
    Cursor(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return *node_; }

    Cursor child(const std::string& key) const {
        auto it = node_->find(key);
        if (it == node_->end())
            throw ParseError(path_ + ": missing required field '" + key + "'");
        return Cursor(*it, path_ + "." + key);
    }

    std::optional<Cursor> optional_child(const std::string& key) const {
        auto it = node_->find(key);
        if (it == node_->end() || it->is_null()) return std::nullopt;
        return Cursor(*it, path_ + "." + key);
    }

    Cursor element(std::size_t i) const {
        return Cursor((*node_)[i], path_ + "[" + std::to_string(i) + "]");
    }

    void expect_object(std::initializer_list<const char*> allowed) const {
        if (!node_->is_object()) throw ParseError(path_ + ": expected an object");
        std::unordered_set<std::string> ok;
        for (const char* key : allowed) ok.insert(key);
        for (const auto& item : node_->items())
            if (!ok.count(item.key()))
                throw ParseError(path_ + ": unknown field '" + item.key() + "'");
    }

    std::size_t array_size() const {
        if (!node_->is_array()) throw ParseError(path_ + ": expected an array");
        return node_->size();
    }

    std::string as_string() const {
        if (!node_->is_string()) throw ParseError(path_ + ": expected a string");
        return node_->get<std::string>();
    }

    double as_double() const {
        if (!node_->is_number()) throw ParseError(path_ + ": expected a number");
        return node_->get<double>();
    }

    std::int64_t as_int() const {
        if (!node_->is_number_integer())
            throw ParseError(path_ + ": expected an integer");
        return node_->get<std::int64_t>();
    }

    std::uint64_t as_uint64() const {
        if (!node_->is_number_unsigned() && !(node_->is_number_integer() &&
                                              node_->get<std::int64_t>() >= 0))
            throw ParseError(path_ + ": expected a non-negative integer");
        return node_->get<std::uint64_t>();
    }

    bool as_bool() const {
        if (!node_->is_boolean()) throw ParseError(path_ + ": expected a boolean");
        return node_->get<bool>();
    }

private:
    const json* node_;
    std::string path_;
};

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return json::parse(in);  // nlohmann reports line/column in its message
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline void expect_schema(const Cursor& root, const char* want) {
    const std::string got = root.child("schema").as_string();
    if (got != want)
        throw ParseError(root.path() + ".schema: expected '" + std::string(want) +
                         "', got '" + got + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sequences and batches

inline json sequence_to_json(const SequenceSpec& s) {
    return json{{"id", s.id}, {"length", s.length}, {"mask_efficiency", s.mask_efficiency}};
}

inline SequenceSpec parse_sequence(const detail::Cursor& c) {
    c.expect_object({"id", "length", "mask_efficiency"});
    const std::string id = c.child("id").as_string();
    const std::int64_t length = c.child("length").as_int();
    double eta = 0.0;
    if (auto e = c.optional_child("mask_efficiency")) eta = e->as_double();
    try {
        return SequenceSpec(id, length, eta);
    } catch (const ValidationError& e) {
        throw ParseError(c.path() + ": " + e.what());
    }
}

inline void write_batch_file(const std::string& path, std::span<const SequenceSpec> batch) {
    json seqs = json::array();
    for (const auto& s : batch) seqs.push_back(sequence_to_json(s));
    detail::save_json(path, json{{"schema", kBatchSchema}, {"sequences", std::move(seqs)}});
}

inline std::vector<SequenceSpec> read_batch_file(const std::string& path) {
    const json j = detail::load_json(path);
    detail::Cursor root(j, "$");
    root.expect_object({"schema", "sequences"});
    detail::expect_schema(root, kBatchSchema);
    const auto seqs = root.child("sequences");
    std::vector<SequenceSpec> out;
    out.reserve(seqs.array_size());
    for (std::size_t i = 0; i < seqs.array_size(); ++i)
        out.push_back(parse_sequence(seqs.element(i)));
    cpsched::detail::require_unique_ids(out, path);
    return out;
}

// ---------------------------------------------------------------------------
// Cluster and coefficients

inline void write_cluster_file(const std::string& path, const ClusterSpec& c) {
    detail::save_json(path, json{{"schema", kClusterSchema},
                                 {"num_ranks", c.num_ranks},
                                 {"mem_budget_per_rank", c.mem_budget_per_rank},
                                 {"ranks_per_node", c.ranks_per_node},
                                 {"intra_node_bandwidth", c.intra_node_bandwidth},
                                 {"inter_node_bandwidth", c.inter_node_bandwidth}});
}

inline ClusterSpec read_cluster_file(const std::string& path) {
    const json j = detail::load_json(path);
    detail::Cursor root(j, "$");
    root.expect_object({"schema", "num_ranks", "mem_budget_per_rank", "ranks_per_node",
                        "intra_node_bandwidth", "inter_node_bandwidth"});
    detail::expect_schema(root, kClusterSchema);
    try {
        return ClusterSpec(static_cast<int>(root.child("num_ranks").as_int()),
                           root.child("mem_budget_per_rank").as_double(),
                           static_cast<int>(root.child("ranks_per_node").as_int()),
                           root.child("intra_node_bandwidth").as_double(),
                           root.child("inter_node_bandwidth").as_double());
    } catch (const ValidationError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline json coeffs_to_json(const CostCoefficients& c) {
    return json{{"alpha1", c.alpha1},
                {"alpha2", c.alpha2},
                {"beta1", c.beta1},
                {"alpha3", c.alpha3},
                {"beta2", c.beta2},
                {"alpha1_attn", c.alpha1_attn},
                {"alpha2_attn", c.alpha2_attn},
                {"beta1_attn", c.beta1_attn},
                {"alpha3_attn", c.alpha3_attn},
                {"beta2_attn", c.beta2_attn},
                {"mem_per_token", c.mem_per_token},
                {"mem_model_states", c.mem_model_states}};
}

inline void write_coeffs_file(const std::string& path, const CostCoefficients& c) {
    json j = coeffs_to_json(c);
    j["schema"] = kCoeffsSchema;
    detail::save_json(path, j);
}

inline CostCoefficients parse_coeffs(const detail::Cursor& c, bool with_schema) {
    if (with_schema) {
        c.expect_object({"schema", "alpha1", "alpha2", "beta1", "alpha3", "beta2",
                         "alpha1_attn", "alpha2_attn", "beta1_attn", "alpha3_attn",
                         "beta2_attn", "mem_per_token", "mem_model_states"});
        detail::expect_schema(c, kCoeffsSchema);
    } else {
        c.expect_object({"alpha1", "alpha2", "beta1", "alpha3", "beta2", "alpha1_attn",
                         "alpha2_attn", "beta1_attn", "alpha3_attn", "beta2_attn",
                         "mem_per_token", "mem_model_states"});
    }
    CostCoefficients out;
    out.alpha1 = c.child("alpha1").as_double();
    out.alpha2 = c.child("alpha2").as_double();
    out.beta1 = c.child("beta1").as_double();
    out.alpha3 = c.child("alpha3").as_double();
    out.beta2 = c.child("beta2").as_double();
    out.alpha1_attn = c.child("alpha1_attn").as_double();
    out.alpha2_attn = c.child("alpha2_attn").as_double();
    out.beta1_attn = c.child("beta1_attn").as_double();
    out.alpha3_attn = c.child("alpha3_attn").as_double();
    out.beta2_attn = c.child("beta2_attn").as_double();
    out.mem_per_token = c.child("mem_per_token").as_double();
    out.mem_model_states = c.child("mem_model_states").as_double();
    try {
        out.validate();
    } catch (const ValidationError& e) {
        throw ParseError(c.path() + ": " + e.what());
    }
    return out;
}

inline CostCoefficients read_coeffs_file(const std::string& path) {
    const json j = detail::load_json(path);
    return parse_coeffs(detail::Cursor(j, "$"), /*with_schema=*/true);
}

// ---------------------------------------------------------------------------
// Traces

inline void write_trace_file(const std::string& path, std::span<const TraceSample> samples) {
    json arr = json::array();
    for (const auto& s : samples) {
        json item{{"length", s.length},
                  {"degree", s.degree},
                  {"mask_efficiency", s.mask_efficiency},
                  {"measured_time", s.measured_time},
                  {"phase", phase_name(s.phase)}};
        if (s.measured_memory) item["measured_memory"] = *s.measured_memory;
        arr.push_back(std::move(item));
    }
    detail::save_json(path, json{{"schema", kTraceSchema}, {"samples", std::move(arr)}});
}

inline std::vector<TraceSample> read_trace_file(const std::string& path) {
    const json j = detail::load_json(path);
    detail::Cursor root(j, "$");
    root.expect_object({"schema", "samples"});
    detail::expect_schema(root, kTraceSchema);
    const auto samples = root.child("samples");
    std::vector<TraceSample> out;
    out.reserve(samples.array_size());
    for (std::size_t i = 0; i < samples.array_size(); ++i) {
        const auto c = samples.element(i);
        c.expect_object({"length", "degree", "mask_efficiency", "measured_time",
                         "measured_memory", "phase"});
        TraceSample s;
        s.length = c.child("length").as_int();
        s.degree = static_cast<int>(c.child("degree").as_int());
        if (auto e = c.optional_child("mask_efficiency")) s.mask_efficiency = e->as_double();
        s.measured_time = c.child("measured_time").as_double();
        if (auto m = c.optional_child("measured_memory")) s.measured_memory = m->as_double();
        const std::string phase = c.child("phase").as_string();
        const auto parsed = phase_from_name(phase);
        if (!parsed)
            throw ParseError(c.path() + ".phase: unknown phase '" + phase + "'");
        s.phase = *parsed;
        try {
            s.validate();
        } catch (const ValidationError& e) {
            throw ParseError(c.path() + ": " + e.what());
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plans

inline json plan_to_json(const SchedulePlan& plan) {
    json assignments = json::array();
    for (const auto& a : plan.assignments) {
        json seqs = json::array();
        for (const auto& s : a.group.sequences) seqs.push_back(sequence_to_json(s));
        assignments.push_back(json{{"degree", a.degree},
                                   {"rank_ids", a.rank_ids},
                                   {"predicted_time", a.predicted_time},
                                   {"group", json{{"d_min", a.group.d_min},
                                                  {"total_tokens", a.group.total_tokens},
                                                  {"sequences", std::move(seqs)}}}});
    }
    return json{{"micro_batch_index", plan.micro_batch_index},
                {"makespan", plan.makespan},
                {"idle_ranks", plan.idle_ranks},
                {"assignments", std::move(assignments)}};
}

inline void write_plan_file(const std::string& path, std::span<const SchedulePlan> plans) {
    json arr = json::array();
    for (const auto& p : plans) arr.push_back(plan_to_json(p));
    detail::save_json(path, json{{"schema", kPlanSchema}, {"plans", std::move(arr)}});
}

inline SchedulePlan parse_plan(const detail::Cursor& c) {
    c.expect_object({"micro_batch_index", "makespan", "idle_ranks", "assignments"});
    const int mb_index = static_cast<int>(c.child("micro_batch_index").as_int());

    const auto assignments_cursor = c.child("assignments");
    std::vector<CPGroupAssignment> assignments;
    for (std::size_t i = 0; i < assignments_cursor.array_size(); ++i) {
        const auto ac = assignments_cursor.element(i);
        ac.expect_object({"degree", "rank_ids", "predicted_time", "group"});
        const int degree = static_cast<int>(ac.child("degree").as_int());
        const double predicted = ac.child("predicted_time").as_double();

        const auto ranks_cursor = ac.child("rank_ids");
        std::vector<int> ranks;
        for (std::size_t r = 0; r < ranks_cursor.array_size(); ++r)
            ranks.push_back(static_cast<int>(ranks_cursor.element(r).as_int()));

        const auto gc = ac.child("group");
        gc.expect_object({"d_min", "total_tokens", "sequences"});
        const int d_min = static_cast<int>(gc.child("d_min").as_int());
        const std::int64_t stored_tokens = gc.child("total_tokens").as_int();
        const auto seqs_cursor = gc.child("sequences");
        std::vector<SequenceSpec> seqs;
        for (std::size_t s = 0; s < seqs_cursor.array_size(); ++s)
            seqs.push_back(parse_sequence(seqs_cursor.element(s)));

        try {
            AtomicGroup group(std::move(seqs), d_min);
            if (group.total_tokens != stored_tokens)
                throw ValidationError("stored total_tokens " + std::to_string(stored_tokens) +
                                      " does not match member lengths (" +
                                      std::to_string(group.total_tokens) + ")");
            assignments.emplace_back(std::move(group), degree, std::move(ranks), predicted);
        } catch (const ValidationError& e) {
            throw ValidationError(ac.path() + ": " + e.what());
        }
    }

    const auto idle_cursor = c.child("idle_ranks");
    std::vector<int> idle;
    for (std::size_t r = 0; r < idle_cursor.array_size(); ++r)
        idle.push_back(static_cast<int>(idle_cursor.element(r).as_int()));

    SchedulePlan plan(mb_index, std::move(assignments), std::move(idle));

    const double stored_makespan = c.child("makespan").as_double();
    if (stored_makespan != plan.makespan)
        throw ValidationError(c.path() + ".makespan: stored " +
                              std::to_string(stored_makespan) +
                              " does not equal max predicted_time");

    // Structural validity within the plan: no rank may serve two groups and
    // no sequence may appear twice.
    std::unordered_set<int> ranks_seen;
    std::unordered_set<std::string> ids_seen;
    for (const auto& a : plan.assignments) {
        for (int r : a.rank_ids)
            if (!ranks_seen.insert(r).second)
                throw ValidationError(c.path() + ": rank " + std::to_string(r) +
                                      " assigned to more than one group");
        for (const auto& s : a.group.sequences)
            if (!ids_seen.insert(s.id).second)
                throw ValidationError(c.path() + ": sequence '" + s.id +
                                      "' assigned to more than one group");
    }
    return plan;
}

inline std::vector<SchedulePlan> read_plan_file(const std::string& path) {
    const json j = detail::load_json(path);
    detail::Cursor root(j, "$");
    root.expect_object({"schema", "plans"});
    detail::expect_schema(root, kPlanSchema);
    const auto plans_cursor = root.child("plans");
    std::vector<SchedulePlan> out;
    out.reserve(plans_cursor.array_size());
    for (std::size_t i = 0; i < plans_cursor.array_size(); ++i)
        out.push_back(parse_plan(plans_cursor.element(i)));
    return out;
}

// ---------------------------------------------------------------------------
// Simulation reports

inline json report_to_json(const SimReport& r) {
    return json{{"plan_source", r.plan_source},
                {"per_group_time", r.per_group_time},
                {"per_plan_makespan", r.per_plan_makespan},
                {"makespan", r.makespan},
                {"total_rank_seconds", r.total_rank_seconds},
                {"busy_rank_seconds", r.busy_rank_seconds},
                {"idle_fraction", r.idle_fraction}};
}

inline void write_report_file(const std::string& path, const SimReport& r) {
    json j = report_to_json(r);
    j["schema"] = kReportSchema;
    detail::save_json(path, j);
}

inline SimReport parse_report(const detail::Cursor& c, bool with_schema) {
    if (with_schema) {
        c.expect_object({"schema", "plan_source", "per_group_time", "per_plan_makespan",
                         "makespan", "total_rank_seconds", "busy_rank_seconds",
                         "idle_fraction"});
        detail::expect_schema(c, kReportSchema);
    } else {
        c.expect_object({"plan_source", "per_group_time", "per_plan_makespan", "makespan",
                         "total_rank_seconds", "busy_rank_seconds", "idle_fraction"});
    }
    SimReport r;
    r.plan_source = c.child("plan_source").as_string();
    const auto pgt = c.child("per_group_time");
    for (std::size_t i = 0; i < pgt.array_size(); ++i) {
        const auto row = pgt.element(i);
        std::vector<double> times;
        for (std::size_t k = 0; k < row.array_size(); ++k)
            times.push_back(row.element(k).as_double());
        r.per_group_time.push_back(std::move(times));
    }
    const auto ppm = c.child("per_plan_makespan");
    for (std::size_t i = 0; i < ppm.array_size(); ++i)
        r.per_plan_makespan.push_back(ppm.element(i).as_double());
    r.makespan = c.child("makespan").as_double();
    r.total_rank_seconds = c.child("total_rank_seconds").as_double();
    r.busy_rank_seconds = c.child("busy_rank_seconds").as_double();
    r.idle_fraction = c.child("idle_fraction").as_double();
    return r;
}

inline SimReport read_report_file(const std::string& path) {
    const json j = detail::load_json(path);
    return parse_report(detail::Cursor(j, "$"), /*with_schema=*/true);
}

// ---------------------------------------------------------------------------
// Workload configs

inline json workload_to_json(const WorkloadConfig& w) {
    json dist;
    if (const auto* d = std::get_if<LognormalDist>(&w.distribution))
        dist = json{{"kind", "lognormal"}, {"mu", d->mu}, {"sigma", d->sigma}};
    else if (const auto* d = std::get_if<ParetoDist>(&w.distribution))
        dist = json{{"kind", "pareto"}, {"alpha", d->alpha}, {"x_min", d->x_min}};
    else if (const auto* d = std::get_if<UniformDist>(&w.distribution))
        dist = json{{"kind", "uniform"}, {"lo", d->lo}, {"hi", d->hi}};
    else {
        const auto& e = std::get<EmpiricalDist>(w.distribution);
        json bins = json::array();
        for (const auto& b : e.bins)
            bins.push_back(json{{"lo", b.lo}, {"hi", b.hi}, {"weight", b.weight}});
        dist = json{{"kind", "empirical"}, {"bins", std::move(bins)}};
    }

    json eta;
    if (const auto* constant = std::get_if<double>(&w.eta_policy))
        eta = json{{"kind", "constant"}, {"eta", *constant}};
    else {
        const auto& modalities = std::get<std::vector<ModalityEta>>(w.eta_policy);
        json arr = json::array();
        for (const auto& m : modalities)
            arr.push_back(json{{"modality", m.modality},
                               {"fraction", m.fraction},
                               {"eta", m.eta}});
        eta = json{{"kind", "per_modality"}, {"modalities", std::move(arr)}};
    }

    return json{{"schema", kWorkloadSchema},
                {"distribution", std::move(dist)},
                {"tokens_per_second", w.tokens_per_second},
                {"count", w.count},
                {"eta_policy", std::move(eta)},
                {"seed", w.seed}};
}

inline void write_workload_file(const std::string& path, const WorkloadConfig& w) {
    detail::save_json(path, workload_to_json(w));
}

inline WorkloadConfig parse_workload(const detail::Cursor& root) {
    root.expect_object({"schema", "distribution", "tokens_per_second", "count",
                        "eta_policy", "seed"});
    detail::expect_schema(root, kWorkloadSchema);

    WorkloadConfig w;
    const auto dist = root.child("distribution");
    const std::string kind = dist.child("kind").as_string();
    if (kind == "lognormal") {
        dist.expect_object({"kind", "mu", "sigma"});
        w.distribution = LognormalDist{dist.child("mu").as_double(),
                                       dist.child("sigma").as_double()};
    } else if (kind == "pareto") {
        dist.expect_object({"kind", "alpha", "x_min"});
        w.distribution = ParetoDist{dist.child("alpha").as_double(),
                                    dist.child("x_min").as_double()};
    } else if (kind == "uniform") {
        dist.expect_object({"kind", "lo", "hi"});
        w.distribution = UniformDist{dist.child("lo").as_double(),
                                     dist.child("hi").as_double()};
    } else if (kind == "empirical") {
        dist.expect_object({"kind", "bins"});
        EmpiricalDist e;
        const auto bins = dist.child("bins");
        for (std::size_t i = 0; i < bins.array_size(); ++i) {
            const auto b = bins.element(i);
            b.expect_object({"lo", "hi", "weight"});
            e.bins.push_back(HistogramBin{b.child("lo").as_double(),
                                          b.child("hi").as_double(),
                                          b.child("weight").as_double()});
        }
        w.distribution = std::move(e);
    } else {
        throw ParseError(dist.path() + ".kind: unknown distribution '" + kind + "'");
    }

    w.tokens_per_second = root.child("tokens_per_second").as_double();
    w.count = root.child("count").as_int();
    w.seed = root.child("seed").as_uint64();

    const auto eta = root.child("eta_policy");
    const std::string eta_kind = eta.child("kind").as_string();
    if (eta_kind == "constant") {
        eta.expect_object({"kind", "eta"});
        w.eta_policy = eta.child("eta").as_double();
    } else if (eta_kind == "per_modality") {
        eta.expect_object({"kind", "modalities"});
        std::vector<ModalityEta> modalities;
        const auto arr = eta.child("modalities");
        for (std::size_t i = 0; i < arr.array_size(); ++i) {
            const auto m = arr.element(i);
            m.expect_object({"modality", "fraction", "eta"});
            modalities.push_back(ModalityEta{m.child("modality").as_string(),
                                             m.child("fraction").as_double(),
                                             m.child("eta").as_double()});
        }
        w.eta_policy = std::move(modalities);
    } else {
        throw ParseError(eta.path() + ".kind: unknown eta policy '" + eta_kind + "'");
    }

    try {
        w.validate();
    } catch (const ValidationError& e) {
        throw ParseError(root.path() + ": " + e.what());
    }
    return w;
}

inline WorkloadConfig read_workload_file(const std::string& path) {
    const json j = detail::load_json(path);
    return parse_workload(detail::Cursor(j, "$"));
}

// ---------------------------------------------------------------------------
// Comparison reports (output-only artifact)

inline json comparison_to_json(const ComparisonReport& r) {
    json shapes = json::array();
    std::map<std::string, int> shape_tally;
    for (const auto& s : r.dynamic_shapes) {
        json counts = json::array();
        for (const auto& [degree, count] : s.degree_counts)
            counts.push_back(json{{"degree", degree}, {"count", count}});
        shapes.push_back(json{{"micro_batch_index", s.micro_batch_index},
                              {"shape", s.to_string()},
                              {"degree_counts", std::move(counts)}});
        shape_tally[s.to_string()] += 1;
    }
    json shape_summary = json::array();
    for (const auto& [shape, count] : shape_tally)
        shape_summary.push_back(json{{"shape", shape}, {"micro_batches", count}});

    json statics = json::array();
    for (const auto& s : r.statics) {
        json item{{"degree", s.degree}, {"feasible", s.feasible}};
        if (s.feasible)
            item["report"] = report_to_json(s.report);
        else
            item["note"] = s.note;
        statics.push_back(std::move(item));
    }

    return json{{"schema", kCompareSchema},
                {"speedup", r.speedup},
                {"best_static_degree", r.best_static_degree},
                {"best_static_makespan", r.best_static_makespan},
                {"dynamic",
                 json{{"report", report_to_json(r.dynamic_report)},
                      {"micro_batch_shapes", std::move(shapes)},
                      {"shape_summary", std::move(shape_summary)},
                      {"distinct_group_shapes", r.dynamic_shape_stats.distinct_shapes},
                      {"total_groups", r.dynamic_shape_stats.total_groups}}},
                {"statics", std::move(statics)}};
}

inline void write_comparison_file(const std::string& path, const ComparisonReport& r) {
    detail::save_json(path, comparison_to_json(r));
}

// ---------------------------------------------------------------------------
// Fit results

inline void write_fit_file(const std::string& path, const FitReport& r) {
    json mape = json::object();
    for (const auto& [phase, value] : r.train_mape) mape[phase_name(phase)] = value;
    json counts = json::object();
    for (const auto& [phase, value] : r.sample_counts) counts[phase_name(phase)] = value;
    json j{{"schema", kFitSchema},
           {"coefficients", coeffs_to_json(r.coefficients)},
           {"train_mape", std::move(mape)},
           {"sample_counts", std::move(counts)},
           {"clamped", r.clamped},
           {"notes", r.notes},
           {"total_only_fallback", r.total_only_fallback}};
    detail::save_json(path, j);
}

}  // namespace cpsched::io
