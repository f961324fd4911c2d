// Command-line front end: workload generation, dynamic and static planning,
// simulation, comparison, coefficient fitting and solver benchmarking.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpsched/cpsched.hpp"

namespace {

using namespace cpsched;

int exit_code_for(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::invalid_input: return 2;
        case ErrorCategory::infeasible: return 3;
        case ErrorCategory::io: return 4;
        case ErrorCategory::parse: return 5;
    }
    return 10;
}

void print_error(const std::string& category, const std::string& message) {
    nlohmann::json j{{"error", {{"category", category}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
}

double percentile(std::vector<std::int64_t> values, double q) {
    std::sort(values.begin(), values.end());
    const std::size_t idx = static_cast<std::size_t>(q * (values.size() - 1) + 0.5);
    return static_cast<double>(values[std::min(idx, values.size() - 1)]);
}

struct GenArgs {
    std::string preset;
    std::string config_path;
    std::string out_path;
    std::optional<std::int64_t> count;
    std::optional<std::uint64_t> seed;
    std::optional<double> tokens_per_second;
    std::optional<double> eta;
};

int run_gen(const GenArgs& args) {
    WorkloadConfig config;
    if (!args.config_path.empty())
        config = io::read_workload_file(args.config_path);
    else
        config = workload_preset(args.preset);
    if (args.count) config.count = *args.count;
    if (args.seed) config.seed = *args.seed;
    if (args.tokens_per_second) config.tokens_per_second = *args.tokens_per_second;
    if (args.eta) config.eta_policy = *args.eta;

    const auto batch = generate(config);
    io::write_batch_file(args.out_path, batch);

    std::vector<std::int64_t> lengths;
    lengths.reserve(batch.size());
    std::int64_t total = 0;
    for (const auto& s : batch) {
        lengths.push_back(s.length);
        total += s.length;
    }
    std::cout << "wrote " << batch.size() << " sequences to " << args.out_path
              << " (total_tokens=" << total << " p50=" << percentile(lengths, 0.50)
              << " p99=" << percentile(lengths, 0.99)
              << " max=" << *std::max_element(lengths.begin(), lengths.end()) << ")\n";
    return 0;
}

struct ScheduleArgs {
    std::string batch_path, cluster_path, coeffs_path, out_path;
    std::optional<int> micro_batches;
    std::optional<std::int64_t> token_budget;
    bool absorb_slack = false;
    std::optional<double> latency_budget_s;
};

int run_schedule(const ScheduleArgs& args) {
    const auto batch = io::read_batch_file(args.batch_path);
    const auto cluster = io::read_cluster_file(args.cluster_path);
    const auto coeffs = io::read_coeffs_file(args.coeffs_path);

    PlanOptions options;
    options.num_micro_batches = args.micro_batches;
    options.token_budget = args.token_budget;
    options.absorb_slack = args.absorb_slack;

    const auto start = std::chrono::steady_clock::now();
    const auto result = plan(batch, cluster, coeffs, options);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    io::write_plan_file(args.out_path, result.plans);

    double total_makespan = 0.0;
    for (const auto& p : result.plans) {
        total_makespan += p.makespan;
        std::cout << "micro-batch " << p.micro_batch_index << ": groups "
                  << plan_shape(p).to_string() << " makespan=" << p.makespan
                  << "s idle_ranks=" << p.idle_ranks.size() << "\n";
    }
    std::cout << "total predicted makespan: " << total_makespan << "s over "
              << result.plans.size() << " micro-batches\n";
    std::cout << "group shapes: " << result.shape_stats.distinct_shapes << " distinct of "
              << result.shape_stats.total_groups << " total (pool reuse "
              << (result.shape_stats.total_groups - result.shape_stats.distinct_shapes)
              << ")\n";
    std::cout << "planning latency: " << elapsed << "s";
    if (args.latency_budget_s)
        std::cout << " (budget " << *args.latency_budget_s << "s, "
                  << (elapsed <= *args.latency_budget_s ? "within" : "EXCEEDED") << ")";
    std::cout << "\n";
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

struct StaticArgs {
    std::string batch_path, cluster_path, coeffs_path, out_path;
    int degree = 1;
};

int run_static(const StaticArgs& args) {
    const auto batch = io::read_batch_file(args.batch_path);
    const auto cluster = io::read_cluster_file(args.cluster_path);
    const auto coeffs = io::read_coeffs_file(args.coeffs_path);

    const auto waves = static_plan(MicroBatch(batch), args.degree, cluster, coeffs);
    io::write_plan_file(args.out_path, waves);

    double total = 0.0;
    for (const auto& w : waves) total += w.makespan;
    std::cout << "static degree " << args.degree << ": " << waves.size()
              << " wave(s), total makespan " << total << "s\n";
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

struct SimulateArgs {
    std::vector<std::string> plan_paths;
    std::string cluster_path, coeffs_path, out_path;
    std::string source = "plan-files";
};

int run_simulate(const SimulateArgs& args) {
    const auto cluster = io::read_cluster_file(args.cluster_path);
    const auto coeffs = io::read_coeffs_file(args.coeffs_path);

    std::vector<SchedulePlan> plans;
    for (const auto& path : args.plan_paths) {
        auto loaded = io::read_plan_file(path);
        for (auto& p : loaded) plans.push_back(std::move(p));
    }

    const auto report = simulate(plans, cluster, coeffs, args.source);
    io::write_report_file(args.out_path, report);
    std::cout << "simulated " << plans.size() << " plan(s): makespan=" << report.makespan
              << "s busy=" << report.busy_rank_seconds
              << "s idle_fraction=" << report.idle_fraction << "\n";
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

struct CompareArgs {
    std::string batch_path, cluster_path, coeffs_path, out_path;
    std::vector<int> degrees;
    bool all_degrees = false;
    std::optional<int> micro_batches;
    std::optional<std::int64_t> token_budget;
};

int run_compare(const CompareArgs& args) {
    const auto batch = io::read_batch_file(args.batch_path);
    const auto cluster = io::read_cluster_file(args.cluster_path);
    const auto coeffs = io::read_coeffs_file(args.coeffs_path);

    std::vector<int> degrees = args.degrees;
    if (args.all_degrees) {
        degrees.resize(static_cast<std::size_t>(cluster.num_ranks));
        std::iota(degrees.begin(), degrees.end(), 1);
    }
    if (degrees.empty())
        throw ValidationError("compare: provide --degrees or --all-degrees");

    PlanOptions options;
    options.num_micro_batches = args.micro_batches;
    options.token_budget = args.token_budget;

    const auto report = compare(batch, cluster, coeffs, degrees, options);
    io::write_comparison_file(args.out_path, report);

    std::cout << "dynamic: makespan=" << report.dynamic_report.makespan
              << "s idle_fraction=" << report.dynamic_report.idle_fraction << "\n";
    for (const auto& shape : report.dynamic_shapes)
        std::cout << "  micro-batch " << shape.micro_batch_index << ": "
                  << shape.to_string() << "\n";
    for (const auto& s : report.statics) {
        if (s.feasible)
            std::cout << "static d=" << s.degree << ": makespan=" << s.report.makespan
                      << "s idle_fraction=" << s.report.idle_fraction << "\n";
        else
            std::cout << "static d=" << s.degree << ": infeasible (" << s.note << ")\n";
    }
    if (report.best_static_degree >= 0)
        std::cout << "best static: d=" << report.best_static_degree << " makespan="
                  << report.best_static_makespan << "s; speedup=" << report.speedup << "\n";
    else
        std::cout << "no feasible static degree\n";
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

struct FitArgs {
    std::string trace_path, cluster_path, out_path, report_path, holdout_path;
    double attn_compute_share = 0.5;
    double attn_comm_share = 0.5;
};

int run_fit(const FitArgs& args) {
    const auto samples = io::read_trace_file(args.trace_path);
    const auto cluster = io::read_cluster_file(args.cluster_path);

    FitOptions options;
    options.attn_compute_share = args.attn_compute_share;
    options.attn_comm_share = args.attn_comm_share;

    const auto report = fit(samples, cluster, options);
    io::write_coeffs_file(args.out_path, report.coefficients);
    if (!args.report_path.empty()) io::write_fit_file(args.report_path, report);

    std::cout << "fitted " << samples.size() << " samples\n";
    for (const auto& [phase, mape] : report.train_mape)
        std::cout << "  train mape " << phase_name(phase) << ": " << mape * 100.0 << "%\n";
    for (const auto& note : report.notes) std::cout << "  note: " << note << "\n";
    for (const auto& clamp : report.clamped) std::cout << "  clamped: " << clamp << "\n";

    if (!args.holdout_path.empty()) {
        const auto holdout = io::read_trace_file(args.holdout_path);
        const auto err = predict_error(report.coefficients, holdout, cluster);
        for (const auto& [phase, mape] : err.mape)
            std::cout << "  holdout mape " << phase_name(phase) << ": " << mape * 100.0
                      << "%\n";
        if (err.skipped_zero_measured > 0)
            std::cout << "  holdout: skipped " << err.skipped_zero_measured
                      << " zero-measured samples\n";
    }
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

struct BenchArgs {
    std::vector<int> kprimes{2, 4, 8, 16, 32, 64};
    std::vector<int> ranks{16, 32, 64};
    int repeats = 5;
    std::string out_path;
};

// Synthetic solver benchmark: K' single-sequence groups, all d_min = 1, so
// cell counts depend only on (K', N).
int run_bench(const BenchArgs& args) {
    CostCoefficients coeffs;
    coeffs.alpha1 = 4.0e-9;
    coeffs.alpha2 = 4.0e-4;
    coeffs.beta1 = 0.01;
    coeffs.alpha3 = 1.0;
    coeffs.beta2 = 0.03;
    coeffs.alpha1_attn = 3.6e-9;
    coeffs.alpha3_attn = 0.9;
    coeffs.mem_per_token = 1.0;

    std::string csv = "kprime,num_ranks,cells_evaluated,median_wall_us,makespan_s\n";
    std::cout << "kprime  num_ranks  cells  median_wall_us  makespan_s\n";
    for (int n : args.ranks) {
        const ClusterSpec cluster(n, 1.0e9, 8, 2.0e4, 5.0e3);
        for (int kprime : args.kprimes) {
            if (kprime > n) continue;  // infeasible: every group needs one rank
            Rng rng(0x9e3779b9u ^ (static_cast<std::uint64_t>(kprime) << 16) ^
                    static_cast<std::uint64_t>(n));
            std::vector<AtomicGroup> groups;
            groups.reserve(static_cast<std::size_t>(kprime));
            for (int i = 0; i < kprime; ++i) {
                std::vector<SequenceSpec> member{SequenceSpec(
                    "b" + std::to_string(i), rng.int_in(256, 4096), 1.0)};
                groups.emplace_back(std::move(member), 1);
            }

            std::vector<double> walls;
            DPSolution solution;
            for (int rep = 0; rep < args.repeats; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                solution = solve(groups, cluster, coeffs);
                walls.push_back(std::chrono::duration<double, std::micro>(
                                    std::chrono::steady_clock::now() - start)
                                    .count());
            }
            std::sort(walls.begin(), walls.end());
            const double median = walls[walls.size() / 2];

            csv += std::to_string(kprime) + "," + std::to_string(n) + "," +
                   std::to_string(solution.table_cells_evaluated) + "," +
                   std::to_string(median) + "," + std::to_string(solution.makespan) + "\n";
            std::cout << kprime << "\t" << n << "\t" << solution.table_cells_evaluated
                      << "\t" << median << "\t" << solution.makespan << "\n";
        }
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw IoError("cannot open '" + args.out_path + "' for writing");
        out << csv;
        std::cout << "wrote " << args.out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic context-parallel scheduling engine"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic workload batch file");
    auto* preset_opt =
        gen->add_option("--preset", gen_args.preset,
                        "Workload preset: openvid-like, internvid-like, msrvtt-like");
    gen->add_option("--config", gen_args.config_path, "Workload config JSON file")
        ->excludes(preset_opt);
    gen->add_option("--count", gen_args.count, "Override sequence count");
    gen->add_option("--seed", gen_args.seed, "Override RNG seed");
    gen->add_option("--tokens-per-second", gen_args.tokens_per_second,
                    "Override tokens per second of video");
    gen->add_option("--eta", gen_args.eta, "Override mask efficiency (constant policy)");
    gen->add_option("--out", gen_args.out_path, "Output batch file")->required();

    ScheduleArgs sched_args;
    auto* sched = app.add_subcommand("schedule", "Plan a batch with the dynamic pipeline");
    sched->add_option("--batch", sched_args.batch_path, "Batch file")->required();
    sched->add_option("--cluster", sched_args.cluster_path, "Cluster file")->required();
    sched->add_option("--coeffs", sched_args.coeffs_path, "Coefficients file")->required();
    sched->add_option("--out", sched_args.out_path, "Output plan file")->required();
    sched->add_option("--micro-batches", sched_args.micro_batches,
                      "Fixed number of micro-batches");
    sched->add_option("--token-budget", sched_args.token_budget,
                      "Token budget per micro-batch (sizes the count)");
    sched->add_flag("--absorb-slack", sched_args.absorb_slack,
                    "Grow degrees into idle ranks when it strictly helps");
    sched->add_option("--latency-budget", sched_args.latency_budget_s,
                      "Report planning latency against this budget (seconds)");

    StaticArgs static_args;
    auto* stat = app.add_subcommand("static", "Plan a batch with a uniform static degree");
    stat->add_option("--batch", static_args.batch_path, "Batch file")->required();
    stat->add_option("--cluster", static_args.cluster_path, "Cluster file")->required();
    stat->add_option("--coeffs", static_args.coeffs_path, "Coefficients file")->required();
    stat->add_option("--degree", static_args.degree, "Uniform CP degree")->required();
    stat->add_option("--out", static_args.out_path, "Output plan file")->required();

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Evaluate plan files under the cost model");
    sim->add_option("--plans", sim_args.plan_paths, "Plan file(s), in execution order")
        ->required();
    sim->add_option("--cluster", sim_args.cluster_path, "Cluster file")->required();
    sim->add_option("--coeffs", sim_args.coeffs_path, "Coefficients file")->required();
    sim->add_option("--out", sim_args.out_path, "Output report file")->required();
    sim->add_option("--source", sim_args.source, "Label recorded in the report");

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand(
        "compare", "Dynamic plan vs uniform static degrees on the same batch");
    cmp->add_option("--batch", cmp_args.batch_path, "Batch file")->required();
    cmp->add_option("--cluster", cmp_args.cluster_path, "Cluster file")->required();
    cmp->add_option("--coeffs", cmp_args.coeffs_path, "Coefficients file")->required();
    cmp->add_option("--out", cmp_args.out_path, "Output comparison file")->required();
    cmp->add_option("--degrees", cmp_args.degrees, "Candidate static degrees")
        ->delimiter(',');
    cmp->add_flag("--all-degrees", cmp_args.all_degrees, "Try every degree 1..N");
    cmp->add_option("--micro-batches", cmp_args.micro_batches,
                    "Fixed number of micro-batches for the dynamic plan");
    cmp->add_option("--token-budget", cmp_args.token_budget,
                    "Token budget per micro-batch for the dynamic plan");

    FitArgs fit_args;
    auto* fitc = app.add_subcommand("fit", "Fit cost coefficients from a trace file");
    fitc->add_option("--trace", fit_args.trace_path, "Trace file")->required();
    fitc->add_option("--cluster", fit_args.cluster_path, "Cluster file")->required();
    fitc->add_option("--out", fit_args.out_path, "Output coefficients file")->required();
    fitc->add_option("--report", fit_args.report_path, "Optional fit report file");
    fitc->add_option("--holdout", fit_args.holdout_path,
                     "Optional holdout trace for prediction error");
    fitc->add_option("--attn-compute-share", fit_args.attn_compute_share,
                     "Attention share of compute in total-only fallback");
    fitc->add_option("--attn-comm-share", fit_args.attn_comm_share,
                     "Attention share of comm in total-only fallback");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench-solver", "Sweep solver latency over K' and N");
    bench->add_option("--kprimes", bench_args.kprimes, "Group counts to sweep")
        ->delimiter(',');
    bench->add_option("--ranks", bench_args.ranks, "Cluster sizes to sweep")->delimiter(',');
    bench->add_option("--repeats", bench_args.repeats, "Timing repeats per point");
    bench->add_option("--out", bench_args.out_path, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) print_error("usage", e.what());
        return app.exit(e);
    }

    try {
        if (gen->parsed()) return run_gen(gen_args);
        if (sched->parsed()) return run_schedule(sched_args);
        if (stat->parsed()) return run_static(static_args);
        if (sim->parsed()) return run_simulate(sim_args);
        if (cmp->parsed()) return run_compare(cmp_args);
        if (fitc->parsed()) return run_fit(fit_args);
        if (bench->parsed()) return run_bench(bench_args);
    } catch (const cpsched::Error& e) {
        print_error(Error::category_name(e.category()), e.what());
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 10;
    }
    return 0;
}
