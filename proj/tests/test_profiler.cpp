#include <doctest.h>

#include <cmath>
#include <vector>

#include "cpsched/profiler_fit.hpp"
#include "cpsched/rng.hpp"

using namespace cpsched;

namespace {

CostCoefficients scale_8b() {
    CostCoefficients c;
    c.alpha1 = 4e-9;
    c.alpha2 = 4e-4;
    c.beta1 = 0.01;
    c.alpha3 = 1.0;
    c.beta2 = 0.03;
    c.alpha1_attn = 3.6e-9;
    c.alpha2_attn = 2e-4;
    c.beta1_attn = 0.002;
    c.alpha3_attn = 0.9;
    c.beta2_attn = 0.01;
    c.mem_per_token = 1.0;
    c.mem_model_states = 256.0;
    return c;
}

ClusterSpec bench_cluster() { return ClusterSpec(64, 8192.0, 8, 2e4, 5e3); }

// Forward-model a full grid of samples; multiplicative gaussian noise when
// noise_sigma > 0.
std::vector<TraceSample> synth_trace(const CostCoefficients& truth,
                                     const ClusterSpec& cluster,
                                     const std::vector<std::int64_t>& lengths,
                                     const std::vector<int>& degrees, double noise_sigma,
                                     Rng& rng, bool with_memory = true) {
    std::vector<TraceSample> out;
    const Phase phases[] = {Phase::compute, Phase::comm, Phase::attn_compute,
                            Phase::attn_comm, Phase::total};
    for (auto length : lengths)
        for (int degree : degrees)
            for (double eta : {0.0, 1.0})
                for (Phase phase : phases) {
                    if ((phase == Phase::comm || phase == Phase::attn_comm) && degree == 1)
                        continue;
                    TraceSample s;
                    s.length = length;
                    s.degree = degree;
                    s.mask_efficiency = eta;
                    s.phase = phase;
                    double value =
                        predict_time(truth, cluster, length, eta, degree, phase);
                    if (noise_sigma > 0.0)
                        value *= std::max(0.05, 1.0 + noise_sigma * rng.normal());
                    s.measured_time = value;
                    if (with_memory && phase == Phase::compute)
                        s.measured_memory = static_cast<double>(length) *
                                                truth.mem_per_token +
                                            truth.mem_model_states;
                    out.push_back(std::move(s));
                }
    return out;
}

double rel_err(double got, double want) {
    if (want == 0.0) return std::fabs(got);
    return std::fabs(got - want) / std::fabs(want);
}

}  // namespace

TEST_CASE("noiseless samples reproduce the coefficients") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    Rng rng(1);
    const auto trace = synth_trace(truth, cluster, {1024, 2048, 4096, 8192, 16384},
                                   {1, 2, 4, 8}, 0.0, rng);

    const auto report = fit(trace, cluster);
    const auto& c = report.coefficients;
    CHECK(rel_err(c.alpha1, truth.alpha1) < 1e-6);
    CHECK(rel_err(c.alpha2, truth.alpha2) < 1e-6);
    CHECK(rel_err(c.beta1, truth.beta1) < 1e-6);
    CHECK(rel_err(c.alpha3, truth.alpha3) < 1e-6);
    CHECK(rel_err(c.beta2, truth.beta2) < 1e-6);
    CHECK(rel_err(c.alpha1_attn, truth.alpha1_attn) < 1e-6);
    CHECK(rel_err(c.alpha2_attn, truth.alpha2_attn) < 1e-6);
    CHECK(rel_err(c.beta1_attn, truth.beta1_attn) < 1e-6);
    CHECK(rel_err(c.alpha3_attn, truth.alpha3_attn) < 1e-6);
    CHECK(rel_err(c.beta2_attn, truth.beta2_attn) < 1e-6);
    CHECK(rel_err(c.mem_per_token, truth.mem_per_token) < 1e-6);
    CHECK(rel_err(c.mem_model_states, truth.mem_model_states) < 1e-6);
    CHECK_FALSE(report.total_only_fallback);
}

TEST_CASE("round trip holds for random coefficient draws") {
    const auto cluster = bench_cluster();
    Rng rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        CostCoefficients truth;
        truth.alpha1 = rng.uniform(1e-10, 1e-8);
        truth.alpha2 = rng.uniform(1e-5, 1e-3);
        truth.beta1 = rng.uniform(1e-3, 1e-1);
        truth.alpha3 = rng.uniform(0.1, 2.0);
        truth.beta2 = rng.uniform(1e-3, 1e-1);
        truth.alpha1_attn = truth.alpha1 * rng.uniform(0.1, 1.0);
        truth.alpha2_attn = truth.alpha2 * rng.uniform(0.0, 1.0);
        truth.beta1_attn = truth.beta1 * rng.uniform(0.0, 1.0);
        truth.alpha3_attn = truth.alpha3 * rng.uniform(0.1, 1.0);
        truth.beta2_attn = truth.beta2 * rng.uniform(0.0, 1.0);

        const auto trace = synth_trace(truth, cluster, {512, 1536, 4096, 12288},
                                       {1, 2, 6}, 0.0, rng, /*with_memory=*/false);
        const auto report = fit(trace, cluster);
        CHECK(rel_err(report.coefficients.alpha1, truth.alpha1) < 1e-6);
        CHECK(rel_err(report.coefficients.alpha2, truth.alpha2) < 1e-6);
        CHECK(rel_err(report.coefficients.beta1, truth.beta1) < 1e-6);
        CHECK(rel_err(report.coefficients.alpha3, truth.alpha3) < 1e-6);
        CHECK(rel_err(report.coefficients.beta2, truth.beta2) < 1e-6);
    }
}

TEST_CASE("five percent noise keeps holdout error under eight percent") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto train = synth_trace(truth, cluster, {1024, 2048, 4096, 8192, 16384},
                                       {1, 2, 4, 8}, 0.05, rng);
        const auto holdout = synth_trace(truth, cluster, {1536, 3072, 6144, 12288},
                                         {1, 2, 4, 8}, 0.05, rng);

        const auto report = fit(train, cluster);
        const auto err = predict_error(report.coefficients, holdout, cluster);
        for (const auto& [phase, mape] : err.mape) CHECK(mape <= 0.08);
    }
}

TEST_CASE("an underdetermined phase is rejected") {
    const auto cluster = bench_cluster();
    std::vector<TraceSample> two;
    for (int i = 0; i < 2; ++i) {
        TraceSample s;
        s.length = 1000 + i * 500;
        s.degree = 2;
        s.phase = Phase::compute;
        s.measured_time = 1.0;
        two.push_back(s);
    }
    CHECK_THROWS_AS(fit(two, cluster), ValidationError);
}

TEST_CASE("a collinear design names the coefficient it cannot identify") {
    const auto cluster = bench_cluster();
    std::vector<TraceSample> same;
    for (int i = 0; i < 5; ++i) {
        TraceSample s;
        s.length = 4096;  // one grid point: columns are proportional
        s.degree = 2;
        s.phase = Phase::compute;
        s.measured_time = 1.0 + 0.001 * i;
        same.push_back(s);
    }
    try {
        fit(same, cluster);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unidentifiable") != std::string::npos);
    }
}

TEST_CASE("predict_error is zero against the training data") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    Rng rng(3);
    const auto trace =
        synth_trace(truth, cluster, {1024, 4096, 16384}, {1, 2, 8}, 0.0, rng);
    const auto err = predict_error(truth, trace, cluster);
    for (const auto& [phase, mape] : err.mape) CHECK(mape < 1e-12);
}

TEST_CASE("scaling the coefficients by 1.1 gives exactly ten percent error") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    Rng rng(4);
    const auto holdout =
        synth_trace(truth, cluster, {1024, 4096, 16384}, {1, 2, 8}, 0.0, rng);

    CostCoefficients inflated = truth;
    inflated.alpha1 *= 1.1;
    inflated.alpha2 *= 1.1;
    inflated.beta1 *= 1.1;
    inflated.alpha3 *= 1.1;
    inflated.beta2 *= 1.1;
    inflated.alpha1_attn *= 1.1;
    inflated.alpha2_attn *= 1.1;
    inflated.beta1_attn *= 1.1;
    inflated.alpha3_attn *= 1.1;
    inflated.beta2_attn *= 1.1;

    const auto err = predict_error(inflated, holdout, cluster);
    for (const auto& [phase, mape] : err.mape)
        CHECK(mape == doctest::Approx(0.10).epsilon(1e-9));
}

TEST_CASE("noise at the eight-billion scale lands in the expected error band") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    Rng rng(5);
    const auto train = synth_trace(truth, cluster, {1024, 2048, 4096, 8192, 16384},
                                   {1, 2, 4, 8}, 0.05, rng);
    const auto holdout = synth_trace(truth, cluster, {1536, 3072, 6144, 12288},
                                     {1, 2, 4, 8}, 0.05, rng);
    const auto report = fit(train, cluster);
    const auto err = predict_error(report.coefficients, holdout, cluster);
    // 5% multiplicative noise has mean absolute deviation near 4%.
    CHECK(err.mape.at(Phase::total) > 0.015);
    CHECK(err.mape.at(Phase::total) < 0.065);
}

TEST_CASE("zero-measured holdout samples are skipped and counted") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    std::vector<TraceSample> holdout;
    TraceSample zero;
    zero.length = 1024;
    zero.degree = 2;
    zero.phase = Phase::compute;
    zero.measured_time = 0.0;
    holdout.push_back(zero);
    TraceSample fine = zero;
    fine.measured_time = predict_time(truth, cluster, 1024, 0.0, 2, Phase::compute);
    holdout.push_back(fine);

    const auto err = predict_error(truth, holdout, cluster);
    CHECK(err.skipped_zero_measured == 1);
    CHECK(err.mape.at(Phase::compute) < 1e-12);
}

TEST_CASE("total-only traces use the share fallback") {
    CostCoefficients truth;
    truth.alpha1 = 2e-9;
    truth.alpha2 = 3e-4;
    truth.beta1 = 0.02;
    truth.alpha3 = 0.8;
    truth.beta2 = 0.01;
    truth.alpha1_attn = 1e-9;   // exactly half of alpha1
    truth.alpha3_attn = 0.4;    // exactly half of alpha3
    const auto cluster = bench_cluster();

    std::vector<TraceSample> totals;
    for (std::int64_t length : {1024, 2048, 4096, 8192, 16384})
        for (int degree : {1, 2, 4, 8})
            for (double eta : {0.0, 1.0}) {
                TraceSample s;
                s.length = length;
                s.degree = degree;
                s.mask_efficiency = eta;
                s.phase = Phase::total;
                s.measured_time =
                    predict_time(truth, cluster, length, eta, degree, Phase::total);
                totals.push_back(s);
            }

    const auto report = fit(totals, cluster);
    CHECK(report.total_only_fallback);
    // the two-pass overlap correction brings the totals close
    const auto err = predict_error(report.coefficients, totals, cluster);
    CHECK(err.mape.at(Phase::total) < 0.02);
}

TEST_CASE("extra training points do not hurt holdout error on average") {
    const auto truth = scale_8b();
    const auto cluster = bench_cluster();
    double small_total = 0.0, big_total = 0.0;
    const int seeds = 24;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        Rng rng(seed);
        const auto small = synth_trace(truth, cluster, {2048, 8192, 32768}, {1, 4},
                                       0.05, rng, /*with_memory=*/false);
        Rng rng2(seed);
        const auto big =
            synth_trace(truth, cluster, {1024, 2048, 4096, 8192, 16384, 32768},
                        {1, 2, 4, 8}, 0.05, rng2, /*with_memory=*/false);
        Rng rng3(seed ^ 0xABCDEF);
        const auto holdout = synth_trace(truth, cluster, {1536, 6144, 24576}, {2, 8},
                                         0.0, rng3, /*with_memory=*/false);

        auto mean_mape = [&](const std::vector<TraceSample>& train) {
            const auto report = fit(train, cluster);
            const auto err = predict_error(report.coefficients, holdout, cluster);
            double total = 0.0;
            for (const auto& [phase, mape] : err.mape) total += mape;
            return total / static_cast<double>(err.mape.size());
        };
        small_total += mean_mape(small);
        big_total += mean_mape(big);
    }
    CHECK(big_total / seeds <= small_total / seeds);
}
