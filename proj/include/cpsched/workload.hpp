#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpsched/errors.hpp"
#include "cpsched/rng.hpp"
#include "cpsched/types.hpp"

// Synthetic workload generation. Durations (seconds of video) are drawn from
// a configurable distribution, scaled to tokens, and rounded to at least one
// token. The bundled presets approximate the skew of public video datasets:
// medians of a few seconds with a long tail reaching past a minute.

namespace cpsched {

struct LognormalDist {
    double mu = 0.0;     // log-seconds
    double sigma = 1.0;  // > 0
};

struct ParetoDist {
    double alpha = 2.0;  // > 1
    double x_min = 1.0;  // > 0
};

struct UniformDist {
    double lo = 1.0;
    double hi = 1.0;  // >= lo
};

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;    // >= lo
    double weight = 0.0;  // >= 0
};

struct EmpiricalDist {
    std::vector<HistogramBin> bins;
};

using Distribution = std::variant<LognormalDist, ParetoDist, EmpiricalDist, UniformDist>;

struct ModalityEta {
    std::string modality;
    double fraction = 0.0;  // > 0; fractions are normalized over the map
    double eta = 0.0;
};

// Either one constant eta for every sequence, or a categorical draw over
// modalities, each with its own eta.
using EtaPolicy = std::variant<double, std::vector<ModalityEta>>;

struct WorkloadConfig {
    Distribution distribution = UniformDist{1.0, 1.0};
    double tokens_per_second = 1.0;
    std::int64_t count = 1;
    EtaPolicy eta_policy = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (count < 1) throw ValidationError("workload: count must be >= 1");
        if (!std::isfinite(tokens_per_second) || tokens_per_second <= 0.0)
            throw ValidationError("workload: tokens_per_second must be finite and > 0");
        if (const auto* d = std::get_if<LognormalDist>(&distribution)) {
            if (!std::isfinite(d->mu)) throw ValidationError("lognormal: mu must be finite");
            if (!std::isfinite(d->sigma) || d->sigma <= 0.0)
                throw ValidationError("lognormal: sigma must be > 0");
        } else if (const auto* d = std::get_if<ParetoDist>(&distribution)) {
            if (!std::isfinite(d->alpha) || d->alpha <= 1.0)
                throw ValidationError("pareto: alpha must be > 1");
            if (!std::isfinite(d->x_min) || d->x_min <= 0.0)
                throw ValidationError("pareto: x_min must be > 0");
        } else if (const auto* d = std::get_if<UniformDist>(&distribution)) {
            if (!std::isfinite(d->lo) || !std::isfinite(d->hi) || d->lo < 0.0 ||
                d->hi < d->lo)
                throw ValidationError("uniform: need 0 <= lo <= hi");
        } else if (const auto* d = std::get_if<EmpiricalDist>(&distribution)) {
            if (d->bins.empty()) throw ValidationError("empirical: need at least one bin");
            double total = 0.0;
            for (const auto& b : d->bins) {
                if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo < 0.0 ||
                    b.hi < b.lo)
                    throw ValidationError("empirical: bin needs 0 <= lo <= hi");
                if (!std::isfinite(b.weight) || b.weight < 0.0)
                    throw ValidationError("empirical: bin weight must be >= 0");
                total += b.weight;
            }
            if (total <= 0.0)
                throw ValidationError("empirical: total bin weight must be > 0");
        }
        if (const auto* eta = std::get_if<double>(&eta_policy)) {
            if (!std::isfinite(*eta) || *eta < 0.0)
                throw ValidationError("eta policy: constant eta must be finite and >= 0");
        } else {
            const auto& modalities = std::get<std::vector<ModalityEta>>(eta_policy);
            if (modalities.empty())
                throw ValidationError("eta policy: modality map must be non-empty");
            double total = 0.0;
            for (const auto& m : modalities) {
                if (m.modality.empty())
                    throw ValidationError("eta policy: modality name must be non-empty");
                if (!std::isfinite(m.fraction) || m.fraction <= 0.0)
                    throw ValidationError("eta policy: modality fraction must be > 0");
                if (!std::isfinite(m.eta) || m.eta < 0.0)
                    throw ValidationError("eta policy: modality eta must be finite and >= 0");
                total += m.fraction;
            }
            if (total <= 0.0)
                throw ValidationError("eta policy: fractions must sum to > 0");
        }
    }
};

namespace detail {

inline double sample_duration(const Distribution& dist, Rng& rng) {
    if (const auto* d = std::get_if<LognormalDist>(&dist)) return rng.lognormal(d->mu, d->sigma);
    if (const auto* d = std::get_if<ParetoDist>(&dist)) return rng.pareto(d->alpha, d->x_min);
    if (const auto* d = std::get_if<UniformDist>(&dist)) return rng.uniform(d->lo, d->hi);
    const auto& e = std::get<EmpiricalDist>(dist);
    double total = 0.0;
    for (const auto& b : e.bins) total += b.weight;
    double pick = rng.uniform01() * total;
    for (const auto& b : e.bins) {
        pick -= b.weight;
        if (pick < 0.0) return rng.uniform(b.lo, b.hi);
    }
    return rng.uniform(e.bins.back().lo, e.bins.back().hi);
}

inline double sample_eta(const EtaPolicy& policy, Rng& rng) {
    if (const auto* constant = std::get_if<double>(&policy)) return *constant;
    const auto& modalities = std::get<std::vector<ModalityEta>>(policy);
    double total = 0.0;
    for (const auto& m : modalities) total += m.fraction;
    double pick = rng.uniform01() * total;
    for (const auto& m : modalities) {
        pick -= m.fraction;
        if (pick < 0.0) return m.eta;
    }
    return modalities.back().eta;
}

}  // namespace detail

// Deterministic given the seed: for each sequence, one duration draw followed
// by one eta draw (the latter only when the policy is per-modality).
inline std::vector<SequenceSpec> generate(const WorkloadConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::vector<SequenceSpec> out;
    out.reserve(static_cast<std::size_t>(config.count));
    for (std::int64_t i = 0; i < config.count; ++i) {
        const double duration = detail::sample_duration(config.distribution, rng);
        std::int64_t length =
            static_cast<std::int64_t>(std::llround(duration * config.tokens_per_second));
        if (length < 1) length = 1;
        const double eta = detail::sample_eta(config.eta_policy, rng);
        out.emplace_back("s" + std::to_string(i), length, eta);
    }
    return out;
}

// Named presets approximating the duration skew of public video datasets.
// Parameters are artifact-chosen, not dataset statistics.
inline WorkloadConfig workload_preset(std::string_view name) {
    WorkloadConfig config;
    config.tokens_per_second = 256.0;
    config.count = 512;
    config.eta_policy = 1.0;  // full-attention vision tokens dominate
    if (name == "openvid-like") {
        // Highly diverse, long tail: median ~6 s, P99 near 80 s.
        config.distribution = LognormalDist{std::log(6.0), 1.1};
    } else if (name == "internvid-like") {
        config.distribution = LognormalDist{std::log(8.0), 0.8};
    } else if (name == "msrvtt-like") {
        // Comparatively uniform clip lengths around 10-20 s.
        config.distribution = LognormalDist{std::log(12.0), 0.35};
    } else {
        throw ValidationError("unknown workload preset '" + std::string(name) +
                              "' (expected openvid-like, internvid-like, msrvtt-like)");
    }
    return config;
}

}  // namespace cpsched
