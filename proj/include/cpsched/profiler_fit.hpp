#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpsched/cost_model.hpp"
#include "cpsched/errors.hpp"
#include "cpsched/types.hpp"

// Fits CostCoefficients from (length, degree, eta, measured time) samples by
// linear least squares, one phase at a time, and reports prediction error as
// mean absolute percentage error. The estimator is linear in every
// coefficient, so no iterative optimizer is involved.

namespace cpsched {

enum class Phase { total, compute, comm, attn_compute, attn_comm };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::total: return "total";
        case Phase::compute: return "compute";
        case Phase::comm: return "comm";
        case Phase::attn_compute: return "attn_compute";
        case Phase::attn_comm: return "attn_comm";
    }
    return "unknown";
}

inline std::optional<Phase> phase_from_name(std::string_view name) {
    if (name == "total") return Phase::total;
    if (name == "compute") return Phase::compute;
    if (name == "comm") return Phase::comm;
    if (name == "attn_compute") return Phase::attn_compute;
    if (name == "attn_comm") return Phase::attn_comm;
    return std::nullopt;
}

struct TraceSample {
    std::int64_t length = 1;
    int degree = 1;
    double mask_efficiency = 0.0;
    double measured_time = 0.0;  // seconds
    std::optional<double> measured_memory;  // capacity units, group-level
    Phase phase = Phase::total;

    void validate() const {
        if (length < 1) throw ValidationError("trace sample: length must be >= 1");
        if (degree < 1) throw ValidationError("trace sample: degree must be >= 1");
        if (!std::isfinite(mask_efficiency) || mask_efficiency < 0.0)
            throw ValidationError("trace sample: mask_efficiency must be finite and >= 0");
        if (!std::isfinite(measured_time) || measured_time < 0.0)
            throw ValidationError("trace sample: measured_time must be finite and >= 0");
        if (measured_memory && (!std::isfinite(*measured_memory) || *measured_memory < 0.0))
            throw ValidationError("trace sample: measured_memory must be finite and >= 0");
    }
};

namespace detail {

// Column-scaled normal equations with Gaussian elimination. A vanishing
// pivot means the corresponding regressor cannot be identified from the
// samples; the error names it.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows,
                                         const std::vector<double>& targets,
                                         const std::vector<std::string>& names,
                                         const std::string& context) {
    const std::size_t n = names.size();
    const std::size_t m = rows.size();

    std::vector<double> scale(n, 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < n; ++j) scale[j] = std::max(scale[j], std::fabs(row[j]));
    for (std::size_t j = 0; j < n; ++j)
        if (scale[j] == 0.0)
            throw ValidationError(context + ": coefficient " + names[j] +
                                  " is unidentifiable (its regressor is zero everywhere)");

    // A^T A and A^T b on scaled columns.
    std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
    std::vector<double> atb(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = rows[r][i] / scale[i];
            atb[i] += ri * targets[r];
            for (std::size_t j = i; j < n; ++j) ata[i][j] += ri * rows[r][j] / scale[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) ata[i][j] = ata[j][i];

    std::vector<std::size_t> colmap(n);
    for (std::size_t i = 0; i < n; ++i) colmap[i] = i;

    const double tol = 1e-12;
    std::vector<double> diag_ref(n);
    for (std::size_t i = 0; i < n; ++i) diag_ref[i] = ata[i][i];

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(ata[i][k]) > std::fabs(ata[pivot][k])) pivot = i;
        if (pivot != k) {
            std::swap(ata[pivot], ata[k]);
            std::swap(atb[pivot], atb[k]);
            std::swap(colmap[pivot], colmap[k]);
        }
        if (std::fabs(ata[k][k]) <= tol * std::max(1.0, std::fabs(diag_ref[colmap[k]])))
            throw ValidationError(context + ": rank-deficient design, coefficient " +
                                  names[colmap[k]] +
                                  " is unidentifiable from the given samples");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = ata[i][k] / ata[k][k];
            for (std::size_t j = k; j < n; ++j) ata[i][j] -= f * ata[k][j];
            atb[i] -= f * atb[k];
        }
    }

    std::vector<double> solution(n, 0.0);
    for (std::size_t ik = n; ik-- > 0;) {
        double acc = atb[ik];
        for (std::size_t j = ik + 1; j < n; ++j) acc -= ata[ik][j] * solution[j];
        solution[ik] = acc / ata[ik][ik];
    }

    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = solution[i] / scale[i];
    return out;
}

}  // namespace detail

struct FitOptions {
    // Fallback shares when only total-phase samples exist: the attention
    // compute/comm coefficients are set to these fractions of the fitted
    // alpha1/alpha3.
    double attn_compute_share = 0.5;
    double attn_comm_share = 0.5;
};

struct FitReport {
    CostCoefficients coefficients;
    std::map<Phase, double> train_mape;  // fraction, e.g. 0.04 = 4%
    std::map<Phase, int> sample_counts;
    std::vector<std::string> clamped;  // coefficients clamped to their bounds
    std::vector<std::string> notes;
    bool total_only_fallback = false;
};

// Per-phase forward model on a single-sequence sample. Kept on top of the
// cost model itself so fitted coefficients predict exactly what the
// scheduler will use.
inline double predict_time(const CostCoefficients& coeffs, const ClusterSpec& cluster,
                           std::int64_t length, double mask_efficiency, int degree,
                           Phase phase) {
    const TimeBreakdown t =
        estimate_time_single(length, mask_efficiency, degree, cluster, coeffs);
    switch (phase) {
        case Phase::total: return t.total;
        case Phase::compute: return t.compute;
        case Phase::comm: return t.comm;
        case Phase::attn_compute: return t.attn_compute;
        case Phase::attn_comm: return t.attn_comm;
    }
    return t.total;
}

struct PredictErrorReport {
    std::map<Phase, double> mape;
    int skipped_zero_measured = 0;
};

inline PredictErrorReport predict_error(const CostCoefficients& coeffs,
                                        std::span<const TraceSample> holdout,
                                        const ClusterSpec& cluster) {
    if (holdout.empty()) throw ValidationError("predict_error: holdout must be non-empty");
    std::map<Phase, double> abs_sum;
    std::map<Phase, int> counts;
    PredictErrorReport report;
    for (const auto& s : holdout) {
        s.validate();
        if (s.measured_time == 0.0) {
            ++report.skipped_zero_measured;
            continue;
        }
        const double predicted =
            predict_time(coeffs, cluster, s.length, s.mask_efficiency, s.degree, s.phase);
        abs_sum[s.phase] += std::fabs(predicted - s.measured_time) / s.measured_time;
        counts[s.phase] += 1;
    }
    for (const auto& [phase, total] : abs_sum) report.mape[phase] = total / counts[phase];
    return report;
}

namespace detail {

struct PhaseData {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;

    // Scales each row so the solver minimizes relative rather than absolute
    // residuals; that is what MAPE measures. Exact fits are unaffected.
    void weight_rows_by_target() {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double w = targets[i] > 0.0 ? 1.0 / targets[i] : 1.0;
            for (double& x : rows[i]) x *= w;
            targets[i] *= w;
        }
    }
};

inline double clamp_nonneg(double value, const char* name, FitReport& report) {
    if (value < 0.0) {
        report.clamped.push_back(std::string(name) + " (negative fit clamped to 0)");
        return 0.0;
    }
    return value;
}

}  // namespace detail

// Least-squares fit of all coefficients from phase-labeled samples.
//
// Regressors per phase (v is the bandwidth implied by the degree):
//   compute / attn_compute:  (1+eta)*L^2/d,  L/d,  1
//   comm / attn_comm:        L/v,  1        (degree-1 samples skipped: no ring)
//   memory (optional):       L,  1
//
// When only total-phase samples exist, the totals are fitted against the
// combined compute+comm regressors and the attention coefficients are
// derived as fixed shares (see FitOptions); a second pass re-fits against
// targets corrected by the estimated attention overlap.
inline FitReport fit(std::span<const TraceSample> samples, const ClusterSpec& cluster,
                     const FitOptions& options = {}) {
    if (samples.empty()) throw ValidationError("fit: no samples given");

    std::map<Phase, std::vector<const TraceSample*>> by_phase;
    std::vector<const TraceSample*> with_memory;
    for (const auto& s : samples) {
        s.validate();
        by_phase[s.phase].push_back(&s);
        if (s.measured_memory) with_memory.push_back(&s);
    }

    FitReport report;
    CostCoefficients c;

    auto compute_rows = [](std::span<const TraceSample* const> phase_samples) {
        detail::PhaseData data;
        for (const TraceSample* s : phase_samples) {
            const double len = static_cast<double>(s->length);
            const double inv_d = 1.0 / static_cast<double>(s->degree);
            data.rows.push_back({(1.0 + s->mask_efficiency) * len * len * inv_d,
                                 len * inv_d, 1.0});
            data.targets.push_back(s->measured_time);
        }
        data.weight_rows_by_target();
        return data;
    };
    auto comm_rows = [&cluster](std::span<const TraceSample* const> phase_samples,
                                FitReport& rep, const char* phase) {
        detail::PhaseData data;
        int skipped = 0;
        for (const TraceSample* s : phase_samples) {
            if (s->degree == 1) {  // no ring at degree 1, nothing to learn
                ++skipped;
                continue;
            }
            const double v = group_bandwidth(s->degree, cluster);
            data.rows.push_back({static_cast<double>(s->length) / v, 1.0});
            data.targets.push_back(s->measured_time);
        }
        if (skipped > 0)
            rep.notes.push_back(std::string(phase) + ": skipped " + std::to_string(skipped) +
                                " degree-1 samples (no communication at degree 1)");
        data.weight_rows_by_target();
        return data;
    };

    auto require_enough = [](std::size_t count, const char* phase) {
        if (count < 3)
            throw ValidationError(std::string("fit: phase ") + phase + " has " +
                                  std::to_string(count) + " usable samples, need >= 3");
    };

    const bool have_phases = by_phase.count(Phase::compute) || by_phase.count(Phase::comm) ||
                             by_phase.count(Phase::attn_compute) ||
                             by_phase.count(Phase::attn_comm);

    if (have_phases) {
        if (by_phase.count(Phase::compute)) {
            const auto data = compute_rows(by_phase[Phase::compute]);
            require_enough(data.rows.size(), "compute");
            const auto x = detail::least_squares(data.rows, data.targets,
                                                 {"alpha1", "alpha2", "beta1"}, "fit compute");
            c.alpha1 = detail::clamp_nonneg(x[0], "alpha1", report);
            c.alpha2 = detail::clamp_nonneg(x[1], "alpha2", report);
            c.beta1 = detail::clamp_nonneg(x[2], "beta1", report);
        }
        if (by_phase.count(Phase::comm)) {
            const auto data = comm_rows(by_phase[Phase::comm], report, "comm");
            require_enough(data.rows.size(), "comm");
            const auto x = detail::least_squares(data.rows, data.targets,
                                                 {"alpha3", "beta2"}, "fit comm");
            c.alpha3 = detail::clamp_nonneg(x[0], "alpha3", report);
            c.beta2 = detail::clamp_nonneg(x[1], "beta2", report);
        }
        if (by_phase.count(Phase::attn_compute)) {
            const auto data = compute_rows(by_phase[Phase::attn_compute]);
            require_enough(data.rows.size(), "attn_compute");
            const auto x = detail::least_squares(
                data.rows, data.targets, {"alpha1_attn", "alpha2_attn", "beta1_attn"},
                "fit attn_compute");
            c.alpha1_attn = detail::clamp_nonneg(x[0], "alpha1_attn", report);
            c.alpha2_attn = detail::clamp_nonneg(x[1], "alpha2_attn", report);
            c.beta1_attn = detail::clamp_nonneg(x[2], "beta1_attn", report);
        }
        if (by_phase.count(Phase::attn_comm)) {
            const auto data = comm_rows(by_phase[Phase::attn_comm], report, "attn_comm");
            require_enough(data.rows.size(), "attn_comm");
            const auto x = detail::least_squares(data.rows, data.targets,
                                                 {"alpha3_attn", "beta2_attn"},
                                                 "fit attn_comm");
            c.alpha3_attn = detail::clamp_nonneg(x[0], "alpha3_attn", report);
            c.beta2_attn = detail::clamp_nonneg(x[1], "beta2_attn", report);
        }
    } else {
        // Total-only fallback.
        report.total_only_fallback = true;
        report.notes.push_back(
            "only total-phase samples given; attention coefficients derived as fixed "
            "shares (compute " + std::to_string(options.attn_compute_share) + ", comm " +
            std::to_string(options.attn_comm_share) + ")");
        const auto& totals = by_phase[Phase::total];
        require_enough(totals.size(), "total");

        auto total_rows = [&](const std::vector<double>& overlap) {
            detail::PhaseData data;
            for (std::size_t i = 0; i < totals.size(); ++i) {
                const TraceSample* s = totals[i];
                const double len = static_cast<double>(s->length);
                const double inv_d = 1.0 / static_cast<double>(s->degree);
                const bool ring = s->degree >= 2;
                const double v = ring ? group_bandwidth(s->degree, cluster) : 1.0;
                data.rows.push_back({(1.0 + s->mask_efficiency) * len * len * inv_d,
                                     len * inv_d,
                                     ring ? len / v : 0.0,
                                     ring ? 1.0 : 0.0,
                                     1.0});
                data.targets.push_back(s->measured_time + (overlap.empty() ? 0.0 : overlap[i]));
            }
            data.weight_rows_by_target();
            return data;
        };

        const std::vector<std::string> names = {"alpha1", "alpha2", "alpha3", "beta2",
                                                "beta1"};
        std::vector<double> overlap;
        for (int pass = 0; pass < 2; ++pass) {
            report.clamped.clear();  // keep only the final pass's clamps
            const auto data = total_rows(overlap);
            const auto x = detail::least_squares(data.rows, data.targets, names,
                                                 "fit total (fallback)");
            c.alpha1 = detail::clamp_nonneg(x[0], "alpha1", report);
            c.alpha2 = detail::clamp_nonneg(x[1], "alpha2", report);
            c.alpha3 = detail::clamp_nonneg(x[2], "alpha3", report);
            c.beta2 = detail::clamp_nonneg(x[3], "beta2", report);
            c.beta1 = detail::clamp_nonneg(x[4], "beta1", report);
            c.alpha1_attn = options.attn_compute_share * c.alpha1;
            c.alpha3_attn = options.attn_comm_share * c.alpha3;
            // Re-fit with targets corrected by the estimated attention
            // overlap that the first pass ignored.
            overlap.assign(totals.size(), 0.0);
            for (std::size_t i = 0; i < totals.size(); ++i) {
                const TraceSample* s = totals[i];
                const TimeBreakdown t = estimate_time_single(
                    s->length, s->mask_efficiency, s->degree, cluster, c);
                overlap[i] = std::min(t.attn_compute, t.attn_comm);
            }
        }
    }

    if (!with_memory.empty()) {
        if (with_memory.size() < 2) {
            report.notes.push_back("memory: fewer than 2 samples with measured_memory; "
                                   "memory coefficients left at 0");
        } else {
            detail::PhaseData data;
            for (const TraceSample* s : with_memory) {
                data.rows.push_back({static_cast<double>(s->length), 1.0});
                data.targets.push_back(*s->measured_memory);
            }
            data.weight_rows_by_target();
            const auto x = detail::least_squares(data.rows, data.targets,
                                                 {"mem_per_token", "mem_model_states"},
                                                 "fit memory");
            c.mem_per_token = detail::clamp_nonneg(x[0], "mem_per_token", report);
            c.mem_model_states = detail::clamp_nonneg(x[1], "mem_model_states", report);
        }
    } else {
        report.notes.push_back("no measured_memory samples; memory coefficients left at 0");
    }

    // Attention terms must remain sub-components of the totals.
    if (c.alpha1_attn > c.alpha1) {
        c.alpha1_attn = c.alpha1;
        report.clamped.push_back("alpha1_attn (clamped to alpha1)");
    }
    if (c.alpha3_attn > c.alpha3) {
        c.alpha3_attn = c.alpha3;
        report.clamped.push_back("alpha3_attn (clamped to alpha3)");
    }

    report.coefficients = c.validated();

    // Training MAPE per phase, zero-measured samples skipped.
    std::map<Phase, double> abs_sum;
    std::map<Phase, int> counts;
    for (const auto& s : samples) {
        report.sample_counts[s.phase] += 1;
        if (s.measured_time == 0.0) continue;
        if ((s.phase == Phase::comm || s.phase == Phase::attn_comm) && s.degree == 1)
            continue;
        const double predicted = predict_time(report.coefficients, cluster, s.length,
                                              s.mask_efficiency, s.degree, s.phase);
        abs_sum[s.phase] += std::fabs(predicted - s.measured_time) / s.measured_time;
        counts[s.phase] += 1;
    }
    for (const auto& [phase, total] : abs_sum)
        report.train_mape[phase] = total / counts[phase];

    return report;
}

}  // namespace cpsched
