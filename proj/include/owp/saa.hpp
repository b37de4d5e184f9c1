#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string_view>
#include <vector>

#include "owp/common.hpp"
#include "owp/distributions.hpp"
#include "owp/instance.hpp"
#include "owp/ordered.hpp"
#include "owp/rng.hpp"
#include "owp/solver.hpp"

namespace owp {

struct SaaParams {
    double growth = 2.0;                   // gamma
    double eps_stability = 1e-4;           // epsilon_1
    double eps_halfwidth = 1e-4;           // epsilon_2
    std::size_t max_rounds = 50;           // k_max
    std::size_t validation_size = 10000;   // per-demand K_i
    std::size_t bootstrap_replicates = 200;
    double alpha = 0.05;
    std::size_t budget_cap = 1000000;      // N_max over the sum of sizes
    bool append_samples = false;           // keep earlier draws, append the increment
    SolveOptions solver;

    void validate() const {
        require_domain(growth > 1.0, "SaaParams: growth must be > 1");
        require_domain(eps_stability > 0.0 && eps_halfwidth > 0.0,
                       "SaaParams: tolerances must be > 0");
        require_domain(bootstrap_replicates >= 2, "SaaParams: need B >= 2");
        require_domain(alpha > 0.0 && alpha < 1.0, "SaaParams: need 0 < alpha < 1");
        require_domain(max_rounds >= 1, "SaaParams: max_rounds must be >= 1");
        require_domain(validation_size >= 1, "SaaParams: validation_size must be >= 1");
    }
};

// m_i^0 = max{5, ceil(100 (R_i + w_i) / n)} with R_i the demand's scale proxy.
inline std::size_t initial_sample_size(const DemandSpec& demand, std::size_t n_demands) {
    const double raw =
        100.0 * (scale_proxy(demand.dist) + demand.weight) / static_cast<double>(n_demands);
    return std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(raw)));
}

// Type-7 empirical quantile (linear interpolation between order statistics).
inline double quantile_type7(std::span<const double> sorted_ascending, double prob) {
    require_domain(!sorted_ascending.empty(), "quantile: empty sample");
    require_domain(prob >= 0.0 && prob <= 1.0, "quantile: prob out of range");
    const std::size_t n = sorted_ascending.size();
    if (n == 1) return sorted_ascending[0];
    const double h = prob * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted_ascending[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted_ascending[lo] + frac * (sorted_ascending[lo + 1] - sorted_ascending[lo]);
}

struct BootstrapSummary {
    double estimate = 0.0;
    double q_lo = 0.0;
    double q_hi = 0.0;
    double halfwidth = 0.0;
};

// Bootstrap quantile interval for the ordered objective of y on a fixed
// validation sample: B resamples with replacement inside each group, the
// ordered objective evaluated on each replicate, type-7 quantiles at
// alpha/2 and 1-alpha/2. Distances are computed once per point.
inline BootstrapSummary bootstrap_validate(std::span<const double> y,
                                           const GroupedSample& validation,
                                           std::span<const double> weights,
                                           const LambdaWeights& lambda, std::size_t replicates,
                                           double alpha, RngStream rng, double p = 2.0) {
    require_domain(replicates >= 2, "bootstrap_validate: need B >= 2");
    require_domain(alpha > 0.0 && alpha < 1.0, "bootstrap_validate: need 0 < alpha < 1");
    validation.validate();
    const std::size_t n = validation.size();

    std::vector<std::vector<double>> dists(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PointSet& g = validation.groups[i];
        dists[i].resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) dists[i][j] = lp_distance(y, g[j], p);
    }

    BootstrapSummary out;
    {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (double v : dists[i]) sum += v;
            g[i] = weights[i] * sum / static_cast<double>(dists[i].size());
        }
        out.estimate = ordered_weighted_sum(lambda, g);
    }

    std::vector<double> stats(replicates);
    std::vector<double> g(n);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t m = dists[i].size();
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) sum += dists[i][rng.next_u64() % m];
            g[i] = weights[i] * sum / static_cast<double>(m);
        }
        stats[rep] = ordered_weighted_sum(lambda, g);
    }
    std::sort(stats.begin(), stats.end());
    out.q_lo = quantile_type7(stats, alpha / 2.0);
    out.q_hi = quantile_type7(stats, 1.0 - alpha / 2.0);
    out.halfwidth = std::max(out.estimate - out.q_lo, out.q_hi - out.estimate);
    return out;
}

// Same bootstrap machinery on a single group's weighted mean distance (no
// ordering inside a group).
inline double per_group_halfwidth(std::span<const double> y, const PointSet& group,
                                  double weight, std::size_t replicates, double alpha,
                                  RngStream rng, double p = 2.0) {
    require_domain(group.size() > 0, "per_group_halfwidth: empty group");
    require_domain(replicates >= 2, "per_group_halfwidth: need B >= 2");
    const std::size_t m = group.size();
    std::vector<double> dists(m);
    for (std::size_t j = 0; j < m; ++j) dists[j] = lp_distance(y, group[j], p);

    double full = 0.0;
    for (double v : dists) full += v;
    const double estimate = weight * full / static_cast<double>(m);

    std::vector<double> stats(replicates);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum += dists[rng.next_u64() % m];
        stats[rep] = weight * sum / static_cast<double>(m);
    }
    std::sort(stats.begin(), stats.end());
    const double q_lo = quantile_type7(stats, alpha / 2.0);
    const double q_hi = quantile_type7(stats, 1.0 - alpha / 2.0);
    return std::max(estimate - q_lo, q_hi - estimate);
}

struct IterationRecord {
    std::size_t round = 0;
    std::vector<std::size_t> sizes;
    Point y;
    double rho_training = 0.0;
    double rho_validation = 0.0;
    double halfwidth = 0.0;
    std::vector<double> group_contributions;
    std::vector<double> group_halfwidths;
    double wall_time_s = 0.0;
};

enum class StopReason { stability, max_rounds, budget };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::stability: return "stability";
        case StopReason::max_rounds: return "k_max";
        case StopReason::budget: return "budget";
    }
    return "?";
}

struct SaaResult {
    Point y;
    double rho_training = 0.0;    // empirical optimum on the final training sample
    double rho_validation = 0.0;  // point estimate on the validation sample
    double interval_lo = 0.0;     // rho_validation -/+ halfwidth
    double interval_hi = 0.0;
    double halfwidth = 0.0;
    std::vector<IterationRecord> trace;
    StopReason stop_reason = StopReason::max_rounds;
    std::size_t samples_drawn = 0;  // cumulative training draws
};

// The validation sample the engine would draw itself for (instance, seed);
// exposed so several approaches can share it bit for bit.
inline GroupedSample draw_validation(const Instance& instance, std::size_t per_group,
                                     std::uint64_t seed) {
    const RngStream root = RngStream(seed).child(fnv1a64(instance.id));
    GroupedSample val;
    for (std::size_t i = 0; i < instance.size(); ++i)
        val.groups.push_back(sample(instance.demands[i].dist, per_group,
                                    root.child(stream_purpose::validation, i)));
    return val;
}

// Adaptive sample average approximation. Per round: draw training samples at
// the current sizes, solve the subproblem warm-started at the previous point,
// bootstrap-validate on the fixed validation sample, test per-group stability
// (|contribution change| <= eps_1 and group halfwidth <= eps_2, never at
// round 0), and grow only the unstable groups by gamma. Stops on stability,
// on the round limit, or right before the grown sizes would exceed the
// budget cap.
inline SaaResult run_adaptive_saa(const Instance& instance, const SaaParams& params,
                                  std::uint64_t seed,
                                  const GroupedSample* shared_validation = nullptr) {
    params.validate();
    instance.validate();
    const LambdaWeights lambda = instance.lambda();
    if (!lambda.convex_mode())
        throw UnsupportedError("run_adaptive_saa: lambda must be in convex mode");
    for (std::size_t i = 0; i < instance.size(); ++i)
        require_domain(moment_check(instance.demands[i].dist),
                       "run_adaptive_saa: demand " + std::to_string(i) +
                           " fails the moment check");

    const std::size_t n = instance.size();
    const std::vector<double> weights = instance.weights();
    const RngStream root = RngStream(seed).child(fnv1a64(instance.id));

    GroupedSample own_validation;
    const GroupedSample* validation = shared_validation;
    if (validation == nullptr) {
        own_validation = draw_validation(instance, params.validation_size, seed);
        validation = &own_validation;
    }

    std::vector<std::size_t> sizes(n);
    for (std::size_t i = 0; i < n; ++i) sizes[i] = initial_sample_size(instance.demands[i], n);

    // Round-0 start: weighted mean of the demand centers.
    Point y_prev(instance.dim, 0.0);
    {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            add_scaled(y_prev, instance.demands[i].dist.center(), weights[i]);
            total += weights[i];
        }
        if (total > 0.0)
            for (double& c : y_prev) c /= total;
    }

    SaaResult result;
    GroupedSample training;
    training.groups.assign(n, PointSet(instance.dim));
    std::vector<double> prev_contributions;

    for (std::size_t round = 0;; ++round) {
        const auto tic = std::chrono::steady_clock::now();

        for (std::size_t i = 0; i < n; ++i) {
            const RngStream draw_stream = root.child(stream_purpose::training, i, round);
            if (params.append_samples && round > 0) {
                const std::size_t have = training.groups[i].size();
                if (sizes[i] > have) {
                    PointSet extra =
                        sample(instance.demands[i].dist, sizes[i] - have, draw_stream);
                    for (std::size_t j = 0; j < extra.size(); ++j)
                        training.groups[i].add(extra[j]);
                    result.samples_drawn += sizes[i] - have;
                }
            } else {
                training.groups[i] = sample(instance.demands[i].dist, sizes[i], draw_stream);
                result.samples_drawn += sizes[i];
            }
        }

        SolveOptions solver_opts = params.solver;
        solver_opts.warm_start = y_prev;
        const SolveOutcome sol = solve(training, weights, lambda, solver_opts);

        const BootstrapSummary val =
            bootstrap_validate(sol.y, *validation, weights, lambda,
                               params.bootstrap_replicates, params.alpha,
                               root.child(stream_purpose::bootstrap_global, round),
                               params.solver.norm_p);

        IterationRecord rec;
        rec.round = round;
        rec.sizes = sizes;
        rec.y = sol.y;
        rec.rho_training = sol.value;
        rec.rho_validation = val.estimate;
        rec.halfwidth = val.halfwidth;
        rec.group_contributions =
            group_cost_vector(sol.y, training, weights, params.solver.norm_p);
        rec.group_halfwidths.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            rec.group_halfwidths[i] = per_group_halfwidth(
                sol.y, training.groups[i], weights[i], params.bootstrap_replicates,
                params.alpha, root.child(stream_purpose::bootstrap_group, i, round),
                params.solver.norm_p);
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();

        auto finish = [&result](StopReason reason) {
            const IterationRecord& fin = result.trace.back();
            result.stop_reason = reason;
            result.y = fin.y;
            result.rho_training = fin.rho_training;
            result.rho_validation = fin.rho_validation;
            result.halfwidth = fin.halfwidth;
            result.interval_lo = fin.rho_validation - fin.halfwidth;
            result.interval_hi = fin.rho_validation + fin.halfwidth;
        };

        std::vector<bool> unstable(n, true);
        if (round > 0) {
            for (std::size_t i = 0; i < n; ++i)
                unstable[i] =
                    std::abs(rec.group_contributions[i] - prev_contributions[i]) >
                        params.eps_stability ||
                    rec.group_halfwidths[i] > params.eps_halfwidth;
        } else {
            for (std::size_t i = 0; i < n; ++i)
                unstable[i] = true;  // no previous contribution to compare at round 0
        }
        const bool stable =
            round > 0 && std::none_of(unstable.begin(), unstable.end(), [](bool u) { return u; });

        result.trace.push_back(std::move(rec));
        const IterationRecord& last = result.trace.back();

        if (stable) {
            finish(StopReason::stability);
            break;
        }
        if (round >= params.max_rounds) {
            finish(StopReason::max_rounds);
            break;
        }

        std::vector<std::size_t> next = sizes;
        std::size_t next_total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (unstable[i])
                next[i] = static_cast<std::size_t>(
                    std::ceil(params.growth * static_cast<double>(sizes[i])));
            next_total += next[i];
        }
        if (next_total > params.budget_cap) {
            finish(StopReason::budget);
            break;
        }

        sizes = std::move(next);
        y_prev = last.y;
        prev_contributions = last.group_contributions;
    }
    return result;
}

// Trace export: one CSV row per round; vector-valued fields are
// semicolon-joined inside their column.
inline void write_trace_csv(const SaaResult& result, std::ostream& os) {
    os << "k,sizes,y,rho_train,rho_val,halfwidth,group_contributions,group_halfwidths,"
          "wall_time_s\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& rec : result.trace) {
        os << rec.round << ',';
        for (std::size_t i = 0; i < rec.sizes.size(); ++i)
            os << (i ? ";" : "") << rec.sizes[i];
        os << ',';
        for (std::size_t k = 0; k < rec.y.size(); ++k) os << (k ? ";" : "") << num(rec.y[k]);
        os << ',' << num(rec.rho_training) << ',' << num(rec.rho_validation) << ','
           << num(rec.halfwidth) << ',';
        for (std::size_t i = 0; i < rec.group_contributions.size(); ++i)
            os << (i ? ";" : "") << num(rec.group_contributions[i]);
        os << ',';
        for (std::size_t i = 0; i < rec.group_halfwidths.size(); ++i)
            os << (i ? ";" : "") << num(rec.group_halfwidths[i]);
        os << ',' << num(rec.wall_time_s) << '\n';
    }
}

}  // namespace owp
