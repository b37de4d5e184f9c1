#pragma once

#include <atomic>
#include <mutex>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "owp/common.hpp"
#include "owp/instance.hpp"
#include "owp/ordered.hpp"
#include "owp/saa.hpp"
#include "owp/solver.hpp"

namespace owp {

enum class Approach { saa, discrete, centers };

inline std::string_view to_string(Approach a) {
    switch (a) {
        case Approach::saa: return "saa";
        case Approach::discrete: return "discrete";
        case Approach::centers: return "centers";
    }
    return "?";
}

struct ApproachResult {
    std::string instance_id;
    std::size_t n = 0;
    std::size_t d = 0;
    std::string mode;
    std::string lambda;
    Approach approach = Approach::saa;
    std::uint64_t seed = 0;
    Point y;
    double rho = 0.0;  // ordered objective on the shared validation sample
    std::optional<double> halfwidth;          // saa only
    double cpu_time_s = 0.0;
    std::optional<double> deviation_pct;      // vs the saa baseline
    std::optional<StopReason> stop_reason;    // saa only
    std::size_t discrete_cap = 0;             // nonzero when the size cap bound
};

namespace detail {

inline ApproachResult result_shell(const Instance& instance, std::string_view lambda,
                                   Approach approach, std::uint64_t seed) {
    ApproachResult r;
    r.instance_id = instance.id;
    r.n = instance.size();
    r.d = instance.dim;
    r.mode = instance.mode;
    r.lambda = std::string(lambda);
    r.approach = approach;
    r.seed = seed;
    return r;
}

}  // namespace detail

// Thin adapter over the adaptive sampler; the validation estimate doubles as
// the comparison value because the sample is shared across approaches.
inline ApproachResult run_saa(const Instance& instance, std::string_view lambda_preset,
                              const SaaParams& params, std::uint64_t seed,
                              const GroupedSample& validation) {
    Instance inst = instance;
    inst.lambda_preset = std::string(lambda_preset);
    ApproachResult out = detail::result_shell(inst, lambda_preset, Approach::saa, seed);
    const auto tic = std::chrono::steady_clock::now();
    const SaaResult res = run_adaptive_saa(inst, params, seed, &validation);
    out.cpu_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    out.y = res.y;
    out.rho = res.rho_validation;
    out.halfwidth = res.halfwidth;
    out.stop_reason = res.stop_reason;
    return out;
}

// Deterministic surrogate: each demand collapsed to its center.
inline ApproachResult run_centers(const Instance& instance, std::string_view lambda_preset,
                                  const SolveOptions& solver_opts, std::uint64_t seed,
                                  const GroupedSample& validation) {
    Instance inst = instance;
    inst.lambda_preset = std::string(lambda_preset);
    ApproachResult out = detail::result_shell(inst, lambda_preset, Approach::centers, seed);
    const LambdaWeights lambda = inst.lambda();
    const std::vector<double> weights = inst.weights();

    const auto tic = std::chrono::steady_clock::now();
    GroupedSample groups;
    for (const auto& dem : inst.demands) {
        PointSet g(inst.dim);
        g.add(dem.dist.center());
        groups.groups.push_back(std::move(g));
    }
    const SolveOutcome sol = solve(groups, weights, lambda, solver_opts);
    out.cpu_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    out.y = sol.y;
    out.rho = empirical_objective(sol.y, validation, weights, lambda, solver_opts.norm_p).total;
    return out;
}

// One-shot discretization with per-demand sizes ceil(per_scale * R_i), capped
// in total by proportional downscaling (the applied cap is recorded).
inline ApproachResult run_discrete(const Instance& instance, std::string_view lambda_preset,
                                   const SolveOptions& solver_opts, std::uint64_t seed,
                                   const GroupedSample& validation,
                                   std::size_t per_scale = 100000,
                                   std::size_t total_cap = 1000000) {
    require_domain(per_scale >= 1 && total_cap >= instance.size(),
                   "run_discrete: infeasible sizing budget");
    Instance inst = instance;
    inst.lambda_preset = std::string(lambda_preset);
    ApproachResult out = detail::result_shell(inst, lambda_preset, Approach::discrete, seed);
    const LambdaWeights lambda = inst.lambda();
    const std::vector<double> weights = inst.weights();
    const std::size_t n = inst.size();

    std::vector<std::size_t> sizes(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = scale_proxy(inst.demands[i].dist);
        sizes[i] = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(static_cast<double>(per_scale) * scale)));
        total += sizes[i];
    }
    if (total > total_cap) {
        const double factor = static_cast<double>(total_cap) / static_cast<double>(total);
        for (auto& s : sizes)
            s = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(static_cast<double>(s) * factor)));
        out.discrete_cap = total_cap;
    }

    const auto tic = std::chrono::steady_clock::now();
    const RngStream root = RngStream(seed).child(fnv1a64(inst.id));
    GroupedSample groups;
    for (std::size_t i = 0; i < n; ++i)
        groups.groups.push_back(
            sample(inst.demands[i].dist, sizes[i], root.child(stream_purpose::discrete, i)));
    const SolveOutcome sol = solve(groups, weights, lambda, solver_opts);
    out.cpu_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    out.y = sol.y;
    out.rho = empirical_objective(sol.y, validation, weights, lambda, solver_opts.norm_p).total;
    return out;
}

// exp(mean ln(t + s)) - s; outlier-robust runtime aggregate.
inline double shifted_geometric_mean(std::span<const double> times, double shift) {
    require_domain(!times.empty(), "shifted_geometric_mean: empty list");
    require_domain(shift > 0.0, "shifted_geometric_mean: shift must be > 0");
    double acc = 0.0;
    for (double t : times) {
        require_domain(t >= 0.0, "shifted_geometric_mean: negative time");
        acc += std::log(t + shift);
    }
    return std::exp(acc / static_cast<double>(times.size())) - shift;
}

struct RatioCi {
    double ratio = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Geometric mean of shifted runtime ratios with a bootstrap quantile CI over
// the pairs.
inline RatioCi gm_ratio_ci(std::span<const std::pair<double, double>> pairs, double shift,
                           std::size_t replicates, double alpha, RngStream rng) {
    require_domain(pairs.size() >= 2, "gm_ratio_ci: need at least 2 pairs");
    require_domain(replicates >= 2, "gm_ratio_ci: need B >= 2");
    std::vector<double> log_ratio(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        require_domain(pairs[i].first >= 0.0 && pairs[i].second >= 0.0,
                       "gm_ratio_ci: negative time");
        log_ratio[i] = std::log((pairs[i].first + shift) / (pairs[i].second + shift));
    }
    auto mean_of = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    RatioCi out;
    out.ratio = std::exp(mean_of(log_ratio));

    std::vector<double> stats(replicates);
    std::vector<double> resampled(pairs.size());
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            resampled[i] = log_ratio[rng.next_u64() % log_ratio.size()];
        stats[rep] = std::exp(mean_of(resampled));
    }
    std::sort(stats.begin(), stats.end());
    out.lo = quantile_type7(stats, alpha / 2.0);
    out.hi = quantile_type7(stats, 1.0 - alpha / 2.0);
    return out;
}

// Fills deviation_pct: 100 (rho_a - rho_saa) / rho_saa against the saa row of
// the same (instance, lambda, seed) cell.
inline void assign_deviations(std::vector<ApproachResult>& results) {
    std::map<std::string, double> baseline;
    auto key = [](const ApproachResult& r) {
        return r.instance_id + '|' + r.lambda + '|' + std::to_string(r.seed);
    };
    for (const auto& r : results)
        if (r.approach == Approach::saa) baseline[key(r)] = r.rho;
    for (auto& r : results) {
        const auto it = baseline.find(key(r));
        if (it == baseline.end())
            throw ConfigError("report: missing saa baseline for " + key(r));
        r.deviation_pct = r.approach == Approach::saa
                              ? 0.0
                              : 100.0 * (r.rho - it->second) / it->second;
    }
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// Results CSV; y coordinates expand to one column per dimension (padded when
// instances of mixed dimension appear together).
inline void write_results_csv(const std::vector<ApproachResult>& results, std::ostream& os) {
    require_domain(!results.empty(), "write_results_csv: no results");
    std::size_t dmax = 0;
    for (const auto& r : results) dmax = std::max(dmax, r.d);
    os << "instance_id,n,d,mode,lambda,approach,seed";
    for (std::size_t k = 0; k < dmax; ++k) os << ",y" << (k + 1);
    os << ",rho,halfwidth,cpu_time_s,deviation_pct,stop_reason\n";
    for (const auto& r : results) {
        os << r.instance_id << ',' << r.n << ',' << r.d << ',' << r.mode << ',' << r.lambda
           << ',' << to_string(r.approach) << ',' << r.seed;
        for (std::size_t k = 0; k < dmax; ++k)
            os << ',' << (k < r.y.size() ? detail::fmt_double(r.y[k]) : std::string());
        os << ',' << detail::fmt_double(r.rho) << ','
           << (r.halfwidth ? detail::fmt_double(*r.halfwidth) : std::string()) << ','
           << detail::fmt_double(r.cpu_time_s) << ','
           << (r.deviation_pct ? detail::fmt_double(*r.deviation_pct) : std::string()) << ','
           << (r.stop_reason ? std::string(to_string(*r.stop_reason)) : std::string())
           << '\n';
    }
}

struct SgmSummary {
    std::string key;    // grouping field name
    std::string value;  // group value
    std::size_t runs = 0;
    double sgm_saa = 0.0;
    double sgm_discrete = 0.0;
    double sgm_centers = 0.0;
    RatioCi saa_vs_discrete;  // GM ratio with bootstrap CI
    double speedup_pct = 0.0;
};

// Per-group SGM / GM-ratio statistics; pairs are matched on
// (instance, lambda, seed) between saa and discrete runs.
inline std::vector<SgmSummary> summarize(const std::vector<ApproachResult>& results,
                                         const std::string& key, double shift = 1e-3,
                                         std::size_t replicates = 2000, double alpha = 0.05,
                                         std::uint64_t ci_seed = 17) {
    auto field = [&](const ApproachResult& r) -> std::string {
        if (key == "n") return std::to_string(r.n);
        if (key == "d") return std::to_string(r.d);
        if (key == "lambda") return r.lambda;
        if (key == "mode") return r.mode;
        throw ConfigError("summarize: unknown group key '" + key + "'");
    };
    std::map<std::string, std::vector<const ApproachResult*>> groups;
    for (const auto& r : results) groups[field(r)].push_back(&r);

    std::vector<SgmSummary> out;
    for (const auto& [value, rows] : groups) {
        SgmSummary s;
        s.key = key;
        s.value = value;
        std::vector<double> t_saa, t_disc, t_cent;
        std::map<std::string, std::pair<double, double>> paired;
        for (const auto* r : rows) {
            const std::string cell =
                r->instance_id + '|' + r->lambda + '|' + std::to_string(r->seed);
            switch (r->approach) {
                case Approach::saa:
                    t_saa.push_back(r->cpu_time_s);
                    paired[cell].first = r->cpu_time_s;
                    break;
                case Approach::discrete:
                    t_disc.push_back(r->cpu_time_s);
                    paired[cell].second = r->cpu_time_s;
                    break;
                case Approach::centers: t_cent.push_back(r->cpu_time_s); break;
            }
        }
        s.runs = rows.size();
        if (!t_saa.empty()) s.sgm_saa = shifted_geometric_mean(t_saa, shift);
        if (!t_disc.empty()) s.sgm_discrete = shifted_geometric_mean(t_disc, shift);
        if (!t_cent.empty()) s.sgm_centers = shifted_geometric_mean(t_cent, shift);
        std::vector<std::pair<double, double>> pairs;
        for (const auto& [cell, p] : paired) pairs.push_back(p);
        if (pairs.size() >= 2) {
            s.saa_vs_discrete = gm_ratio_ci(pairs, shift, replicates, alpha,
                                            RngStream(ci_seed).child(fnv1a64(value)));
            s.speedup_pct = 100.0 * (1.0 - s.saa_vs_discrete.ratio);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(const std::vector<SgmSummary>& summaries, std::ostream& os) {
    os << "key,value,runs,sgm_saa,sgm_discrete,sgm_centers,gm_ratio,ci_lo,ci_hi,speedup_pct\n";
    for (const auto& s : summaries) {
        os << s.key << ',' << s.value << ',' << s.runs << ','
           << detail::fmt_double(s.sgm_saa) << ',' << detail::fmt_double(s.sgm_discrete)
           << ',' << detail::fmt_double(s.sgm_centers) << ','
           << detail::fmt_double(s.saa_vs_discrete.ratio) << ','
           << detail::fmt_double(s.saa_vs_discrete.lo) << ','
           << detail::fmt_double(s.saa_vs_discrete.hi) << ','
           << detail::fmt_double(s.speedup_pct) << '\n';
    }
}

inline std::string format_summary_table(const std::vector<SgmSummary>& summaries) {
    std::ostringstream os;
    os << std::left << std::setw(8) << "key" << std::setw(10) << "value" << std::right
       << std::setw(6) << "runs" << std::setw(12) << "SGM(saa)" << std::setw(14)
       << "SGM(discrete)" << std::setw(13) << "SGM(centers)" << std::setw(10) << "ratio"
       << std::setw(18) << "95% CI" << std::setw(12) << "speedup%" << '\n';
    for (const auto& s : summaries) {
        std::ostringstream ci;
        ci << '[' << std::fixed << std::setprecision(3) << s.saa_vs_discrete.lo << ", "
           << s.saa_vs_discrete.hi << ']';
        os << std::left << std::setw(8) << s.key << std::setw(10) << s.value << std::right
           << std::setw(6) << s.runs << std::fixed << std::setprecision(4) << std::setw(12)
           << s.sgm_saa << std::setw(14) << s.sgm_discrete << std::setw(13) << s.sgm_centers
           << std::setprecision(3) << std::setw(10) << s.saa_vs_discrete.ratio
           << std::setw(18) << ci.str() << std::setprecision(1) << std::setw(12)
           << s.speedup_pct << '\n';
    }
    return os.str();
}

inline std::size_t thread_budget(std::size_t tasks) {
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("OWP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(cap, tasks));
}

struct BenchConfig {
    std::vector<std::string> lambdas = {"median", "center", "halfsum", "halfcentdian"};
    std::vector<std::uint64_t> seeds = {0};
    SaaParams saa;
    std::size_t discrete_per_scale = 100000;
    std::size_t discrete_cap = 1000000;
};

// Runs all three approaches for every (instance, lambda, seed) cell on a
// bit-identical shared validation sample. Cells run in parallel (capped by
// OWP_THREADS); approaches within a cell run sequentially so their timings
// stay meaningful. Output order is by task index, independent of scheduling.
inline std::vector<ApproachResult> run_bench_matrix(const std::vector<Instance>& instances,
                                                    const BenchConfig& config) {
    struct Task {
        const Instance* instance;
        std::string lambda;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& inst : instances)
        for (const auto& lam : config.lambdas)
            for (const auto seed : config.seeds) tasks.push_back({&inst, lam, seed});
    require_domain(!tasks.empty(), "bench: empty task list");

    std::vector<std::vector<ApproachResult>> slots(tasks.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = cursor.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                const Task& task = tasks[t];
                const GroupedSample validation =
                    draw_validation(*task.instance, config.saa.validation_size, task.seed);
                std::vector<ApproachResult> cell;
                cell.push_back(
                    run_saa(*task.instance, task.lambda, config.saa, task.seed, validation));
                cell.push_back(run_discrete(*task.instance, task.lambda, config.saa.solver,
                                            task.seed, validation,
                                            config.discrete_per_scale,
                                            config.discrete_cap));
                cell.push_back(run_centers(*task.instance, task.lambda, config.saa.solver,
                                           task.seed, validation));
                slots[t] = std::move(cell);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = thread_budget(tasks.size());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<ApproachResult> results;
    for (auto& cell : slots)
        for (auto& r : cell) results.push_back(std::move(r));
    assign_deviations(results);
    return results;
}

// Full bench run: results CSV, per-key summary CSVs, and a text report.
inline std::vector<ApproachResult> run_bench(const std::vector<Instance>& instances,
                                             const BenchConfig& config,
                                             const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto results = run_bench_matrix(instances, config);

    {
        std::ofstream os(out_dir / "results.csv");
        write_results_csv(results, os);
    }
    std::ostringstream text;
    for (const std::string key : {"n", "lambda", "d", "mode"}) {
        const auto summaries = summarize(results, key);
        std::ofstream os(out_dir / ("summary_by_" + key + ".csv"));
        write_summary_csv(summaries, os);
        text << format_summary_table(summaries) << '\n';
    }
    {
        std::ofstream os(out_dir / "summary.txt");
        os << text.str();
    }
    {
        nlohmann::json jc;
        jc["lambdas"] = config.lambdas;
        jc["seeds"] = config.seeds;
        jc["discrete_per_scale"] = config.discrete_per_scale;
        jc["discrete_cap"] = config.discrete_cap;
        jc["validation_size"] = config.saa.validation_size;
        jc["bootstrap_replicates"] = config.saa.bootstrap_replicates;
        jc["alpha"] = config.saa.alpha;
        jc["budget_cap"] = config.saa.budget_cap;
        std::ofstream os(out_dir / "bench_config.json");
        os << jc.dump(2) << '\n';
    }
    return results;
}

}  // namespace owp
