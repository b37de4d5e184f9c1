// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Run directly or through ctest (-R acceptance).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "owp/bench.hpp"
#include "owp/bounds.hpp"
#include "owp/instance.hpp"
#include "owp/rng.hpp"
#include "owp/saa.hpp"
#include "owp/solver.hpp"

using namespace owp;
namespace fs = std::filesystem;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point tic = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    }
};

void report(const char* id, const char* name, bool ok, double secs) {
    std::printf("[acceptance] %-3s %-55s %s (%.1f s)\n", id, name, ok ? "PASS" : "FAIL",
                secs);
    std::fflush(stdout);
}

GroupedSample single(PointSet pts) {
    GroupedSample s;
    s.groups.push_back(std::move(pts));
    return s;
}

// Shared study used by criteria 4 and 5b: twenty random symmetric instances
// (five per lambda preset), each with an adaptive-sampling run, a center
// surrogate run, and a shared validation sample.
struct SymRun {
    Instance instance;
    GroupedSample validation;
    Point y_saa;
    Point y_centers;
};

const std::vector<SymRun>& sym_study() {
    static const std::vector<SymRun> runs = [] {
        std::vector<SymRun> out;
        SaaParams params;
        params.budget_cap = 100000;
        params.validation_size = 10000;
        std::uint64_t seed = 0;
        for (const auto& preset : LambdaWeights::preset_names()) {
            for (int rep = 0; rep < 5; ++rep, ++seed) {
                SymRun run{generate(10, 2, 1000 + seed, GenMode::sym), {}, {}, {}};
                run.instance.lambda_preset = preset;
                run.validation =
                    draw_validation(run.instance, params.validation_size, seed);
                run.y_saa =
                    run_adaptive_saa(run.instance, params, seed, &run.validation).y;
                run.y_centers =
                    run_centers(run.instance, preset, params.solver, seed, run.validation)
                        .y;
                out.push_back(std::move(run));
            }
        }
        return out;
    }();
    return runs;
}

double percent_dev(double rho, double rho_base) {
    return 100.0 * (rho - rho_base) / rho_base;
}

}  // namespace

TEST_CASE("criterion 1: closed-form table reproduction") {
    Timer timer;
    bool ok = true;
    const std::size_t m = 1000000;
    std::uint64_t seed = 10;
    for (std::size_t d : {2u, 3u, 5u}) {
        const Point c(d, 0.5);
        const DistributionSpec specs[] = {
            DistributionSpec::sphere(c, 1.3), DistributionSpec::ball(c, 1.1),
            DistributionSpec::shell(c, 0.7, 1.2), DistributionSpec::gaussian(c, 0.9),
            DistributionSpec::t_student(c, 4.0, 0.8)};
        for (const auto& spec : specs) {
            const PointSet pts = sample(spec, m, RngStream(seed++));
            double sum = 0.0, sumsq = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double dist = euclidean_distance(pts[j], c);
                sum += dist;
                sumsq += dist * dist;
            }
            const double mean = sum / static_cast<double>(m);
            const double var =
                std::max(0.0, sumsq / static_cast<double>(m) - mean * mean);
            const double se = std::sqrt(var / static_cast<double>(m));
            const double expect = expected_center_distance(spec);
            const bool here = std::abs(mean - expect) <= 3.0 * se + 1e-9 * (1.0 + expect);
            if (!here)
                std::printf("  C1 miss: kind=%s d=%zu mean=%.6f expect=%.6f se=%.2g\n",
                            std::string(to_string(spec.kind())).c_str(), d, mean, expect,
                            se);
            ok = ok && here;
        }
    }
    const double secs = timer.seconds();
    ok = ok && secs < 120.0;
    report("C1", "closed-form table reproduction (5 kinds x d=2,3,5)", ok, secs);
    CHECK(ok);
}

namespace {
// Criterion 5a piggybacks on criterion 2's solver runs.
std::size_t c5a_runs = 0;
std::size_t c5a_hits = 0;
}  // namespace

TEST_CASE("criterion 2: solver-oracle equivalence on random instances") {
    Timer timer;
    bool ok = true;
    RngStream rng(2024);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + rng.next_u64() % 5;  // n <= 6
        GroupedSample samples;
        for (std::size_t i = 0; i < n; ++i) {
            PointSet g(2);
            const std::size_t mi = 1 + rng.next_u64() % 20;  // m_i <= 20
            for (std::size_t j = 0; j < mi; ++j) {
                Point p{rng.next_unit(), rng.next_unit()};
                g.add(p);
            }
            samples.groups.push_back(std::move(g));
        }
        std::vector<double> weights(n);
        for (double& w : weights) w = 0.5 + 1.5 * rng.next_unit();

        Box box;
        box.lo.assign(2, std::numeric_limits<double>::infinity());
        box.hi.assign(2, -std::numeric_limits<double>::infinity());
        for (const auto& g : samples.groups)
            for (std::size_t j = 0; j < g.size(); ++j)
                for (std::size_t k = 0; k < 2; ++k) {
                    box.lo[k] = std::min(box.lo[k], g[j][k]);
                    box.hi[k] = std::max(box.hi[k], g[j][k]);
                }
        double diameter = 0.0;
        for (std::size_t k = 0; k < 2; ++k) {
            box.lo[k] -= 0.05;
            box.hi[k] += 0.05;
            diameter += (box.hi[k] - box.lo[k]) * (box.hi[k] - box.lo[k]);
        }
        diameter = std::sqrt(diameter);

        for (const auto& preset : LambdaWeights::preset_names()) {
            const auto lambda = LambdaWeights::preset(preset, n);
            const auto sol = solve(samples, weights, lambda);
            const auto oracle = brute_force_oracle(samples, weights, lambda, box, 300);
            const bool here =
                std::abs(sol.value - oracle.value) <= 1e-3 * (1.0 + oracle.value);
            if (!here)
                std::printf("  C2 miss: t=%d preset=%s solve=%.8f oracle=%.8f\n", t,
                            preset.c_str(), sol.value, oracle.value);
            ok = ok && here;

            ++c5a_runs;
            if (hull_distance(sol.y, samples).distance <= 1e-4 * (1.0 + diameter))
                ++c5a_hits;
        }
    }
    const double secs = timer.seconds();
    ok = ok && secs < 300.0;
    report("C2", "solver-oracle equivalence (50 instances x 4 presets)", ok, secs);
    CHECK(ok);
}

TEST_CASE("criterion 3: center recovery for single symmetric demands") {
    Timer timer;
    bool ok = true;
    const Point c{1.5, -0.5};
    const DistributionSpec specs[] = {
        DistributionSpec::sphere(c, 1.0), DistributionSpec::ball(c, 1.0),
        DistributionSpec::shell(c, 0.8, 1.0), DistributionSpec::gaussian(c, 0.5),
        DistributionSpec::t_student(c, 4.0, 0.5)};
    for (const auto& spec : specs) {
        std::size_t passes = 0;
        const double scale = scale_proxy(spec);
        for (std::uint64_t s = 0; s < 10; ++s) {
            Instance inst;
            inst.id = "c3-" + std::string(to_string(spec.kind()));
            inst.dim = 2;
            inst.lambda_preset = "median";
            inst.demands.push_back({spec, 1.0});
            SaaParams params;
            params.budget_cap = 100000;
            const SaaResult res = run_adaptive_saa(inst, params, s);
            if (euclidean_distance(res.y, c) <= 0.05 * scale) ++passes;
        }
        if (passes < 9)
            std::printf("  C3 miss: kind=%s passes=%zu/10\n",
                        std::string(to_string(spec.kind())).c_str(), passes);
        ok = ok && passes >= 9;
    }
    report("C3", "center recovery, budget 1e5 (5 kinds x 10 seeds, >=9/10)", ok,
           timer.seconds());
    CHECK(ok);
}

TEST_CASE("criterion 4: nu_lambda bound holds empirically") {
    Timer timer;
    bool ok = true;
    std::uint64_t seed = 0;
    for (const auto& run : sym_study()) {
        const auto rep = verify_gap_bound(run.instance, run.y_saa, run.y_centers,
                                          run.validation, 200, 0.05,
                                          RngStream(4000).child(seed++));
        if (!rep.pass)
            std::printf("  C4 miss: %s lambda=%s gap=%.4f nu=%.4f slack=%.4f\n",
                        run.instance.id.c_str(), run.instance.lambda_preset.c_str(),
                        rep.gap, rep.nu, rep.slack);
        ok = ok && rep.pass;
    }
    report("C4", "gap <= nu + slack on 20 symmetric instances (100%)", ok,
           timer.seconds());
    CHECK(ok);
}

TEST_CASE("criterion 5: minimizers stay near the demand hulls") {
    Timer timer;
    // Part (a): accumulated over every criterion-2 solver run. When this
    // criterion runs alone, draw a reduced set of solver runs first.
    if (c5a_runs == 0) {
        RngStream rng(505);
        for (int t = 0; t < 12; ++t) {
            const std::size_t n = 2 + rng.next_u64() % 5;
            GroupedSample samples;
            for (std::size_t i = 0; i < n; ++i) {
                PointSet g(2);
                const std::size_t mi = 1 + rng.next_u64() % 20;
                for (std::size_t j = 0; j < mi; ++j) {
                    Point p{rng.next_unit(), rng.next_unit()};
                    g.add(p);
                }
                samples.groups.push_back(std::move(g));
            }
            std::vector<double> weights(n, 1.0);
            const auto lambda = LambdaWeights::preset(
                LambdaWeights::preset_names()[t % 4], n);
            const auto sol = solve(samples, weights, lambda);
            ++c5a_runs;
            if (hull_distance(sol.y, samples).distance <= 1e-4 * (1.0 + std::sqrt(2.0)))
                ++c5a_hits;
        }
    }
    bool ok = c5a_runs > 0 && c5a_hits == c5a_runs;
    if (!ok)
        std::printf("  C5a: %zu/%zu solver runs inside the sample hull tolerance\n",
                    c5a_hits, c5a_runs);

    // Part (b): the adaptive minimizer lies within r_eps of conv(union K_i)
    // with K_i the 0.95 radial-quantile balls.
    for (const auto& run : sym_study()) {
        const auto& inst = run.instance;
        const auto rep = bound_report(inst, 0.05);
        PointSet hull_pts(2);
        for (std::size_t i = 0; i < inst.size(); ++i) {
            const Point& c = inst.demands[i].dist.center();
            const double radius = rep.quantile_radii[i];
            const int segments = 128;
            for (int a = 0; a < segments; ++a) {
                const double angle =
                    2.0 * std::numbers::pi * static_cast<double>(a) / segments;
                Point p{c[0] + radius * std::cos(angle), c[1] + radius * std::sin(angle)};
                hull_pts.add(p);
            }
        }
        const double dist = hull_distance(run.y_saa, hull_pts).distance;
        const bool here = dist <= rep.r_eps + 1e-6;
        if (!here)
            std::printf("  C5b miss: %s dist=%.6f r_eps=%.6f\n", inst.id.c_str(), dist,
                        rep.r_eps);
        ok = ok && here;
    }
    report("C5", "hull proximity: solver runs + eps-quantile sets (100%)", ok,
           timer.seconds());
    CHECK(ok);
}

TEST_CASE("criterion 6: qualitative 1/sqrt(m) convergence rate") {
    Timer timer;
    // Fixed symmetric two-demand instance; the optimum is the origin.
    const auto left = DistributionSpec::gaussian(Point{-2.0, 0.0}, 0.8);
    const auto right = DistributionSpec::gaussian(Point{2.0, 0.0}, 0.8);
    const std::vector<double> weights{1.0, 1.0};
    const LambdaWeights lambda = LambdaWeights::preset("median", 2);

    std::vector<double> log_m, log_err;
    for (int level = 0; level < 4; ++level) {
        const std::size_t m = static_cast<std::size_t>(std::pow(10.0, 2 + level));
        std::vector<double> errors;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const RngStream root = RngStream(6000 + s);
            GroupedSample samples;
            samples.groups.push_back(sample(left, m, root.child(1, level)));
            samples.groups.push_back(sample(right, m, root.child(2, level)));
            SolveOptions opts;
            opts.tol = 1e-9;
            const auto sol = solve(samples, weights, lambda, opts);
            errors.push_back(euclidean_norm(sol.y));
        }
        std::sort(errors.begin(), errors.end());
        const double median = 0.5 * (errors[9] + errors[10]);
        log_m.push_back(std::log(static_cast<double>(m)));
        log_err.push_back(std::log(median));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        mx += log_m[i];
        my += log_err[i];
    }
    mx /= 4.0;
    my /= 4.0;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        sxx += (log_m[i] - mx) * (log_m[i] - mx);
        sxy += (log_m[i] - mx) * (log_err[i] - my);
    }
    const double slope = sxy / sxx;
    const double secs = timer.seconds();
    const bool ok = slope >= -0.7 && slope <= -0.3 && secs < 600.0;
    if (!ok) std::printf("  C6: slope=%.3f\n", slope);
    report("C6", "log-log error slope in [-0.7, -0.3] over m=1e2..1e5", ok, secs);
    CHECK(ok);
}

TEST_CASE("criterion 7: behavioral reproduction of the uniform-ball pattern") {
    Timer timer;
    bool ok = true;
    GenerateOptions ball_only;
    ball_only.kinds = {DistKind::ball};
    SaaParams params;
    params.budget_cap = 200000;
    params.validation_size = 10000;

    std::vector<double> centers_devs;
    for (std::size_t n : {5u, 10u, 15u, 20u, 25u}) {
        const Instance inst = generate(n, 2, 0, GenMode::sym, ball_only);
        for (const auto& preset : LambdaWeights::preset_names()) {
            const GroupedSample validation =
                draw_validation(inst, params.validation_size, 0);
            const auto saa = run_saa(inst, preset, params, 0, validation);
            const auto disc = run_discrete(inst, preset, params.solver, 0, validation);
            const auto cent = run_centers(inst, preset, params.solver, 0, validation);

            const double dev_c = percent_dev(cent.rho, saa.rho);
            const double dev_d = percent_dev(disc.rho, saa.rho);
            centers_devs.push_back(dev_c);
            if (dev_c < -0.5) {
                std::printf("  C7 miss: n=%zu %s centers dev=%.3f%%\n", n, preset.c_str(),
                            dev_c);
                ok = false;
            }
            if (std::abs(dev_d) > 0.3) {
                std::printf("  C7 miss: n=%zu %s discrete dev=%.3f%%\n", n, preset.c_str(),
                            dev_d);
                ok = false;
            }
        }
    }
    std::sort(centers_devs.begin(), centers_devs.end());
    const double median_dev =
        0.5 * (centers_devs[centers_devs.size() / 2 - 1] +
               centers_devs[centers_devs.size() / 2]);
    if (median_dev <= 0.0) {
        std::printf("  C7: median centers deviation %.4f%% not positive\n", median_dev);
        ok = false;
    }
    report("C7", "uniform-ball pattern: centers >= -0.5%, median > 0, |disc| <= 0.3%", ok,
           timer.seconds());
    CHECK(ok);
}

TEST_CASE("criterion 8: SGM and GM-ratio machinery") {
    Timer timer;
    bool ok = true;

    std::vector<double> constant{3.0, 3.0, 3.0};
    ok = ok && std::abs(shifted_geometric_mean(constant, 1e-3) - 3.0) < 1e-12;
    const double direct =
        std::exp(0.5 * (std::log(10.0 + 1e-3) + std::log(1000.0 + 1e-3))) - 1e-3;
    ok = ok && std::abs(shifted_geometric_mean(std::vector<double>{10.0, 1000.0}, 1e-3) -
                        direct) < 1e-12;
    ok = ok && std::abs(direct - 100.00405) < 1e-3;
    ok = ok && std::abs(shifted_geometric_mean(std::vector<double>{0.0}, 1e-3)) < 1e-12;

    const std::vector<std::pair<double, double>> same{{1.0, 1.0}, {2.0, 2.0}};
    const auto ci_same = gm_ratio_ci(same, 1e-3, 100, 0.05, RngStream(1));
    ok = ok && std::abs(ci_same.ratio - 1.0) < 1e-12 && std::abs(ci_same.lo - 1.0) < 1e-12 &&
         std::abs(ci_same.hi - 1.0) < 1e-12;
    std::vector<std::pair<double, double>> halves;
    for (int i = 1; i <= 10; ++i)
        halves.push_back({0.5 * static_cast<double>(i), static_cast<double>(i)});
    ok = ok &&
         std::abs(gm_ratio_ci(halves, 1e-6, 100, 0.05, RngStream(2)).ratio - 0.5) < 1e-3;

    // Coverage simulation: lognormal pairs with true GM ratio 0.68.
    std::size_t covered = 0;
    RngStream rng(808);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<double, double>> pairs(60);
        for (auto& p : pairs) {
            const double tb = std::exp(0.5 * rng.next_gaussian());
            const double ta = 0.68 * tb * std::exp(0.2 * rng.next_gaussian());
            p = {ta, tb};
        }
        const auto ci = gm_ratio_ci(pairs, 1e-3, 1000, 0.05, rng.child(trial));
        if (ci.lo <= 0.68 && 0.68 <= ci.hi) ++covered;
    }
    if (covered < 90) std::printf("  C8: coverage %zu/100\n", covered);
    ok = ok && covered >= 90;
    report("C8", "SGM / GM-ratio examples exact; CI coverage >= 90%", ok, timer.seconds());
    CHECK(ok);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// results.csv comparison ignoring the cpu_time_s column.
bool csv_equal_ignoring_time(const fs::path& a, const fs::path& b) {
    std::ifstream ia(a), ib(b);
    if (!ia || !ib) return false;
    std::string ha, hb;
    std::getline(ia, ha);
    std::getline(ib, hb);
    if (ha != hb) return false;
    const std::vector<std::string> cols = split_csv(ha);
    std::size_t time_col = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == "cpu_time_s") time_col = i;
    std::string la, lb;
    while (true) {
        const bool ga = static_cast<bool>(std::getline(ia, la));
        const bool gb = static_cast<bool>(std::getline(ib, lb));
        if (ga != gb) return false;
        if (!ga) return true;
        const auto fa = split_csv(la);
        const auto fb = split_csv(lb);
        if (fa.size() != cols.size() || fb.size() != cols.size()) return false;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i == time_col) continue;
            if (fa[i] != fb[i]) return false;
        }
    }
}

}  // namespace

TEST_CASE("criterion 9: bench runs are deterministic up to timing") {
    Timer timer;
    const char* bin = std::getenv("OWP_BIN");
    REQUIRE_MESSAGE(bin != nullptr,
                    "OWP_BIN must point at the owp binary (set by ctest)");
    const fs::path work = fs::temp_directory_path() / "owp_acceptance_c9";
    fs::remove_all(work);
    fs::create_directories(work / "instances");

    auto shell = [&](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        return rc == 0;
    };
    bool ok = true;
    const std::string q = "\"" + std::string(bin) + "\"";
    ok = ok && shell(q + " generate --n 4 --d 2 --seed 3 --mode sym --out " +
                     (work / "instances/a.json").string() + " > /dev/null");
    ok = ok && shell(q + " generate --n 5 --d 2 --seed 4 --mode mixed --out " +
                     (work / "instances/b.json").string() + " > /dev/null");
    {
        std::ofstream os(work / "params.json");
        os << R"({"budget_cap": 20000, "validation_size": 1000,
                  "bootstrap_replicates": 64})";
    }
    const std::string common = q + " bench --instances " + (work / "instances").string() +
                               " --lambdas median,center --seeds 0,1 --params " +
                               (work / "params.json").string() +
                               " --discrete-per-scale 20000 --discrete-cap 100000 --out ";
    ok = ok && shell(common + (work / "out1").string() + " > /dev/null");
    ok = ok && shell(common + (work / "out2").string() + " > /dev/null");
    ok = ok && csv_equal_ignoring_time(work / "out1/results.csv",
                                       work / "out2/results.csv");

    // The generate subcommand is deterministic too: identical bytes.
    ok = ok && shell(q + " generate --n 4 --d 2 --seed 3 --mode sym --out " +
                     (work / "instances/a2.json").string() + " > /dev/null");
    {
        std::ifstream f1(work / "instances/a.json"), f2(work / "instances/a2.json");
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        ok = ok && s1.str() == s2.str() && !s1.str().empty();
    }
    report("C9", "owp bench twice: identical CSVs except cpu_time_s", ok, timer.seconds());
    CHECK(ok);
}
