// owp: generate ordered-Weber instances under demand uncertainty, solve them
// with the adaptive sampling / discretized / center-surrogate approaches,
// benchmark the three side by side, and print analytical bound reports.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "owp/bench.hpp"
#include "owp/bounds.hpp"
#include "owp/conic.hpp"
#include "owp/instance.hpp"
#include "owp/saa.hpp"

namespace fs = std::filesystem;
using namespace owp;

namespace {

SaaParams load_params(const std::string& path) {
    SaaParams p;
    if (path.empty()) return p;
    std::ifstream is(path);
    if (!is) throw ConfigError("params: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("params: " + path + ": " + e.what());
    }
    p.growth = j.value("growth", p.growth);
    p.eps_stability = j.value("eps_stability", p.eps_stability);
    p.eps_halfwidth = j.value("eps_halfwidth", p.eps_halfwidth);
    p.max_rounds = j.value("max_rounds", p.max_rounds);
    p.validation_size = j.value("validation_size", p.validation_size);
    p.bootstrap_replicates = j.value("bootstrap_replicates", p.bootstrap_replicates);
    p.alpha = j.value("alpha", p.alpha);
    p.budget_cap = j.value("budget_cap", p.budget_cap);
    p.append_samples = j.value("append_samples", p.append_samples);
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        p.solver.tol = s.value("tol", p.solver.tol);
        p.solver.max_iters = s.value("max_iters", p.solver.max_iters);
        p.solver.norm_p = s.value("norm_p", p.solver.norm_p);
        if (s.value("step_rule", "polyak") == "diminishing")
            p.solver.step_rule = StepRule::diminishing;
    }
    p.validate();
    return p;
}

std::vector<DistKind> parse_kinds(const std::string& csv) {
    std::vector<DistKind> kinds;
    std::istringstream is(csv);
    std::string token;
    while (std::getline(is, token, ',')) kinds.push_back(dist_kind_from_string(token));
    return kinds;
}

void print_point(const Point& y) {
    std::printf("y            =");
    for (double c : y) std::printf(" %.6f", c);
    std::printf("\n");
}

void print_result(const ApproachResult& r) {
    std::printf("approach     = %s\n", std::string(to_string(r.approach)).c_str());
    std::printf("instance     = %s (n=%zu, d=%zu, mode=%s)\n", r.instance_id.c_str(), r.n,
                r.d, r.mode.c_str());
    std::printf("lambda       = %s\n", r.lambda.c_str());
    print_point(r.y);
    std::printf("rho          = %.6f\n", r.rho);
    if (r.halfwidth) std::printf("halfwidth    = %.6f\n", *r.halfwidth);
    if (r.stop_reason)
        std::printf("stop reason  = %s\n", std::string(to_string(*r.stop_reason)).c_str());
    if (r.discrete_cap)
        std::printf("size cap     = %zu (proportional downscaling applied)\n",
                    r.discrete_cap);
    std::printf("cpu_time_s   = %.4f\n", r.cpu_time_s);
}

int cmd_generate(std::size_t n, std::size_t d, std::uint64_t seed, const std::string& mode,
                 const std::string& out, const std::string& lambda,
                 const std::string& kinds_csv, double kappa) {
    GenerateOptions opts;
    opts.lambda_preset = lambda;
    opts.kappa = kappa;
    if (!kinds_csv.empty()) opts.kinds = parse_kinds(kinds_csv);
    const Instance inst = generate(n, d, seed, gen_mode_from_string(mode), opts);
    save_instance(inst, out);
    std::printf("wrote %s (id=%s)\n", out.c_str(), inst.id.c_str());
    return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& approach,
              std::string lambda, std::uint64_t seed, const std::string& params_path,
              const std::string& trace_path, const std::string& conic_path,
              std::size_t discrete_per_scale, std::size_t discrete_cap) {
    Instance inst = load_instance(instance_path);
    if (lambda.empty()) lambda = inst.lambda_preset;
    const SaaParams params = load_params(params_path);
    const GroupedSample validation = draw_validation(inst, params.validation_size, seed);

    ApproachResult result;
    if (approach == "saa") {
        Instance run_inst = inst;
        run_inst.lambda_preset = lambda;
        const auto tic = std::chrono::steady_clock::now();
        const SaaResult res = run_adaptive_saa(run_inst, params, seed, &validation);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        result.instance_id = inst.id;
        result.n = inst.size();
        result.d = inst.dim;
        result.mode = inst.mode;
        result.lambda = lambda;
        result.approach = Approach::saa;
        result.seed = seed;
        result.y = res.y;
        result.rho = res.rho_validation;
        result.halfwidth = res.halfwidth;
        result.stop_reason = res.stop_reason;
        result.cpu_time_s = elapsed;
        if (!trace_path.empty()) {
            std::ofstream os(trace_path);
            write_trace_csv(res, os);
            std::printf("trace        -> %s (%zu rounds)\n", trace_path.c_str(),
                        res.trace.size());
        }
    } else if (approach == "discrete") {
        result = run_discrete(inst, lambda, params.solver, seed, validation,
                              discrete_per_scale, discrete_cap);
    } else if (approach == "centers") {
        result = run_centers(inst, lambda, params.solver, seed, validation);
    } else {
        throw ConfigError("unknown approach '" + approach + "'");
    }
    print_result(result);

    if (!conic_path.empty()) {
        // Conic rendering of the deterministic subproblem the approach solves:
        // centers for `centers`, the seeded draw otherwise.
        GroupedSample groups;
        if (approach == "centers") {
            for (const auto& dem : inst.demands) {
                PointSet g(inst.dim);
                g.add(dem.dist.center());
                groups.groups.push_back(std::move(g));
            }
        } else {
            const RngStream root = RngStream(seed).child(fnv1a64(inst.id));
            for (std::size_t i = 0; i < inst.size(); ++i)
                groups.groups.push_back(sample(inst.demands[i].dist,
                                               initial_sample_size(inst.demands[i], inst.size()),
                                               root.child(stream_purpose::misc, i)));
        }
        const auto form = export_conic(groups, inst.weights(),
                                       LambdaWeights::preset(lambda, inst.size()),
                                       params.solver.norm_p);
        std::ofstream os(conic_path);
        render_conic_text(form, groups, os);
        std::printf("conic        -> %s (%zu lin rows, %zu cone rows)\n",
                    conic_path.c_str(), form.total_lin_rows(), form.total_cone_rows());
    }
    return 0;
}

int cmd_bench(const std::string& instances_dir, const std::string& lambdas_csv,
              const std::string& seeds_csv, const std::string& out_dir,
              const std::string& params_path, std::size_t discrete_per_scale,
              std::size_t discrete_cap) {
    std::vector<Instance> instances;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(instances_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) instances.push_back(load_instance(f));
    if (instances.empty()) throw ConfigError("bench: no .json instances in " + instances_dir);

    BenchConfig config;
    config.saa = load_params(params_path);
    config.discrete_per_scale = discrete_per_scale;
    config.discrete_cap = discrete_cap;
    config.lambdas.clear();
    {
        std::istringstream is(lambdas_csv);
        std::string token;
        while (std::getline(is, token, ',')) config.lambdas.push_back(token);
    }
    config.seeds.clear();
    {
        std::istringstream is(seeds_csv);
        std::string token;
        while (std::getline(is, token, ',')) config.seeds.push_back(std::stoull(token));
    }

    const auto results = run_bench(instances, config, out_dir);
    std::printf("%zu runs (%zu instances x %zu lambdas x %zu seeds x 3 approaches)\n",
                results.size(), instances.size(), config.lambdas.size(),
                config.seeds.size());
    for (const std::string key : {"n", "lambda", "d", "mode"})
        std::printf("\nby %s:\n%s", key.c_str(),
                    format_summary_table(summarize(results, key)).c_str());
    std::printf("\nresults      -> %s/results.csv\n", out_dir.c_str());
    return 0;
}

int cmd_bounds(const std::string& instance_path, double eps, const std::string& csv_path) {
    const Instance inst = load_instance(instance_path);
    const BoundReport rep = bound_report(inst, eps);

    std::printf("instance       = %s (n=%zu, d=%zu, lambda=%s)\n", inst.id.c_str(),
                inst.size(), inst.dim, inst.lambda_preset.c_str());
    std::printf("eps_bar        = %.6f\n", rep.eps_bar);
    std::printf("hull diameter  = %.6f\n", rep.hull_diameter);
    std::printf("r_eps          = %.6f\n", rep.r_eps);
    if (std::isnan(rep.nu))
        std::printf("nu_lambda      = n/a (skewed demands)\n");
    else
        std::printf("nu_lambda      = %.6f\n", rep.nu);
    std::printf("%-8s %-10s %-10s %-22s %-16s\n", "demand", "kind", "weight",
                "E||y*-X|| (center)", "quantile radius");
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const auto& dem = inst.demands[i];
        char expect[32];
        if (std::isnan(rep.expected_distances[i]))
            std::snprintf(expect, sizeof expect, "%s", "n/a (skewed)");
        else
            std::snprintf(expect, sizeof expect, "%.6f", rep.expected_distances[i]);
        std::printf("%-8zu %-10s %-10.4f %-22s %-16.6f\n", i,
                    std::string(to_string(dem.dist.kind())).c_str(), dem.weight, expect,
                    rep.quantile_radii[i]);
    }

    if (!csv_path.empty()) {
        std::ofstream os(csv_path);
        os << "instance_id,demand,kind,weight,expected_center_distance,quantile_radius,"
              "eps_bar,hull_diameter,r_eps,nu_lambda\n";
        char buf[64];
        auto num = [&](double v) {
            if (std::isnan(v)) return std::string();
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        for (std::size_t i = 0; i < inst.size(); ++i) {
            const auto& dem = inst.demands[i];
            os << inst.id << ',' << i << ',' << to_string(dem.dist.kind()) << ','
               << num(dem.weight) << ',' << num(rep.expected_distances[i]) << ','
               << num(rep.quantile_radii[i]) << ',' << num(rep.eps_bar) << ','
               << num(rep.hull_diameter) << ',' << num(rep.r_eps) << ',' << num(rep.nu)
               << '\n';
        }
        std::printf("csv           -> %s\n", csv_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ordered Weber problems under spatial demand uncertainty"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic instance file");
    std::size_t gen_n = 10, gen_d = 2;
    std::uint64_t gen_seed = 0;
    std::string gen_mode = "sym", gen_out = "instance.json", gen_lambda = "median";
    std::string gen_kinds;
    double gen_kappa = 1.0;
    gen->add_option("--n", gen_n, "number of demands")->required();
    gen->add_option("--d", gen_d, "dimension (>= 2)")->required();
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--mode", gen_mode, "sym | asym | mixed");
    gen->add_option("--out", gen_out, "output file")->required();
    gen->add_option("--lambda", gen_lambda, "lambda preset stored in the file");
    gen->add_option("--kinds", gen_kinds, "comma list restricting the kind pool");
    gen->add_option("--kappa", gen_kappa, "skew strength for asym/mixed demands");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance with one approach");
    std::string sol_instance, sol_approach = "saa", sol_lambda, sol_params, sol_trace,
                sol_conic;
    std::uint64_t sol_seed = 0;
    std::size_t sol_per_scale = 100000, sol_cap = 1000000;
    solve_cmd->add_option("--instance", sol_instance, "instance file")->required();
    solve_cmd->add_option("--approach", sol_approach, "saa | discrete | centers");
    solve_cmd->add_option("--lambda", sol_lambda, "lambda preset override");
    solve_cmd->add_option("--seed", sol_seed, "run seed");
    solve_cmd->add_option("--params", sol_params, "JSON sampler/solver parameter file");
    solve_cmd->add_option("--trace", sol_trace, "write the adaptive trace CSV here");
    solve_cmd->add_option("--conic", sol_conic, "write a conic text export here");
    solve_cmd->add_option("--discrete-per-scale", sol_per_scale,
                          "points per unit scale for the discrete approach");
    solve_cmd->add_option("--discrete-cap", sol_cap, "total size cap for discrete");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run all approaches over instance sets");
    std::string ben_dir, ben_lambdas = "median,center,halfsum,halfcentdian",
                ben_seeds = "0", ben_out = "bench-out", ben_params;
    std::size_t ben_per_scale = 100000, ben_cap = 1000000;
    bench_cmd->add_option("--instances", ben_dir, "directory of instance .json files")
        ->required();
    bench_cmd->add_option("--lambdas", ben_lambdas, "comma list of presets");
    bench_cmd->add_option("--seeds", ben_seeds, "comma list of seeds");
    bench_cmd->add_option("--out", ben_out, "output directory")->required();
    bench_cmd->add_option("--params", ben_params, "JSON sampler/solver parameter file");
    bench_cmd->add_option("--discrete-per-scale", ben_per_scale,
                          "points per unit scale for the discrete approach");
    bench_cmd->add_option("--discrete-cap", ben_cap, "total size cap for discrete");

    // bounds
    auto* bounds_cmd = app.add_subcommand("bounds", "print the analytical bound report");
    std::string bnd_instance, bnd_csv;
    double bnd_eps = 0.05;
    bounds_cmd->add_option("--instance", bnd_instance, "instance file")->required();
    bounds_cmd->add_option("--eps", bnd_eps, "per-demand tail mass for the quantile sets");
    bounds_cmd->add_option("--csv", bnd_csv, "also write the report as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(gen_n, gen_d, gen_seed, gen_mode, gen_out, gen_lambda,
                                gen_kinds, gen_kappa);
        if (solve_cmd->parsed())
            return cmd_solve(sol_instance, sol_approach, sol_lambda, sol_seed, sol_params,
                             sol_trace, sol_conic, sol_per_scale, sol_cap);
        if (bench_cmd->parsed())
            return cmd_bench(ben_dir, ben_lambdas, ben_seeds, ben_out, ben_params,
                             ben_per_scale, ben_cap);
        if (bounds_cmd->parsed()) return cmd_bounds(bnd_instance, bnd_eps, bnd_csv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
