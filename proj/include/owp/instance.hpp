#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "owp/common.hpp"
#include "owp/distributions.hpp"
#include "owp/ordered.hpp"
#include "owp/rng.hpp"

namespace owp {

namespace stream_purpose {
constexpr std::uint64_t generate = 1;
constexpr std::uint64_t training = 2;
constexpr std::uint64_t validation = 3;
constexpr std::uint64_t bootstrap_global = 4;
constexpr std::uint64_t bootstrap_group = 5;
constexpr std::uint64_t discrete = 6;
constexpr std::uint64_t misc = 7;
}  // namespace stream_purpose

struct DemandSpec {
    DistributionSpec dist;
    double weight = 1.0;
};

// A full problem statement: dimension, uncertain demands, and the rank-weight
// preset that defines the ordered objective.
struct Instance {
    std::string id;
    std::size_t dim = 0;
    std::vector<DemandSpec> demands;
    std::string lambda_preset = "median";
    std::uint64_t seed = 0;
    std::string mode = "sym";
    std::string recipe_version = "v1";

    std::size_t size() const { return demands.size(); }

    LambdaWeights lambda() const { return LambdaWeights::preset(lambda_preset, size()); }

    std::vector<double> weights() const {
        std::vector<double> w(size());
        for (std::size_t i = 0; i < size(); ++i) w[i] = demands[i].weight;
        return w;
    }

    std::vector<Point> centers() const {
        std::vector<Point> c(size());
        for (std::size_t i = 0; i < size(); ++i) c[i] = demands[i].dist.center();
        return c;
    }

    void validate() const {
        require_domain(!demands.empty(), "instance: needs at least one demand");
        require_dimension(dim >= 1, "instance: dimension must be >= 1");
        for (std::size_t i = 0; i < size(); ++i) {
            const auto& dem = demands[i];
            require_domain(dem.weight >= 0.0 && std::isfinite(dem.weight),
                           "instance: demand " + std::to_string(i) +
                               ": weight must be finite and >= 0");
            require_dimension(dem.dist.dim() == dim,
                              "instance: demand " + std::to_string(i) +
                                  ": center dimension mismatch");
        }
        LambdaWeights::preset(lambda_preset, size());  // throws on unknown preset
    }
};

enum class GenMode { sym, asym, mixed };

inline std::string_view to_string(GenMode m) {
    switch (m) {
        case GenMode::sym: return "sym";
        case GenMode::asym: return "asym";
        case GenMode::mixed: return "mixed";
    }
    return "?";
}

inline GenMode gen_mode_from_string(std::string_view s) {
    if (s == "sym") return GenMode::sym;
    if (s == "asym") return GenMode::asym;
    if (s == "mixed") return GenMode::mixed;
    throw ConfigError("unknown generation mode '" + std::string(s) + "'");
}

// Largest alpha honoring the pairwise non-overlap rule
// R_i + R_j <= ||c_i - c_j|| with R_i = (w_i alpha)^{1/d}.
inline double non_overlap_alpha(const std::vector<Point>& centers,
                                std::span<const double> weights) {
    require_domain(centers.size() >= 2, "non_overlap_alpha: needs at least two centers");
    const double d = static_cast<double>(centers.front().size());
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double dist = euclidean_distance(centers[i], centers[j]);
            const double denom = std::pow(weights[i], 1.0 / d) + std::pow(weights[j], 1.0 / d);
            alpha = std::min(alpha, std::pow(dist / denom, d));
        }
    }
    return alpha;
}

struct GenerateOptions {
    std::vector<DistKind> kinds = {DistKind::ball, DistKind::shell, DistKind::gaussian};
    double kappa = 1.0;           // skew strength for asym/mixed demands
    std::string lambda_preset = "median";
};

// Synthetic instance: centers uniform in [0,10]^d, weights uniform rescaled
// to [1,10], radii R_i = (w_i alpha)^{1/d} with alpha the largest value
// keeping all pairs non-overlapping. Kinds drawn uniformly from the pool with
// sigma_i = R_i/2 (gaussian) and (r_i, R_i) = (4R_i/5, R_i) (shell).
inline Instance generate(std::size_t n, std::size_t d, std::uint64_t seed, GenMode mode,
                         const GenerateOptions& options = {}) {
    require_domain(n >= 1, "generate: n must be >= 1");
    require_domain(d >= 2, "generate: d must be >= 2");
    require_domain(!options.kinds.empty(), "generate: empty kind pool");

    const RngStream root = RngStream(seed).child(stream_purpose::generate);

    std::vector<Point> centers(n, Point(d));
    bool distinct = false;
    for (std::uint64_t attempt = 0; attempt < 100 && !distinct; ++attempt) {
        RngStream cs = root.child(1, attempt);
        for (auto& c : centers)
            for (double& x : c) x = 10.0 * cs.next_unit();
        distinct = true;
        for (std::size_t i = 0; i < n && distinct; ++i)
            for (std::size_t j = i + 1; j < n && distinct; ++j)
                if (euclidean_distance(centers[i], centers[j]) < 1e-9) distinct = false;
    }
    if (!distinct) throw ConfigError("generate: coincident centers after 100 attempts");

    RngStream ws = root.child(2);
    std::vector<double> weights(n);
    for (double& w : weights) w = 1.0 + 9.0 * ws.next_unit();

    // alpha is undefined for a single demand; R = w^{1/d} there.
    const double alpha = n >= 2 ? non_overlap_alpha(centers, weights) : 1.0;

    RngStream kind_stream = root.child(3);
    RngStream skew_dir = root.child(4);
    RngStream skew_coin = root.child(5);

    Instance inst;
    inst.dim = d;
    inst.seed = seed;
    inst.mode = std::string(to_string(mode));
    inst.lambda_preset = options.lambda_preset;
    inst.recipe_version = "v1";
    {
        std::ostringstream id;
        id << "owp-n" << n << "-d" << d << '-' << to_string(mode) << "-s" << seed;
        if (options.kinds.size() == 1) id << '-' << to_string(options.kinds.front());
        inst.id = id.str();
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double radius = std::pow(weights[i] * alpha, 1.0 / static_cast<double>(d));
        std::size_t pick = static_cast<std::size_t>(
            kind_stream.next_unit() * static_cast<double>(options.kinds.size()));
        pick = std::min(pick, options.kinds.size() - 1);
        const DistKind kind = options.kinds[pick];

        DistributionSpec spec = [&] {
            switch (kind) {
                case DistKind::point: return DistributionSpec::point_mass(centers[i]);
                case DistKind::sphere: return DistributionSpec::sphere(centers[i], radius);
                case DistKind::ball: return DistributionSpec::ball(centers[i], radius);
                case DistKind::shell:
                    return DistributionSpec::shell(centers[i], 4.0 * radius / 5.0, radius);
                case DistKind::gaussian:
                    return DistributionSpec::gaussian(centers[i], radius / 2.0);
                case DistKind::tstudent:
                    return DistributionSpec::t_student(centers[i], 3.0, radius / 2.0);
            }
            return DistributionSpec::point_mass(centers[i]);
        }();

        const bool skewed = mode == GenMode::asym ||
                            (mode == GenMode::mixed && skew_coin.next_unit() < 0.5);
        if (skewed && kind != DistKind::point)
            spec = spec.with_skew(skew_dir.child(i).next_unit_direction(d), options.kappa);

        inst.demands.push_back(DemandSpec{std::move(spec), weights[i]});
    }
    inst.validate();
    return inst;
}

// --- instance file (JSON document) -----------------------------------------

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json j;
    j["format"] = "owp-instance";
    j["recipe_version"] = inst.recipe_version;
    j["id"] = inst.id;
    j["d"] = inst.dim;
    j["n"] = inst.size();
    j["lambda_preset"] = inst.lambda_preset;
    j["seed"] = inst.seed;
    j["mode"] = inst.mode;
    j["demands"] = nlohmann::json::array();
    for (const auto& dem : inst.demands) {
        nlohmann::json jd;
        jd["center"] = dem.dist.center();
        jd["weight"] = dem.weight;
        jd["kind"] = std::string(to_string(dem.dist.kind()));
        nlohmann::json params = nlohmann::json::object();
        switch (dem.dist.kind()) {
            case DistKind::point: break;
            case DistKind::sphere:
            case DistKind::ball: params["R"] = dem.dist.outer_radius(); break;
            case DistKind::shell:
                params["r"] = dem.dist.inner_radius();
                params["R"] = dem.dist.outer_radius();
                break;
            case DistKind::gaussian: params["sigma"] = dem.dist.sigma(); break;
            case DistKind::tstudent:
                params["q"] = dem.dist.dof();
                params["sigma"] = dem.dist.sigma();
                break;
        }
        jd["params"] = params;
        if (dem.dist.skew()) {
            jd["skew"] = {{"u", dem.dist.skew()->direction},
                          {"kappa", dem.dist.skew()->kappa}};
        }
        j["demands"].push_back(std::move(jd));
    }
    return j;
}

namespace detail {

inline double field_number(const nlohmann::json& j, const std::string& key,
                           const std::string& where) {
    if (!j.contains(key))
        throw ParseError("instance file: missing field '" + key + "' in " + where);
    if (!j[key].is_number())
        throw ParseError("instance file: field '" + key + "' in " + where +
                         " must be a number");
    return j[key].get<double>();
}

}  // namespace detail

inline Instance from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "owp-instance")
        throw ParseError("instance file: missing or wrong 'format' marker");
    Instance inst;
    inst.recipe_version = j.value("recipe_version", "v1");
    inst.id = j.value("id", "unnamed");
    if (!j.contains("d")) throw ParseError("instance file: missing field 'd'");
    inst.dim = j["d"].get<std::size_t>();
    inst.lambda_preset = j.value("lambda_preset", "median");
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.mode = j.value("mode", "sym");
    if (!j.contains("demands") || !j["demands"].is_array())
        throw ParseError("instance file: missing 'demands' array");

    std::size_t index = 0;
    for (const auto& jd : j["demands"]) {
        const std::string where = "demand " + std::to_string(index);
        if (!jd.contains("center") || !jd["center"].is_array())
            throw ParseError("instance file: missing 'center' in " + where);
        Point center = jd["center"].get<Point>();
        const double weight = detail::field_number(jd, "weight", where);
        if (weight < 0.0)
            throw DomainError("instance file: field 'weight' in " + where +
                              " must be >= 0");
        if (!jd.contains("kind"))
            throw ParseError("instance file: missing 'kind' in " + where);
        const DistKind kind = dist_kind_from_string(jd["kind"].get<std::string>());
        const nlohmann::json params =
            jd.contains("params") ? jd["params"] : nlohmann::json::object();

        DistributionSpec spec = [&]() -> DistributionSpec {
            try {
                switch (kind) {
                    case DistKind::point: return DistributionSpec::point_mass(center);
                    case DistKind::sphere:
                        return DistributionSpec::sphere(
                            center, detail::field_number(params, "R", where));
                    case DistKind::ball:
                        return DistributionSpec::ball(
                            center, detail::field_number(params, "R", where));
                    case DistKind::shell:
                        return DistributionSpec::shell(
                            center, detail::field_number(params, "r", where),
                            detail::field_number(params, "R", where));
                    case DistKind::gaussian:
                        return DistributionSpec::gaussian(
                            center, detail::field_number(params, "sigma", where));
                    case DistKind::tstudent:
                        return DistributionSpec::t_student(
                            center, detail::field_number(params, "q", where),
                            detail::field_number(params, "sigma", where));
                }
            } catch (const DomainError& e) {
                throw DomainError("instance file: " + where + ": " + e.what());
            }
            throw ParseError("instance file: bad kind in " + where);
        }();

        if (jd.contains("skew")) {
            const auto& js = jd["skew"];
            if (!js.contains("u") || !js["u"].is_array())
                throw ParseError("instance file: missing 'skew.u' in " + where);
            try {
                spec = spec.with_skew(js["u"].get<Point>(), js.value("kappa", 1.0));
            } catch (const Error& e) {
                throw DomainError("instance file: " + where + ": " + e.what());
            }
        }
        inst.demands.push_back(DemandSpec{std::move(spec), weight});
        ++index;
    }
    try {
        inst.validate();
    } catch (const Error& e) {
        throw DomainError(std::string("instance file: ") + e.what());
    }
    return inst;
}

inline void save_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("save_instance: cannot open '" + path.string() + "'");
    os << to_json(inst).dump(2) << '\n';
    if (!os) throw ConfigError("save_instance: write failed for '" + path.string() + "'");
}

inline Instance load_instance(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("load_instance: cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("load_instance: " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace owp
