#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "owp/common.hpp"
#include "owp/rng.hpp"
#include "owp/special.hpp"

namespace owp {

enum class DistKind { point, sphere, ball, shell, gaussian, tstudent };

inline std::string_view to_string(DistKind k) {
    switch (k) {
        case DistKind::point: return "point";
        case DistKind::sphere: return "sphere";
        case DistKind::ball: return "ball";
        case DistKind::shell: return "shell";
        case DistKind::gaussian: return "gaussian";
        case DistKind::tstudent: return "tstudent";
    }
    return "?";
}

inline DistKind dist_kind_from_string(std::string_view s) {
    if (s == "point") return DistKind::point;
    if (s == "sphere") return DistKind::sphere;
    if (s == "ball") return DistKind::ball;
    if (s == "shell") return DistKind::shell;
    if (s == "gaussian") return DistKind::gaussian;
    if (s == "tstudent") return DistKind::tstudent;
    throw ParseError("unknown distribution kind '" + std::string(s) + "'");
}

// Direction bias marking an asymmetric variant: the uniform direction U is
// replaced by normalize(U + kappa * direction).
struct SkewSpec {
    Point direction;
    double kappa = 1.0;
};

// Descriptor of one uncertain demand location. Without a skew the law is
// spherically symmetric about `center` and decomposes as center + radius *
// uniform direction.
class DistributionSpec {
public:
    static DistributionSpec point_mass(Point center) {
        return DistributionSpec(DistKind::point, std::move(center));
    }
    static DistributionSpec sphere(Point center, double radius) {
        DistributionSpec s(DistKind::sphere, std::move(center));
        require_domain(radius >= 0.0, "sphere: radius must be >= 0");
        s.outer_ = radius;
        return s;
    }
    static DistributionSpec ball(Point center, double radius) {
        DistributionSpec s(DistKind::ball, std::move(center));
        require_domain(radius >= 0.0, "ball: radius must be >= 0");
        s.outer_ = radius;
        return s;
    }
    static DistributionSpec shell(Point center, double inner, double outer) {
        DistributionSpec s(DistKind::shell, std::move(center));
        require_domain(inner >= 0.0 && inner < outer, "shell: need 0 <= r < R");
        s.inner_ = inner;
        s.outer_ = outer;
        return s;
    }
    static DistributionSpec gaussian(Point center, double sigma) {
        DistributionSpec s(DistKind::gaussian, std::move(center));
        require_domain(sigma > 0.0, "gaussian: sigma must be > 0");
        s.sigma_ = sigma;
        return s;
    }
    // dof > 1 keeps the first moment finite.
    static DistributionSpec t_student(Point center, double dof, double sigma) {
        DistributionSpec s(DistKind::tstudent, std::move(center));
        require_domain(dof > 1.0, "tstudent: dof must be > 1");
        require_domain(sigma > 0.0, "tstudent: sigma must be > 0");
        s.dof_ = dof;
        s.sigma_ = sigma;
        return s;
    }

    DistributionSpec with_skew(Point direction, double kappa) const {
        require_dimension(direction.size() == center_.size(),
                          "skew direction dimension mismatch");
        require_domain(kappa >= 0.0, "skew: kappa must be >= 0");
        const double nrm = euclidean_norm(direction);
        require_domain(nrm > 0.0, "skew: direction must be nonzero");
        if (std::abs(nrm - 1.0) > 1e-12)  // idempotent: reloading keeps bits
            for (double& x : direction) x /= nrm;
        DistributionSpec s = *this;
        s.skew_ = SkewSpec{std::move(direction), kappa};
        return s;
    }

    DistKind kind() const { return kind_; }
    const Point& center() const { return center_; }
    std::size_t dim() const { return center_.size(); }
    double outer_radius() const { return outer_; }
    double inner_radius() const { return inner_; }
    double sigma() const { return sigma_; }
    double dof() const { return dof_; }
    const std::optional<SkewSpec>& skew() const { return skew_; }
    bool symmetric() const { return !skew_.has_value(); }

private:
    DistributionSpec(DistKind kind, Point center) : kind_(kind), center_(std::move(center)) {
        require_dimension(!center_.empty(), "distribution center must have dimension >= 1");
        require_domain(all_finite(center_), "distribution center must be finite");
    }

    DistKind kind_;
    Point center_;
    double outer_ = 0.0;
    double inner_ = 0.0;
    double sigma_ = 0.0;
    double dof_ = 0.0;
    std::optional<SkewSpec> skew_;
};

// First-moment gate: E||X|| finite. All constructible specs pass (t-Student
// with dof <= 1 is rejected at construction); kept explicit for future kinds.
inline bool moment_check(const DistributionSpec& spec) {
    if (spec.kind() == DistKind::tstudent) return spec.dof() > 1.0;
    return true;
}

namespace detail {

// One radius draw from the radial law of `spec`.
inline double sample_radius(const DistributionSpec& spec, RngStream& rng) {
    const double d = static_cast<double>(spec.dim());
    switch (spec.kind()) {
        case DistKind::point: return 0.0;
        case DistKind::sphere: return spec.outer_radius();
        case DistKind::ball:
            return spec.outer_radius() * std::pow(rng.next_unit(), 1.0 / d);
        case DistKind::shell: {
            const double rd = std::pow(spec.inner_radius(), d);
            const double Rd = std::pow(spec.outer_radius(), d);
            return std::pow(rd + rng.next_unit() * (Rd - rd), 1.0 / d);
        }
        case DistKind::gaussian: {
            double s = 0.0;
            for (std::size_t k = 0; k < spec.dim(); ++k) {
                const double z = rng.next_gaussian();
                s += z * z;
            }
            return spec.sigma() * std::sqrt(s);
        }
        case DistKind::tstudent: {
            double s = 0.0;
            for (std::size_t k = 0; k < spec.dim(); ++k) {
                const double z = rng.next_gaussian();
                s += z * z;
            }
            const double w = rng.next_chi_square(spec.dof());
            return spec.sigma() * std::sqrt(s / (w / spec.dof()));
        }
    }
    return 0.0;
}

}  // namespace detail

// m i.i.d. draws: center + radius * direction, with the direction uniform on
// the sphere (or bias-tilted for skewed variants) and the radius drawn from
// the kind's radial law.
inline PointSet sample(const DistributionSpec& spec, std::size_t m, RngStream rng) {
    require_domain(m >= 1, "sample: need m >= 1");
    const std::size_t d = spec.dim();
    PointSet out(d);
    out.reserve(m);
    Point x(d);
    for (std::size_t j = 0; j < m; ++j) {
        const double radius = detail::sample_radius(spec, rng);
        if (radius == 0.0) {
            out.add(spec.center());
            continue;
        }
        Point u = rng.next_unit_direction(d);
        if (spec.skew()) {
            const auto& sk = *spec.skew();
            for (std::size_t k = 0; k < d; ++k) u[k] += sk.kappa * sk.direction[k];
            const double nrm = euclidean_norm(u);
            for (double& c : u) c /= nrm;
        }
        for (std::size_t k = 0; k < d; ++k) x[k] = spec.center()[k] + radius * u[k];
        out.add(x);
    }
    return out;
}

// Closed-form E||X - center|| for the spherically symmetric kinds:
//   sphere:   R
//   ball:     d R / (d + 1)
//   shell:    d/(d+1) * (R^{d+1} - r^{d+1}) / (R^d - r^d)
//   gaussian: sigma * sqrt(2) * Gamma((d+1)/2) / Gamma(d/2)
//   tstudent: sigma * sqrt(q) * Gamma((d+1)/2) Gamma((q-1)/2) / (Gamma(d/2) Gamma(q/2))
inline double expected_center_distance(const DistributionSpec& spec) {
    if (!spec.symmetric())
        throw UnsupportedError("expected_center_distance: no closed form for skewed laws");
    const double d = static_cast<double>(spec.dim());
    switch (spec.kind()) {
        case DistKind::point: return 0.0;
        case DistKind::sphere: return spec.outer_radius();
        case DistKind::ball: return d / (d + 1.0) * spec.outer_radius();
        case DistKind::shell: {
            const double R = spec.outer_radius();
            const double r = spec.inner_radius();
            return d / (d + 1.0) * (std::pow(R, d + 1.0) - std::pow(r, d + 1.0)) /
                   (std::pow(R, d) - std::pow(r, d));
        }
        case DistKind::gaussian:
            return spec.sigma() * std::sqrt(2.0) * gamma_ratio(0.5 * (d + 1.0), 0.5 * d);
        case DistKind::tstudent: {
            const double q = spec.dof();
            require_domain(q > 1.0, "expected_center_distance: tstudent needs dof > 1");
            return spec.sigma() * std::sqrt(q) * gamma_ratio(0.5 * (d + 1.0), 0.5 * d) *
                   gamma_ratio(0.5 * (q - 1.0), 0.5 * q);
        }
    }
    return 0.0;
}

// prob-quantile of ||X - center||. Defined for skewed variants as well: the
// direction bias leaves the radial law untouched.
inline double radial_quantile(const DistributionSpec& spec, double prob) {
    require_domain(prob >= 0.0 && prob < 1.0, "radial_quantile: need prob in [0, 1)");
    const double d = static_cast<double>(spec.dim());
    switch (spec.kind()) {
        case DistKind::point: return 0.0;
        case DistKind::sphere: return spec.outer_radius();
        case DistKind::ball: return spec.outer_radius() * std::pow(prob, 1.0 / d);
        case DistKind::shell: {
            const double rd = std::pow(spec.inner_radius(), d);
            const double Rd = std::pow(spec.outer_radius(), d);
            return std::pow(rd + prob * (Rd - rd), 1.0 / d);
        }
        case DistKind::gaussian: return spec.sigma() * chi_quantile(d, prob);
        case DistKind::tstudent:
            // ||X - c||^2 / (d sigma^2) follows F(d, dof).
            return spec.sigma() * std::sqrt(d * f_quantile(d, spec.dof(), prob));
    }
    return 0.0;
}

// Per-demand scale used by the sampler's initial-size rule and the discrete
// approach's sizing: support radius where one exists, a dispersion multiple
// otherwise.
inline double scale_proxy(const DistributionSpec& spec) {
    switch (spec.kind()) {
        case DistKind::point: return 0.0;
        case DistKind::sphere:
        case DistKind::ball:
        case DistKind::shell: return spec.outer_radius();
        case DistKind::gaussian: return 2.0 * spec.sigma();
        case DistKind::tstudent: {
            const double q = spec.dof();
            if (q > 2.0) return 2.0 * spec.sigma() * std::sqrt(q / (q - 2.0));
            return 2.0 * spec.sigma();
        }
    }
    return 0.0;
}

}  // namespace owp
