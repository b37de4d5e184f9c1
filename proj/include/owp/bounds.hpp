#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "owp/common.hpp"
#include "owp/distributions.hpp"
#include "owp/instance.hpp"
#include "owp/ordered.hpp"
#include "owp/saa.hpp"

namespace owp {

// Radius bound on how far a minimizer can stray from the convex hull of
// compact sets carrying mass 1 - eps_i each: eps_bar * diameter / (1 - 2 eps_bar).
inline double eps_hull_radius(double diameter, double eps_bar) {
    require_domain(diameter >= 0.0, "eps_hull_radius: diameter must be >= 0");
    require_domain(eps_bar >= 0.0, "eps_hull_radius: eps_bar must be >= 0");
    if (eps_bar >= 0.5) throw DomainError("eps_hull_radius: bound vacuous for eps_bar >= 1/2");
    return eps_bar * diameter / (1.0 - 2.0 * eps_bar);
}

struct HullWitness {
    double distance = 0.0;
    Point projection;                   // nearest point of the hull
    std::vector<double> coefficients;   // convex weights over the input points
    std::vector<std::size_t> support;   // indices with nonzero weight
};

namespace detail {

// Solves  min ||Q a||  s.t.  sum(a) = 1  over the affine hull of the columns
// indexed by `support` (KKT system, Gaussian elimination, partial pivoting).
inline bool affine_min_norm(const PointSet& pts, std::span<const double> query,
                            const std::vector<std::size_t>& support,
                            std::vector<double>& alpha) {
    const std::size_t s = support.size();
    const std::size_t d = pts.dim();
    const std::size_t n = s + 1;
    std::vector<double> A(n * n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t a = 0; a < s; ++a) {
        const auto pa = pts[support[a]];
        for (std::size_t b = a; b < s; ++b) {
            const auto pb = pts[support[b]];
            double g = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                g += (pa[k] - query[k]) * (pb[k] - query[k]);
            A[a * n + b] = g;
            A[b * n + a] = g;
        }
        A[a * n + s] = 1.0;
        A[s * n + a] = 1.0;
    }
    rhs[s] = 1.0;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[perm[r] * n + col]) > std::abs(A[perm[piv] * n + col])) piv = r;
        std::swap(perm[col], perm[piv]);
        const double diag = A[perm[col] * n + col];
        if (std::abs(diag) < 1e-14 * (1.0 + std::abs(A[perm[0] * n]))) return false;
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[perm[r] * n + col] / diag;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[perm[r] * n + c] -= f * A[perm[col] * n + c];
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }
    std::vector<double> sol(n, 0.0);
    for (std::size_t col = n; col-- > 0;) {
        double v = rhs[perm[col]];
        for (std::size_t c = col + 1; c < n; ++c) v -= A[perm[col] * n + c] * sol[c];
        sol[col] = v / A[perm[col] * n + col];
    }
    alpha.assign(sol.begin(), sol.begin() + s);
    return true;
}

}  // namespace detail

// Euclidean distance from y to conv(points) by Wolfe's nearest-point scheme
// over convex combinations: grow a corral with the most opposed vertex, take
// the affine min-norm point over it, and shrink along the segment when a
// coefficient leaves the simplex. Stops on the certified optimality gap
// max_i <x, x - q_i> <= 1e-10 * scale.
inline HullWitness hull_distance(std::span<const double> y, const PointSet& pts) {
    require_domain(pts.size() > 0, "hull_distance: empty point list");
    require_dimension(pts.dim() == y.size(), "hull_distance: dimension mismatch");
    const std::size_t n = pts.size();
    const std::size_t d = pts.dim();

    // Work translated: q_i = p_i - y; find the min-norm point of conv(q).
    auto sq_norm_q = [&](std::size_t i) {
        double s = 0.0;
        const auto p = pts[i];
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = p[k] - y[k];
            s += diff * diff;
        }
        return s;
    };

    double scale = 0.0;
    std::size_t start = 0;
    double start_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = sq_norm_q(i);
        scale = std::max(scale, v);
        if (v < start_val) {
            start_val = v;
            start = i;
        }
    }
    const double gap_tol = 1e-10 * (1.0 + scale);

    std::vector<std::size_t> support{start};
    std::vector<double> w{1.0};
    Point x(d);
    auto recompute_x = [&] {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t a = 0; a < support.size(); ++a) {
            const auto p = pts[support[a]];
            for (std::size_t k = 0; k < d; ++k) x[k] += w[a] * (p[k] - y[k]);
        }
    };
    recompute_x();

    std::vector<double> alpha;
    const std::size_t max_major = 16 * (n + d + 4);
    for (std::size_t major = 0; major < max_major; ++major) {
        // Most opposed vertex.
        double best_dot = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = pts[i];
            double dp = 0.0;
            for (std::size_t k = 0; k < d; ++k) dp += x[k] * (p[k] - y[k]);
            if (dp < best_dot) {
                best_dot = dp;
                j = i;
            }
        }
        const double xx = squared_norm(x);
        if (best_dot >= xx - gap_tol) break;                       // optimal
        if (std::find(support.begin(), support.end(), j) != support.end()) break;

        support.push_back(j);
        w.push_back(0.0);

        // Minor cycle: pull the corral back into the simplex.
        for (std::size_t minor = 0; minor < 4 * (d + 4); ++minor) {
            if (!detail::affine_min_norm(pts, y, support, alpha)) {
                // Affinely dependent corral: drop the smallest weight.
                std::size_t drop = 0;
                for (std::size_t a = 1; a < support.size(); ++a)
                    if (w[a] < w[drop]) drop = a;
                support.erase(support.begin() + drop);
                w.erase(w.begin() + drop);
                double tot = 0.0;
                for (double v : w) tot += v;
                if (tot <= 0.0) {
                    w.assign(w.size(), 1.0 / static_cast<double>(w.size()));
                } else {
                    for (double& v : w) v /= tot;
                }
                continue;
            }
            const double eps_w = 1e-12;
            bool interior = true;
            for (double a : alpha)
                if (a <= eps_w) interior = false;
            if (interior) {
                w = alpha;
                break;
            }
            // Step from w toward alpha until the first coefficient hits zero.
            double theta = 1.0;
            for (std::size_t a = 0; a < support.size(); ++a) {
                if (alpha[a] <= eps_w && w[a] > alpha[a]) {
                    theta = std::min(theta, w[a] / (w[a] - alpha[a]));
                }
            }
            for (std::size_t a = 0; a < support.size(); ++a)
                w[a] = (1.0 - theta) * w[a] + theta * alpha[a];
            for (std::size_t a = support.size(); a-- > 0;) {
                if (w[a] <= eps_w) {
                    support.erase(support.begin() + a);
                    w.erase(w.begin() + a);
                }
            }
            if (support.size() <= 1) {
                w.assign(1, 1.0);
                break;
            }
        }
        recompute_x();
    }

    HullWitness out;
    out.distance = euclidean_norm(x);
    out.projection.assign(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) out.projection[k] = y[k] + x[k];
    out.coefficients.assign(n, 0.0);
    double tot = 0.0;
    for (std::size_t a = 0; a < support.size(); ++a) tot += w[a];
    for (std::size_t a = 0; a < support.size(); ++a) out.coefficients[support[a]] = w[a] / tot;
    out.support = support;
    std::sort(out.support.begin(), out.support.end());
    return out;
}

inline HullWitness hull_distance(std::span<const double> y, const GroupedSample& samples) {
    PointSet all(samples.dim());
    for (const auto& g : samples.groups)
        for (std::size_t j = 0; j < g.size(); ++j) all.add(g[j]);
    return hull_distance(y, all);
}

// Deterministic-approximation bound: twice the ordered weighted sum of the
// weighted expected center distances. Requires spherically symmetric demands.
inline double nu_lambda(const Instance& instance) {
    const LambdaWeights lambda = instance.lambda();
    if (!lambda.convex_mode()) throw UnsupportedError("nu_lambda: lambda must be convex mode");
    std::vector<double> scaled(instance.size());
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const auto& dem = instance.demands[i];
        if (!dem.dist.symmetric())
            throw UnsupportedError("nu_lambda: demand " + std::to_string(i) + " is skewed");
        scaled[i] = dem.weight * expected_center_distance(dem.dist);
    }
    return 2.0 * ordered_weighted_sum(lambda, scaled);
}

struct GapReport {
    double rho_saa = 0.0;
    double rho_centers = 0.0;
    double gap = 0.0;
    double nu = 0.0;
    double halfwidth = 0.0;
    double slack = 0.0;
    bool pass = false;
};

// Empirical check of the center-surrogate bound: both candidate points are
// evaluated on the same validation sample and the bootstrap halfwidth covers
// the sampling noise of the comparison.
inline GapReport verify_gap_bound(const Instance& instance, std::span<const double> y_saa,
                                  std::span<const double> y_centers,
                                  const GroupedSample& validation, std::size_t replicates,
                                  double alpha, RngStream rng) {
    const LambdaWeights lambda = instance.lambda();
    const std::vector<double> weights = instance.weights();
    GapReport rep;
    rep.rho_saa = empirical_objective(y_saa, validation, weights, lambda).total;
    rep.rho_centers = empirical_objective(y_centers, validation, weights, lambda).total;
    rep.gap = std::abs(rep.rho_saa - rep.rho_centers);
    rep.nu = nu_lambda(instance);
    rep.halfwidth =
        bootstrap_validate(y_saa, validation, weights, lambda, replicates, alpha, rng)
            .halfwidth;
    rep.slack = 2.0 * rep.halfwidth;
    rep.pass = rep.gap <= rep.nu + rep.slack;
    return rep;
}

struct BoundReport {
    double eps_bar = 0.0;
    double hull_diameter = 0.0;
    double r_eps = 0.0;
    double nu = std::numeric_limits<double>::quiet_NaN();  // NaN when skewed demands
    std::vector<double> quantile_radii;
    std::vector<double> expected_distances;  // NaN entries for skewed demands
};

// Analytical report for an instance: per-demand (1 - eps) radial-quantile
// balls stand in for the compact sets; the diameter of the hull of a union of
// balls has the closed form max_{i,j} (||c_i - c_j|| + q_i + q_j).
inline BoundReport bound_report(const Instance& instance, double eps = 0.05) {
    require_domain(eps >= 0.0 && eps < 0.5, "bound_report: need eps in [0, 1/2)");
    BoundReport rep;
    rep.eps_bar = eps;
    const std::size_t n = instance.size();
    rep.quantile_radii.resize(n);
    rep.expected_distances.assign(n, std::numeric_limits<double>::quiet_NaN());
    bool all_symmetric = true;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& dem = instance.demands[i];
        rep.quantile_radii[i] = radial_quantile(dem.dist, 1.0 - eps);
        if (dem.dist.symmetric())
            rep.expected_distances[i] = expected_center_distance(dem.dist);
        else
            all_symmetric = false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double dist = euclidean_distance(instance.demands[i].dist.center(),
                                                   instance.demands[j].dist.center());
            rep.hull_diameter = std::max(
                rep.hull_diameter, dist + rep.quantile_radii[i] + rep.quantile_radii[j]);
        }
    }
    rep.r_eps = eps_hull_radius(rep.hull_diameter, eps);
    if (all_symmetric) rep.nu = nu_lambda(instance);
    return rep;
}

}  // namespace owp
