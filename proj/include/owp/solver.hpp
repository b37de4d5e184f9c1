#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "owp/common.hpp"
#include "owp/ordered.hpp"

namespace owp {

enum class StepRule { polyak_with_estimate, diminishing };

struct SolveOptions {
    double tol = 1e-7;        // relative objective tolerance
    std::size_t max_iters = 5000;
    StepRule step_rule = StepRule::polyak_with_estimate;
    double norm_p = 2.0;
    Point warm_start;         // empty -> weighted mean of all sample points

    void validate() const {
        require_domain(tol > 0.0, "SolveOptions: tol must be > 0");
        require_domain(max_iters >= 1, "SolveOptions: max_iters must be >= 1");
        require_domain(norm_p >= 1.0, "SolveOptions: norm p must be >= 1");
    }
};

struct SolveOutcome {
    Point y;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

struct SolveBox {
    Point lo, hi;
    void clamp(Point& y) const {
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::clamp(y[k], lo[k], hi[k]);
    }
};

// Axis-aligned bounding box of all sample points, inflated on each side by
// the box diagonal (an upper bound on the hull diameter). Iterates are
// projected here; any minimizer lies in the sample hull, so the projection
// never cuts off the optimum.
inline SolveBox projection_box(const GroupedSample& samples, std::size_t d) {
    SolveBox box;
    box.lo.assign(d, std::numeric_limits<double>::infinity());
    box.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& g : samples.groups) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            const auto x = g[j];
            for (std::size_t k = 0; k < d; ++k) {
                box.lo[k] = std::min(box.lo[k], x[k]);
                box.hi[k] = std::max(box.hi[k], x[k]);
            }
        }
    }
    double diag = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double w = box.hi[k] - box.lo[k];
        diag += w * w;
    }
    diag = std::sqrt(diag);
    for (std::size_t k = 0; k < d; ++k) {
        box.lo[k] -= diag;
        box.hi[k] += diag;
    }
    return box;
}

inline Point weighted_sample_mean(const GroupedSample& samples, std::span<const double> weights,
                                  std::size_t d) {
    Point mean(d, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PointSet& g = samples.groups[i];
        const double w = weights[i] / static_cast<double>(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            add_scaled(mean, g[j], w);
            total += w;
        }
    }
    if (total > 0.0)
        for (double& c : mean) c /= total;
    return mean;
}

// One fixed-point step of the rank-weighted Fermat-Weber iteration at y:
// ranks frozen at y's sort order, singular points skipped. Returns false when
// the update is undefined (all mass singular).
inline bool weiszfeld_step(const GroupedSample& samples, std::span<const double> weights,
                           const LambdaWeights& lambda, std::span<const double> y,
                           Point& next) {
    const std::size_t d = y.size();
    std::vector<double> g(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PointSet& pts = samples.groups[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) sum += euclidean_distance(y, pts[j]);
        g[i] = weights[i] / static_cast<double>(pts.size()) * sum;
    }
    const auto order = sort_order_desc(g);
    std::vector<double> coeff(samples.size());
    for (std::size_t r = 0; r < order.size(); ++r) coeff[order[r]] = lambda[r];

    next.assign(d, 0.0);
    double denom = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PointSet& pts = samples.groups[i];
        const double c = coeff[i] * weights[i] / static_cast<double>(pts.size());
        if (c == 0.0) continue;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double dist = euclidean_distance(y, pts[j]);
            if (dist <= 1e-300) continue;
            const double wij = c / dist;
            add_scaled(next, pts[j], wij);
            denom += wij;
        }
    }
    if (denom <= 0.0) return false;
    for (double& c : next) c /= denom;
    return true;
}

}  // namespace detail

// Minimizes the ordered objective over finite samples with a projected
// subgradient method. Polyak steps use a lower-bound estimate (start at 0,
// refined as best-value minus a gap that is halved on stall); the reported
// point is the best of all iterates and periodically evaluated running
// averages. Deterministic: no randomness anywhere.
inline SolveOutcome solve(const GroupedSample& samples, std::span<const double> weights,
                          const LambdaWeights& lambda, const SolveOptions& opts = {}) {
    opts.validate();
    samples.validate();
    if (!lambda.convex_mode())
        throw UnsupportedError("solve: lambda must be in convex mode");
    require_dimension(lambda.size() == samples.size(), "solve: lambda/groups mismatch");
    const std::size_t d = samples.dim();
    for (const auto& g : samples.groups)
        require_domain(all_finite(g.raw()), "solve: non-finite sample data");

    const auto box = detail::projection_box(samples, d);

    Point y = opts.warm_start.empty() ? detail::weighted_sample_mean(samples, weights, d)
                                      : opts.warm_start;
    require_dimension(y.size() == d, "solve: warm start dimension mismatch");
    box.clamp(y);

    auto eval = [&](std::span<const double> at) {
        return objective_value_and_subgradient(at, samples, weights, lambda, opts.norm_p);
    };

    SolveOutcome out;
    out.y = y;
    out.value = eval(y).value;

    Point avg = y;           // running average of iterates
    Point trial(d);
    double gap = std::max(0.5 * out.value, 1e-12);  // Polyak target gap
    double stall_anchor = out.value;
    std::size_t stall_count = 0;
    std::vector<double> best_history;
    best_history.reserve(opts.max_iters + 1);
    best_history.push_back(out.value);

    std::size_t k = 0;
    for (; k < opts.max_iters; ++k) {
        const auto cur = eval(y);
        if (cur.value < out.value) {
            out.value = cur.value;
            out.y = y;
        }

        const double grad_sq = squared_norm(cur.subgradient);
        if (grad_sq <= 1e-30) {  // exact minimizer (all singular terms cancel)
            out.converged = true;
            ++k;
            break;
        }

        double step;
        if (opts.step_rule == StepRule::polyak_with_estimate) {
            const double target = std::max(0.0, out.value - gap);
            step = (cur.value - target) / grad_sq;
        } else {
            step = (1.0 + out.value) / (std::sqrt(static_cast<double>(k) + 1.0) *
                                        std::sqrt(grad_sq));
        }

        for (std::size_t j = 0; j < d; ++j) y[j] -= step * cur.subgradient[j];
        box.clamp(y);

        // Running average; evaluate it occasionally as a candidate.
        const double wavg = 1.0 / static_cast<double>(k + 2);
        for (std::size_t j = 0; j < d; ++j) avg[j] += wavg * (y[j] - avg[j]);
        if ((k + 1) % 10 == 0) {
            trial = avg;
            box.clamp(trial);
            const double favg = empirical_objective(trial, samples, weights, lambda,
                                                    opts.norm_p)
                                    .total;
            if (favg < out.value) {
                out.value = favg;
                out.y = trial;
            }
        }

        // Halve the Polyak gap when the best value stops improving.
        if (stall_anchor - out.value < 0.1 * gap) {
            if (++stall_count >= 5) {
                gap *= 0.5;
                stall_count = 0;
                stall_anchor = out.value;
            }
        } else {
            stall_count = 0;
            stall_anchor = out.value;
        }

        best_history.push_back(out.value);
        if (best_history.size() > 50) {
            const double before = best_history[best_history.size() - 51];
            if (before - out.value <= opts.tol * std::max(1.0, out.value)) {
                out.converged = true;
                ++k;
                break;
            }
        }
    }
    out.iterations = k;

    // Polish with damped fixed-point steps under a strict descent guard; near
    // smooth minima this sharpens the subgradient answer by several digits.
    if (opts.norm_p == 2.0) {
        Point next(d), cand(d);
        y = out.y;
        double fy = out.value;
        std::size_t flat = 0;
        const std::size_t polish_budget = std::max<std::size_t>(60, opts.max_iters / 10);
        for (std::size_t t = 0; t < polish_budget && flat < 3; ++t) {
            if (!detail::weiszfeld_step(samples, weights, lambda, y, next)) break;
            double theta = 1.0;
            bool accepted = false;
            for (int back = 0; back < 12; ++back) {
                for (std::size_t j = 0; j < d; ++j)
                    cand[j] = y[j] + theta * (next[j] - y[j]);
                box.clamp(cand);
                const double fc =
                    empirical_objective(cand, samples, weights, lambda, opts.norm_p).total;
                if (fc < fy) {
                    const bool small = fy - fc <= 0.1 * opts.tol * std::max(1.0, fc);
                    y = cand;
                    fy = fc;
                    accepted = true;
                    flat = small ? flat + 1 : 0;
                    break;
                }
                theta *= 0.5;
            }
            if (!accepted) break;
        }
        if (fy < out.value) {
            out.value = fy;
            out.y = y;
        }
    }

    // Re-evaluate at the reported point so value matches it exactly.
    out.value = empirical_objective(out.y, samples, weights, lambda, opts.norm_p).total;
    return out;
}

struct Box {
    Point lo, hi;
};

struct OracleResult {
    Point y;
    double value = 0.0;
};

// Exhaustive grid minimizer for testing: scans `resolution` points per axis
// over `box`, then re-grids once around the best point at 10x finer spacing.
// The refinement grid is centered on the incumbent so an exact grid-node
// minimizer is returned untouched. Guarded to d <= 3, resolution^d <= 1e7.
inline OracleResult brute_force_oracle(const GroupedSample& samples,
                                       std::span<const double> weights,
                                       const LambdaWeights& lambda, const Box& box,
                                       std::size_t resolution, double p = 2.0) {
    const std::size_t d = samples.dim();
    if (d > 3) throw ResourceError("brute_force_oracle: d must be <= 3");
    require_domain(resolution >= 2, "brute_force_oracle: resolution must be >= 2");
    double cells = 1.0;
    for (std::size_t k = 0; k < d; ++k) cells *= static_cast<double>(resolution);
    if (cells > 1e7) throw ResourceError("brute_force_oracle: resolution^d exceeds 1e7");
    require_dimension(box.lo.size() == d && box.hi.size() == d,
                      "brute_force_oracle: box dimension mismatch");

    auto scan = [&](const Point& lo, const Point& hi, std::size_t res) {
        OracleResult best;
        best.value = std::numeric_limits<double>::infinity();
        Point y(d);
        std::size_t total = 1;
        for (std::size_t k = 0; k < d; ++k) total *= res;
        for (std::size_t t = 0; t < total; ++t) {
            std::size_t rem = t;
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t idx = rem % res;
                rem /= res;
                y[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx) /
                                   static_cast<double>(res - 1);
            }
            const double f = empirical_objective(y, samples, weights, lambda, p).total;
            if (f < best.value) {
                best.value = f;
                best.y = y;
            }
        }
        return best;
    };

    OracleResult coarse = scan(box.lo, box.hi, resolution);

    // Refine once at 10x finer pitch: a 21-node grid per axis spanning +/- one
    // coarse cell, centered on the incumbent so a grid-node minimizer stays
    // exactly where it was found.
    Point lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double cell = (box.hi[k] - box.lo[k]) / static_cast<double>(resolution - 1);
        lo[k] = coarse.y[k] - cell;
        hi[k] = coarse.y[k] + cell;
    }
    OracleResult fine = scan(lo, hi, 21);
    return fine.value < coarse.value ? fine : coarse;
}

}  // namespace owp
