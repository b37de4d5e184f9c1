#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "owp/common.hpp"

namespace owp {

// Rank weights applied to sorted costs. Convex mode (nonnegative,
// non-increasing entries) is the regime where the aggregated objective is
// convex; solvers require it.
class LambdaWeights {
public:
    explicit LambdaWeights(std::vector<double> values) : values_(std::move(values)) {
        require_domain(!values_.empty(), "LambdaWeights: empty weight vector");
        require_domain(all_finite(values_), "LambdaWeights: entries must be finite");
    }

    // median -> (1,...,1); center -> (1,0,...,0);
    // halfsum -> ceil(n/2) ones then zeros; halfcentdian -> (1,0.5,...,0.5).
    static LambdaWeights preset(std::string_view name, std::size_t n) {
        if (n < 1) throw ConfigError("lambda preset: n must be >= 1");
        std::vector<double> v(n, 0.0);
        if (name == "median") {
            std::fill(v.begin(), v.end(), 1.0);
        } else if (name == "center") {
            v[0] = 1.0;
        } else if (name == "halfsum") {
            const std::size_t ones = (n + 1) / 2;
            std::fill(v.begin(), v.begin() + ones, 1.0);
        } else if (name == "halfcentdian") {
            std::fill(v.begin(), v.end(), 0.5);
            v[0] = 1.0;
        } else {
            throw ConfigError("unknown lambda preset '" + std::string(name) + "'");
        }
        return LambdaWeights(std::move(v));
    }

    static const std::vector<std::string>& preset_names() {
        static const std::vector<std::string> names = {"median", "center", "halfsum",
                                                       "halfcentdian"};
        return names;
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool convex_mode() const {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i] < 0.0) return false;
            if (i > 0 && values_[i] > values_[i - 1]) return false;
        }
        return true;
    }

private:
    std::vector<double> values_;
};

using CostVector = std::vector<double>;

// Indices of `costs` sorted non-increasingly; ties broken by index so that
// rank assignment is deterministic.
inline std::vector<std::size_t> sort_order_desc(std::span<const double> costs) {
    std::vector<std::size_t> order(costs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (costs[a] != costs[b]) return costs[a] > costs[b];
        return a < b;
    });
    return order;
}

// Sum of lambda_i * c_(i) with c sorted non-increasingly. Tie order does not
// affect the value.
inline double ordered_weighted_sum(const LambdaWeights& lambda, std::span<const double> costs) {
    require_dimension(lambda.size() == costs.size(),
                      "ordered_weighted_sum: lambda/cost length mismatch");
    require_domain(all_finite(costs), "ordered_weighted_sum: costs must be finite");
    CostVector sorted(costs.begin(), costs.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) total += lambda[i] * sorted[i];
    return total;
}

struct ObjectiveValue {
    double total = 0.0;
    // Unsorted per-group values g_i = (w_i / m_i) * sum_j ||y - x_ij||_p.
    std::vector<double> group_costs;
};

inline std::vector<double> group_cost_vector(std::span<const double> y,
                                             const GroupedSample& samples,
                                             std::span<const double> weights, double p) {
    const std::size_t n = samples.size();
    require_dimension(weights.size() == n, "empirical objective: weights/groups mismatch");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PointSet& pts = samples.groups[i];
        require_domain(pts.size() > 0, "empirical objective: group " + std::to_string(i) +
                                           " is empty");
        require_dimension(pts.dim() == y.size(),
                          "empirical objective: point/query dimension mismatch");
        require_domain(weights[i] >= 0.0, "empirical objective: negative weight");
        double sum = 0.0;
        if (p == 2.0) {
            const double* data = pts.raw().data();
            const std::size_t d = pts.dim();
            for (std::size_t j = 0; j < pts.size(); ++j) {
                double s = 0.0;
                const double* x = data + j * d;
                for (std::size_t k = 0; k < d; ++k) {
                    const double diff = y[k] - x[k];
                    s += diff * diff;
                }
                sum += std::sqrt(s);
            }
        } else {
            for (std::size_t j = 0; j < pts.size(); ++j) sum += lp_distance(y, pts[j], p);
        }
        g[i] = weights[i] / static_cast<double>(pts.size()) * sum;
    }
    return g;
}

// SAA objective: ordered weighted sum of per-group mean distances. The
// unsorted group values are returned as well; the adaptive sampler's
// stability test needs them.
inline ObjectiveValue empirical_objective(std::span<const double> y,
                                          const GroupedSample& samples,
                                          std::span<const double> weights,
                                          const LambdaWeights& lambda, double p = 2.0) {
    require_domain(p >= 1.0, "empirical objective: p must be >= 1");
    ObjectiveValue out;
    out.group_costs = group_cost_vector(y, samples, weights, p);
    out.total = ordered_weighted_sum(lambda, out.group_costs);
    return out;
}

struct ValueAndSubgradient {
    double value = 0.0;
    std::vector<double> group_costs;
    Point subgradient;
};

namespace detail {

// Subgradient of ||v||_p at v (any element of the subdifferential); zero at
// the singular origin.
inline void add_lp_norm_subgradient(Point& acc, std::span<const double> v, double coeff,
                                    double p) {
    if (p == 2.0) {
        const double nrm = euclidean_norm(v);
        if (nrm <= 0.0) return;
        add_scaled(acc, v, coeff / nrm);
        return;
    }
    if (p == 1.0) {
        for (std::size_t k = 0; k < acc.size(); ++k)
            acc[k] += coeff * (v[k] > 0.0 ? 1.0 : (v[k] < 0.0 ? -1.0 : 0.0));
        return;
    }
    double nrm = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) nrm += std::pow(std::abs(v[k]), p);
    nrm = std::pow(nrm, 1.0 / p);
    if (nrm <= 0.0) return;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const double t = std::pow(std::abs(v[k]) / nrm, p - 1.0);
        acc[k] += coeff * (v[k] >= 0.0 ? t : -t);
    }
}

}  // namespace detail

// Objective value together with a valid subgradient of the convex-mode
// objective. Ranks come from the deterministic non-increasing sort of group
// means; each group contributes lambda_rank(i) * (w_i / m_i) * sum_j d||.||.
inline ValueAndSubgradient objective_value_and_subgradient(std::span<const double> y,
                                                           const GroupedSample& samples,
                                                           std::span<const double> weights,
                                                           const LambdaWeights& lambda,
                                                           double p = 2.0) {
    if (!lambda.convex_mode())
        throw UnsupportedError("objective subgradient requires convex-mode lambda");
    require_dimension(lambda.size() == samples.size(),
                      "objective subgradient: lambda/groups mismatch");

    ValueAndSubgradient out;
    out.group_costs = group_cost_vector(y, samples, weights, p);

    const auto order = sort_order_desc(out.group_costs);
    std::vector<double> rank_coeff(samples.size());
    out.value = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        out.value += lambda[r] * out.group_costs[order[r]];
        rank_coeff[order[r]] = lambda[r];
    }

    const std::size_t d = y.size();
    out.subgradient.assign(d, 0.0);
    Point diff(d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PointSet& pts = samples.groups[i];
        const double coeff = rank_coeff[i] * weights[i] / static_cast<double>(pts.size());
        if (coeff == 0.0) continue;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const auto x = pts[j];
            for (std::size_t k = 0; k < d; ++k) diff[k] = y[k] - x[k];
            detail::add_lp_norm_subgradient(out.subgradient, diff, coeff, p);
        }
    }
    return out;
}

// Euclidean-norm subgradient of the ordered objective (the public surface;
// general p is internal to the solver).
inline Point objective_subgradient(std::span<const double> y, const GroupedSample& samples,
                                   std::span<const double> weights,
                                   const LambdaWeights& lambda, double p = 2.0) {
    if (p != 2.0)
        throw UnsupportedError("objective_subgradient: only the Euclidean norm is supported");
    return objective_value_and_subgradient(y, samples, weights, lambda, p).subgradient;
}

}  // namespace owp
