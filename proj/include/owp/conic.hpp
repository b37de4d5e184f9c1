#pragma once

#include <cstddef>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "owp/common.hpp"
#include "owp/ordered.hpp"

namespace owp {

// Finite-sample ordered Weber problem written as a cone program:
//
//   minimize   sum_i u_i + sum_j v_j
//   subject to u_i + v_j >= lambda_j * (w_i / m_i) * sum_l z_il   (n^2 rows)
//              z_il >= ||y - x_il||_p                             (sum m_i rows)
//              u, v, z >= 0,  y in R^d.
struct ConicForm {
    std::size_t dim = 0;
    std::size_t n_groups = 0;
    double p = 2.0;
    std::vector<std::size_t> group_sizes;
    std::vector<double> weights;
    std::vector<double> lambda;

    struct LinRow {
        std::size_t i, j;
        double coeff;  // lambda_j * w_i / m_i
    };
    struct ConeRow {
        std::size_t i, l;
    };
    std::vector<LinRow> lin;
    std::vector<ConeRow> cone;

    std::size_t total_cone_rows() const { return cone.size(); }
    std::size_t total_lin_rows() const { return lin.size(); }
};

inline ConicForm export_conic(const GroupedSample& samples, std::span<const double> weights,
                              const LambdaWeights& lambda, double p = 2.0) {
    if (p < 1.0) throw DomainError("export_conic: p must be >= 1");
    if (!lambda.convex_mode())
        throw UnsupportedError("export_conic: lambda must be in convex mode");
    samples.validate();
    require_dimension(lambda.size() == samples.size() && weights.size() == samples.size(),
                      "export_conic: lambda/weights/groups mismatch");

    ConicForm form;
    form.dim = samples.dim();
    form.n_groups = samples.size();
    form.p = p;
    form.weights.assign(weights.begin(), weights.end());
    form.lambda = lambda.values();
    for (const auto& g : samples.groups) form.group_sizes.push_back(g.size());

    for (std::size_t i = 0; i < form.n_groups; ++i)
        for (std::size_t j = 0; j < form.n_groups; ++j)
            form.lin.push_back({i, j, form.lambda[j] * form.weights[i] /
                                          static_cast<double>(form.group_sizes[i])});
    for (std::size_t i = 0; i < form.n_groups; ++i)
        for (std::size_t l = 0; l < form.group_sizes[i]; ++l) form.cone.push_back({i, l});
    return form;
}

// Text rendering, one constraint per line:
//   conic v1 <d> <n> <p>
//   point <i> <l> <x_1> ... <x_d>
//   lin <i> <j> <coeff>
//   cone <i> <l>
// Point rows carry the sample data so the file stands alone.
inline void render_conic_text(const ConicForm& form, const GroupedSample& samples,
                              std::ostream& os) {
    char buf[64];
    os << "conic v1 " << form.dim << ' ' << form.n_groups << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", form.p);
    os << buf << '\n';
    for (std::size_t i = 0; i < form.n_groups; ++i) {
        const PointSet& g = samples.groups[i];
        for (std::size_t l = 0; l < g.size(); ++l) {
            os << "point " << i << ' ' << l;
            for (double c : g[l]) {
                std::snprintf(buf, sizeof buf, "%.17g", c);
                os << ' ' << buf;
            }
            os << '\n';
        }
    }
    for (const auto& row : form.lin) {
        std::snprintf(buf, sizeof buf, "%.17g", row.coeff);
        os << "lin " << row.i << ' ' << row.j << ' ' << buf << '\n';
    }
    for (const auto& row : form.cone) os << "cone " << row.i << ' ' << row.l << '\n';
}

inline std::string render_conic_text(const ConicForm& form, const GroupedSample& samples) {
    std::ostringstream os;
    render_conic_text(form, samples, os);
    return os.str();
}

// Dual-feasible (u, v) attaining sum(u) + sum(v) = O_lambda(group_costs) for
// convex-mode lambda. With groups relabeled so t_1 >= ... >= t_n:
//   v_pos = max(0, max_{q > pos} [v_q + (lambda_pos - lambda_q) t_q])
//   u_(pos) = lambda_pos t_pos - v_pos
// which satisfies u_i + v_j >= lambda_j t_i for every pair.
inline std::pair<std::vector<double>, std::vector<double>> optimal_dual_uv(
    const LambdaWeights& lambda, std::span<const double> group_costs) {
    const std::size_t n = group_costs.size();
    require_dimension(lambda.size() == n, "optimal_dual_uv: lambda/cost mismatch");
    const auto order = sort_order_desc(group_costs);

    std::vector<double> v(n, 0.0);
    for (std::size_t pos = n; pos-- > 0;) {
        double best = 0.0;
        for (std::size_t q = pos + 1; q < n; ++q) {
            const double cand = v[q] + (lambda[pos] - lambda[q]) * group_costs[order[q]];
            best = std::max(best, cand);
        }
        v[pos] = best;
    }
    std::vector<double> u(n, 0.0);
    for (std::size_t pos = 0; pos < n; ++pos)
        u[order[pos]] = lambda[pos] * group_costs[order[pos]] - v[pos];
    return {std::move(u), std::move(v)};
}

// Objective of the cone program at y: z pinned to the distances, (u, v) set
// by the optimal assignment rule. Must reproduce the ordered objective.
inline double conic_objective_value(const ConicForm& form, const GroupedSample& samples,
                                    std::span<const double> y) {
    std::vector<double> t(form.n_groups);
    for (std::size_t i = 0; i < form.n_groups; ++i) {
        const PointSet& g = samples.groups[i];
        double zsum = 0.0;
        for (std::size_t l = 0; l < g.size(); ++l) zsum += lp_distance(y, g[l], form.p);
        t[i] = form.weights[i] / static_cast<double>(form.group_sizes[i]) * zsum;
    }
    const auto [u, v] = optimal_dual_uv(LambdaWeights(form.lambda), t);
    double total = 0.0;
    for (double x : u) total += x;
    for (double x : v) total += x;
    return total;
}

}  // namespace owp
