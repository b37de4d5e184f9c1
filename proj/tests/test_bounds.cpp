#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "owp/bounds.hpp"
#include "owp/rng.hpp"
#include "oracles.hpp"

using namespace owp;

namespace {

PointSet to_set(const std::vector<Point>& pts) {
    PointSet s(pts.front().size());
    for (const auto& p : pts) s.add(p);
    return s;
}

Instance symmetric_instance(std::size_t n, std::uint64_t seed, const std::string& preset) {
    Instance inst = generate(n, 2, seed, GenMode::sym);
    inst.lambda_preset = preset;
    return inst;
}

}  // namespace

TEST_CASE("eps hull radius formula") {
    CHECK(eps_hull_radius(7.0, 0.0) == doctest::Approx(0.0));
    CHECK(eps_hull_radius(4.0, 0.25) == doctest::Approx(2.0));
    CHECK(eps_hull_radius(1.0, 0.49) == doctest::Approx(24.5));
    CHECK_THROWS_AS(eps_hull_radius(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(eps_hull_radius(1.0, 0.7), DomainError);
    CHECK_THROWS_AS(eps_hull_radius(-1.0, 0.1), DomainError);
}

TEST_CASE("eps hull radius monotonicity and divergence") {
    double prev = 0.0;
    for (double eps : {0.0, 0.1, 0.2, 0.3, 0.4, 0.45}) {
        const double r = eps_hull_radius(2.0, eps);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(eps_hull_radius(3.0, 0.3) >= eps_hull_radius(2.0, 0.3));
    CHECK(eps_hull_radius(1.0, 0.5 - 1e-9) > 1e6);
}

TEST_CASE("hull distance: inside points have distance zero") {
    const auto pts = to_set({{0, 0}, {4, 0}, {0, 4}});
    const auto w = hull_distance(Point{1.0, 1.0}, pts);
    CHECK(w.distance <= 1e-8);
    // Vertices are inside too.
    CHECK(hull_distance(Point{0, 0}, pts).distance <= 1e-10);
    CHECK(hull_distance(Point{2, 2}, pts).distance <= 1e-8);  // edge midpoint
}

TEST_CASE("hull distance: segment case") {
    const auto pts = to_set({{0, 0}, {1, 0}});
    const auto w = hull_distance(Point{2.0, 0.0}, pts);
    CHECK(w.distance == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w.projection[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w.projection[1] == doctest::Approx(0.0));
}

TEST_CASE("hull witness is a convex combination reproducing the projection") {
    RngStream rng(61);
    for (int t = 0; t < 40; ++t) {
        std::vector<Point> raw;
        const std::size_t n = 3 + rng.next_u64() % 8;
        for (std::size_t i = 0; i < n; ++i)
            raw.push_back(testing_oracles::random_point(rng, 3, -1.0, 1.0));
        const Point y = testing_oracles::random_point(rng, 3, -2.5, 2.5);
        const auto pts = to_set(raw);
        const auto w = hull_distance(y, pts);

        double total = 0.0;
        Point combo(3, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(w.coefficients[i] >= -1e-12);
            total += w.coefficients[i];
            add_scaled(combo, pts[i], w.coefficients[i]);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(euclidean_distance(combo, w.projection) <= 1e-8);
        CHECK(w.distance == doctest::Approx(euclidean_distance(y, w.projection))
                                .epsilon(1e-10));
    }
}

TEST_CASE("hull distance matches the 2-D grid projection oracle") {
    RngStream rng(67);
    for (int t = 0; t < 25; ++t) {
        std::vector<Point> raw;
        const std::size_t n = 3 + rng.next_u64() % 6;
        for (std::size_t i = 0; i < n; ++i)
            raw.push_back(testing_oracles::random_point(rng, 2, 0.0, 1.0));
        const Point y = testing_oracles::random_point(rng, 2, -0.5, 1.5);
        const double got = hull_distance(y, to_set(raw)).distance;
        const double ref = testing_oracles::grid_hull_distance_2d(y, raw);
        CHECK(std::abs(got - ref) <= 1e-4);
    }
}

TEST_CASE("hull distance is zero iff the point is in the hull") {
    // Outside by construction: square [0,1]^2, query at distance 0.5.
    const auto square = to_set({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(hull_distance(Point{1.5, 0.5}, square).distance ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(hull_distance(Point{-0.3, -0.4}, square).distance ==
          doctest::Approx(0.5).epsilon(1e-9));
    // Inside by construction: convex combination of vertices.
    RngStream rng(71);
    for (int t = 0; t < 20; ++t) {
        double a = rng.next_unit(), b = rng.next_unit() * (1.0 - a);
        double c = rng.next_unit() * (1.0 - a - b);
        const double dcoef = 1.0 - a - b - c;
        Point y{a * 0 + b * 1 + c * 1 + dcoef * 0, a * 0 + b * 0 + c * 1 + dcoef * 1};
        CHECK(hull_distance(y, square).distance <= 1e-8);
    }
}

TEST_CASE("nu_lambda on point masses is zero") {
    Instance inst;
    inst.dim = 2;
    inst.lambda_preset = "median";
    for (int i = 0; i < 3; ++i)
        inst.demands.push_back(
            {DistributionSpec::point_mass(Point{double(i), 0.0}), 1.0 + i});
    CHECK(nu_lambda(inst) == doctest::Approx(0.0));
}

TEST_CASE("nu_lambda closed forms for homogeneous families") {
    RngStream rng(73);
    const std::size_t n = 5;
    std::vector<double> radii(n), weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        radii[i] = 0.5 + rng.next_unit();
        weights[i] = 0.5 + 2.0 * rng.next_unit();
    }
    auto make = [&](auto factory) {
        Instance inst;
        inst.dim = 2;
        inst.lambda_preset = "halfcentdian";
        for (std::size_t i = 0; i < n; ++i) {
            Point c{10.0 * double(i), 0.0};
            inst.demands.push_back({factory(c, radii[i]), weights[i]});
        }
        return inst;
    };
    const LambdaWeights lambda = LambdaWeights::preset("halfcentdian", n);
    auto closed_form = [&](double per_radius_factor) {
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i)
            scaled[i] = weights[i] * per_radius_factor * radii[i];
        return 2.0 * ordered_weighted_sum(lambda, scaled);
    };

    // sphere: E = R
    auto sph = make([](const Point& c, double r) { return DistributionSpec::sphere(c, r); });
    CHECK(nu_lambda(sph) == doctest::Approx(closed_form(1.0)).epsilon(1e-10));
    // ball: E = d R / (d+1)
    auto ball = make([](const Point& c, double r) { return DistributionSpec::ball(c, r); });
    CHECK(nu_lambda(ball) == doctest::Approx(closed_form(2.0 / 3.0)).epsilon(1e-10));
    // shell with inner = 4R/5: E = d/(d+1) (R^3 - r^3)/(R^2 - r^2) per radius
    auto shell = make([](const Point& c, double r) {
        return DistributionSpec::shell(c, 0.8 * r, r);
    });
    const double shell_factor =
        (2.0 / 3.0) * (1.0 - 0.8 * 0.8 * 0.8) / (1.0 - 0.8 * 0.8);
    CHECK(nu_lambda(shell) == doctest::Approx(closed_form(shell_factor)).epsilon(1e-10));
    // gaussian with sigma = R/2: E = (R/2) sqrt(2) Gamma(1.5)/Gamma(1)
    auto gauss = make([](const Point& c, double r) {
        return DistributionSpec::gaussian(c, r / 2.0);
    });
    const double gauss_factor = 0.5 * std::sqrt(2.0) * gamma_ratio(1.5, 1.0);
    CHECK(nu_lambda(gauss) == doctest::Approx(closed_form(gauss_factor)).epsilon(1e-10));
    // t-student with q = 6, sigma = R/2
    auto tstu = make([](const Point& c, double r) {
        return DistributionSpec::t_student(c, 6.0, r / 2.0);
    });
    const double t_factor =
        0.5 * std::sqrt(6.0) * gamma_ratio(1.5, 1.0) * gamma_ratio(2.5, 3.0);
    CHECK(nu_lambda(tstu) == doctest::Approx(closed_form(t_factor)).epsilon(1e-10));

    // Ball in d=2 with median weights: (4/3) sum w_i R_i.
    auto ball_med = make([](const Point& c, double r) { return DistributionSpec::ball(c, r); });
    ball_med.lambda_preset = "median";
    double plain = 0.0;
    for (std::size_t i = 0; i < n; ++i) plain += weights[i] * radii[i];
    CHECK(nu_lambda(ball_med) == doctest::Approx(4.0 / 3.0 * plain).epsilon(1e-10));
}

TEST_CASE("nu_lambda rejects skewed demands") {
    Instance inst;
    inst.dim = 2;
    inst.lambda_preset = "median";
    inst.demands.push_back(
        {DistributionSpec::ball(Point{0, 0}, 1.0).with_skew(Point{1, 0}, 1.0), 1.0});
    CHECK_THROWS_AS(nu_lambda(inst), UnsupportedError);
}

TEST_CASE("nu_lambda is homogeneous in weights and monotone in radii") {
    auto base = symmetric_instance(6, 3, "halfsum");
    const double nu0 = nu_lambda(base);
    Instance scaled = base;
    for (auto& dem : scaled.demands) dem.weight *= 2.5;
    CHECK(nu_lambda(scaled) == doctest::Approx(2.5 * nu0).epsilon(1e-10));

    Instance grown = base;
    for (auto& dem : grown.demands) {
        const auto dist = dem.dist;
        switch (dist.kind()) {
            case DistKind::ball:
                dem.dist = DistributionSpec::ball(dist.center(), dist.outer_radius() * 1.3);
                break;
            case DistKind::shell:
                dem.dist = DistributionSpec::shell(dist.center(), dist.inner_radius() * 1.3,
                                                   dist.outer_radius() * 1.3);
                break;
            case DistKind::gaussian:
                dem.dist = DistributionSpec::gaussian(dist.center(), dist.sigma() * 1.3);
                break;
            default: break;
        }
    }
    CHECK(nu_lambda(grown) > nu0);
}

TEST_CASE("verify_gap_bound trivially passes on point masses") {
    Instance inst;
    inst.dim = 2;
    inst.lambda_preset = "median";
    inst.demands.push_back({DistributionSpec::point_mass(Point{1, 2}), 1.0});
    inst.demands.push_back({DistributionSpec::point_mass(Point{3, 4}), 2.0});
    const GroupedSample val = draw_validation(inst, 16, 9);
    const Point y{2.0, 3.0};
    const auto rep = verify_gap_bound(inst, y, y, val, 50, 0.05, RngStream(1));
    CHECK(rep.gap == doctest::Approx(0.0));
    CHECK(rep.nu == doctest::Approx(0.0));
    CHECK(rep.pass);
}

TEST_CASE("verify_gap_bound holds for a single symmetric demand") {
    Instance inst;
    inst.dim = 2;
    inst.lambda_preset = "median";
    inst.demands.push_back({DistributionSpec::ball(Point{1.0, -1.0}, 1.0), 1.0});
    const GroupedSample val = draw_validation(inst, 4000, 11);
    const Point center{1.0, -1.0};
    Point nearby{1.02, -0.97};
    const auto rep =
        verify_gap_bound(inst, nearby, center, val, 200, 0.05, RngStream(2));
    CHECK(rep.nu == doctest::Approx(2.0 * (2.0 / 3.0)).epsilon(1e-12));
    CHECK(rep.gap <= rep.nu + rep.slack);
    CHECK(rep.pass);
}

TEST_CASE("bound_report composes quantile balls into a diameter") {
    auto inst = symmetric_instance(5, 21, "median");
    const auto rep = bound_report(inst, 0.05);
    CHECK(rep.eps_bar == doctest::Approx(0.05));
    CHECK(rep.r_eps == doctest::Approx(eps_hull_radius(rep.hull_diameter, 0.05)));
    double max_center_dist = 0.0;
    const auto centers = inst.centers();
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            max_center_dist =
                std::max(max_center_dist, euclidean_distance(centers[i], centers[j]));
    CHECK(rep.hull_diameter >= max_center_dist);
    CHECK(std::isfinite(rep.nu));
    for (double e : rep.expected_distances) CHECK(std::isfinite(e));
}
