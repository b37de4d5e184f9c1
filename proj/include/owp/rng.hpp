#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "owp/common.hpp"

namespace owp {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood; Vigna's public-domain constants).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Counter-based splittable stream. Drawing advances a 64-bit counter through
// the SplitMix64 output function; child streams are derived by hashing a
// stream id into the state without advancing the parent, so hierarchical ids
// (demand index, iteration index, replicate index, ...) give independent and
// reproducible substreams. Identical (seed, id path) always reproduces
// identical draws. A single stream must not be shared across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(detail::mix64(seed + detail::kGolden)) {}

    // Derived stream keyed by `id`. Splitting depends only on the id path,
    // never on how many draws the parent has made.
    RngStream child(std::uint64_t id) const {
        return RngStream(detail::mix64(key_ ^ detail::mix64(id + 0x632BE59BD9B4E019ULL)),
                         RawTag{});
    }
    RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
    RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    std::uint64_t next_u64() {
        counter_ += detail::kGolden;
        return detail::mix64(key_ + counter_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double next_open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the spare deviate is cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u = next_open_unit();
        const double v = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 handled by boosting.
    double next_gamma(double shape) {
        require_domain(shape > 0.0, "next_gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = next_open_unit();
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_gaussian();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double next_chi_square(double dof) { return 2.0 * next_gamma(0.5 * dof); }

    // Uniform direction on the unit sphere S^{d-1}.
    Point next_unit_direction(std::size_t dim) {
        Point u(dim);
        for (;;) {
            for (std::size_t k = 0; k < dim; ++k) u[k] = next_gaussian();
            const double nrm = euclidean_norm(u);
            if (nrm > 1e-12) {
                for (double& x : u) x /= nrm;
                return u;
            }
        }
    }

private:
    struct RawTag {};
    RngStream(std::uint64_t raw_key, RawTag) : key_(raw_key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace owp
