#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace owp {

// A location in R^d. Dimensions are small (2..5 in practice), so a plain
// vector keeps the interfaces simple.
using Point = std::vector<double>;

// Error taxonomy shared by every module.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct UnsupportedError : Error {
    using Error::Error;
};
struct ResourceError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

inline void require_dimension(bool cond, const std::string& what) {
    if (!cond) throw DimensionError(what);
}

inline void require_domain(bool cond, const std::string& what) {
    if (!cond) throw DomainError(what);
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double squared_norm(std::span<const double> v) { return dot(v, v); }

inline double euclidean_norm(std::span<const double> v) {
    return std::sqrt(squared_norm(v));
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// ||a - b||_p for p >= 1; p = +inf gives the max norm.
inline double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
    if (p < 1.0) throw DomainError("lp_distance: p must be >= 1");
    if (p == 2.0) return euclidean_distance(a, b);
    if (p == 1.0) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
        return s;
    }
    if (std::isinf(p)) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
        return s;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(std::abs(a[k] - b[k]), p);
    return std::pow(s, 1.0 / p);
}

inline void add_scaled(Point& acc, std::span<const double> v, double c) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += c * v[k];
}

// A tightly packed collection of same-dimensional points (row-major).
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
        if (dim_ == 0 || data_.size() % dim_ != 0)
            throw DimensionError("PointSet: data size not a multiple of dim");
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> operator[](std::size_t j) const {
        return {data_.data() + j * dim_, dim_};
    }

    void add(std::span<const double> p) {
        if (dim_ == 0) dim_ = p.size();
        require_dimension(p.size() == dim_, "PointSet::add: dimension mismatch");
        data_.insert(data_.end(), p.begin(), p.end());
    }

    void reserve(std::size_t npoints) { data_.reserve(npoints * dim_); }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// Per-demand finite point collections (training or validation samples).
struct GroupedSample {
    std::vector<PointSet> groups;

    std::size_t size() const { return groups.size(); }

    std::size_t dim() const {
        for (const auto& g : groups)
            if (g.dim() != 0) return g.dim();
        return 0;
    }

    std::size_t total_points() const {
        std::size_t t = 0;
        for (const auto& g : groups) t += g.size();
        return t;
    }

    void validate() const {
        if (groups.empty()) throw DomainError("GroupedSample: no groups");
        const std::size_t d = dim();
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].size() == 0)
                throw DomainError("GroupedSample: group " + std::to_string(i) + " is empty");
            if (groups[i].dim() != d)
                throw DimensionError("GroupedSample: group " + std::to_string(i) +
                                     " has inconsistent dimension");
        }
    }
};

}  // namespace owp
