#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynopt {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Axis-aligned box constraint [lower_i, upper_i]^n.
struct BoxDomain {
    std::vector<double> lower;
    std::vector<double> upper;

    BoxDomain(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("BoxDomain: bound vectors must be non-empty and equally sized");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("BoxDomain: lower[" + std::to_string(i) + "] must be < upper");
    }

    static BoxDomain symmetric(std::size_t dim, double half_width) {
        return BoxDomain(std::vector<double>(dim, -half_width),
                         std::vector<double>(dim, half_width));
    }

    std::size_t dimension() const { return lower.size(); }

    bool contains(std::span<const double> x) const {
        if (x.size() != lower.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }

    void clamp(std::span<double> x) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < lower[i]) x[i] = lower[i];
            if (x[i] > upper[i]) x[i] = upper[i];
        }
    }

    std::vector<double> sample_uniform(auto& rng) const {
        std::vector<double> x(dimension());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
        return x;
    }

    bool operator==(const BoxDomain&) const = default;
};

namespace detail {
inline void require_finite_nonempty(std::span<const double> x, const char* who) {
    if (x.empty())
        throw std::invalid_argument(std::string(who) + ": empty input vector");
    for (double v : x)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(who) + ": non-finite component");
}
}  // namespace detail

// f(x) = 10n + sum_i [x_i^2 - 10 cos(2 pi x_i)], minimum 0 at the origin.
inline double rastrigin(std::span<const double> x) {
    detail::require_finite_nonempty(x, "rastrigin");
    double acc = 10.0 * static_cast<double>(x.size());
    for (double v : x) acc += v * v - 10.0 * std::cos(kTwoPi * v);
    return acc;
}

// d/dx_i = 2 x_i + 20 pi sin(2 pi x_i)
inline std::vector<double> rastrigin_gradient(std::span<const double> x) {
    detail::require_finite_nonempty(x, "rastrigin_gradient");
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = 2.0 * x[i] + 20.0 * kPi * std::sin(kTwoPi * x[i]);
    return g;
}

// Rastrigin translated so its optimum rides at x = delta.
inline double shifted_rastrigin(std::span<const double> x, std::span<const double> delta) {
    if (x.size() != delta.size())
        throw std::invalid_argument("shifted_rastrigin: x and delta length mismatch");
    detail::require_finite_nonempty(x, "shifted_rastrigin");
    double acc = 10.0 * static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = x[i] - delta[i];
        acc += z * z - 10.0 * std::cos(kTwoPi * z);
    }
    return acc;
}

inline std::vector<double> shifted_rastrigin_gradient(std::span<const double> x,
                                                      std::span<const double> delta) {
    if (x.size() != delta.size())
        throw std::invalid_argument("shifted_rastrigin_gradient: x and delta length mismatch");
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = x[i] - delta[i];
        g[i] = 2.0 * z + 20.0 * kPi * std::sin(kTwoPi * z);
    }
    return g;
}

// d2/dz2 of the separable Rastrigin term: 2 + 40 pi^2 cos(2 pi z)
inline double rastrigin_curvature_1d(double z) {
    return 2.0 + 40.0 * kPi * kPi * std::cos(kTwoPi * z);
}

// Sine transform mapping unconstrained y onto the box:
//   x_i = (a_i + b_i)/2 + (a_i - b_i)/2 * sin(y_i)
inline std::vector<double> transform_y_to_x(std::span<const double> y, const BoxDomain& domain) {
    if (y.size() != domain.dimension())
        throw std::invalid_argument("transform_y_to_x: dimension mismatch");
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double mid = 0.5 * (domain.lower[i] + domain.upper[i]);
        double amp = 0.5 * (domain.lower[i] - domain.upper[i]);
        x[i] = mid + amp * std::sin(y[i]);
    }
    return x;
}

// dx_i/dy_i of the sine transform, needed to chain gradients through it.
inline double transform_slope(double y_i, double lower_i, double upper_i) {
    return 0.5 * (lower_i - upper_i) * std::cos(y_i);
}

}  // namespace dynopt
