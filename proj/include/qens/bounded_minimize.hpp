// Box-constrained limited-memory quasi-Newton minimization.
//
// Projected L-BFGS: the two-loop recursion gives a direction on the variables
// that are not pinned at a bound, the step is projected back onto the box and
// accepted only when it satisfies an Armijo decrease along the projection arc.
// Every accepted iterate strictly lowers the objective.

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace qens {

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct MinimizeOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-9;
    int history = 10;
};

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    double initial_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Objective writes the gradient into `grad` and returns the value. Exceptions
// thrown by the objective mark a point as infeasible (treated as +inf).
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

namespace detail {

inline double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

}  // namespace detail

inline MinimizeResult bounded_minimize(const Objective& f, std::vector<double> x0, const Bounds& bounds,
                                       const MinimizeOptions& opt = {}) {
    const std::size_t n = x0.size();
    auto project = [&](std::vector<double>& x) {
        for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(x[k], bounds.lower[k], bounds.upper[k]);
    };
    auto eval = [&](const std::vector<double>& x, std::vector<double>& g) {
        try {
            const double v = f(x, g);
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (...) {
            return std::numeric_limits<double>::infinity();
        }
    };
    // Zero the components that would push a variable through an active bound.
    auto projected_gradient = [&](const std::vector<double>& x, const std::vector<double>& g) {
        std::vector<double> pg = g;
        for (std::size_t k = 0; k < n; ++k) {
            if (x[k] <= bounds.lower[k] && g[k] > 0.0) pg[k] = 0.0;
            if (x[k] >= bounds.upper[k] && g[k] < 0.0) pg[k] = 0.0;
        }
        return pg;
    };

    MinimizeResult res;
    project(x0);
    std::vector<double> x = std::move(x0), g(n);
    double fx = eval(x, g);
    res.initial_value = fx;

    std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;  // (s, y)
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        const auto pg = projected_gradient(x, g);
        double pg_max = 0.0;
        for (double v : pg) pg_max = std::max(pg_max, std::abs(v));
        if (pg_max < opt.gradient_tolerance) {
            res.converged = true;
            break;
        }

        // Two-loop recursion restricted to free variables.
        std::vector<double> q = pg;
        std::vector<double> alpha(memory.size());
        for (std::size_t h = memory.size(); h-- > 0;) {
            const auto& [s, y] = memory[h];
            alpha[h] = detail::dot_v(s, q) / detail::dot_v(y, s);
            for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[h] * y[k];
        }
        double gamma = 1.0;
        if (!memory.empty()) gamma = detail::dot_v(memory.back().first, memory.back().second) /
                                     detail::dot_v(memory.back().second, memory.back().second);
        for (auto& v : q) v *= gamma;
        for (std::size_t h = 0; h < memory.size(); ++h) {
            const auto& [s, y] = memory[h];
            const double beta = detail::dot_v(y, q) / detail::dot_v(y, s);
            for (std::size_t k = 0; k < n; ++k) q[k] += s[k] * (alpha[h] - beta);
        }
        std::vector<double> dir(n);
        for (std::size_t k = 0; k < n; ++k) dir[k] = pg[k] == 0.0 ? 0.0 : -q[k];

        auto try_direction = [&](const std::vector<double>& d, double step) -> bool {
            std::vector<double> xn(n), gn(n);
            for (int attempt = 0; attempt < 50; ++attempt, step *= 0.5) {
                for (std::size_t k = 0; k < n; ++k) xn[k] = x[k] + step * d[k];
                project(xn);
                double decrease = 0.0;
                for (std::size_t k = 0; k < n; ++k) decrease += g[k] * (xn[k] - x[k]);
                if (decrease >= 0.0) continue;
                const double fn = eval(xn, gn);
                if (fn <= fx + 1e-4 * decrease && fn < fx) {
                    std::vector<double> s(n), y(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        s[k] = xn[k] - x[k];
                        y[k] = gn[k] - g[k];
                    }
                    if (detail::dot_v(s, y) > 1e-12 * detail::dot_v(y, y)) {
                        memory.emplace_back(std::move(s), std::move(y));
                        if (static_cast<int>(memory.size()) > opt.history) memory.pop_front();
                    }
                    x = xn;
                    g = gn;
                    fx = fn;
                    return true;
                }
            }
            return false;
        };

        bool moved = detail::dot_v(dir, pg) < 0.0 && try_direction(dir, 1.0);
        if (!moved) {
            memory.clear();
            std::vector<double> sd(n);
            for (std::size_t k = 0; k < n; ++k) sd[k] = -pg[k];
            moved = try_direction(sd, 1.0 / std::max(pg_max, 1e-12));
        }
        if (!moved) {
            // No representable decrease left: stationary up to rounding of f.
            res.converged = pg_max < 1e-6 * std::max(1.0, std::abs(fx));
            break;
        }
    }
    res.x = std::move(x);
    res.value = fx;
    return res;
}

}  // namespace qens
