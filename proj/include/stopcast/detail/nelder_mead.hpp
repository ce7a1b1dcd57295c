#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace stopcast {

template <typename F>
NelderMeadResult nelder_mead(F&& objective, std::vector<double> start, const NelderMeadOptions& opts) {
    const std::size_t n = start.size();
    auto eval = [&](const std::vector<double>& x) {
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    NelderMeadResult result;
    if (n == 0) {
        result.x = std::move(start);
        result.value = eval(result.x);
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    auto diameter = [&]() {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                d = std::max(d, std::abs(simplex[order[i]][k] - simplex[order[0]][k]));
        return d;
    };
    auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        // a + t * (b - a)
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + t * (b[k] - a[k]);
        return out;
    };

    int iter = 0;
    for (;; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        if (diameter() < opts.tolerance) {
            result.converged = true;
            break;
        }
        if (iter >= opts.max_iterations) break;

        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(n);

        auto reflected = affine(centroid, simplex[worst], -1.0);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            auto expanded = affine(centroid, simplex[worst], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = std::move(reflected);
            values[worst] = fr;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point, else inside.
        const bool outside = fr < values[worst];
        auto contracted = outside ? affine(centroid, reflected, 0.5) : affine(centroid, simplex[worst], 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = std::move(contracted);
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            const std::size_t idx = order[i];
            simplex[idx] = affine(simplex[best], simplex[idx], 0.5);
            values[idx] = eval(simplex[idx]);
        }
    }
    result.x = simplex[order[0]];
    result.value = values[order[0]];
    result.iterations = iter;
    return result;
}

}  // namespace stopcast
