#pragma once

// Implementation of minimize_bounded_simplex; included from fitting.hpp.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace esrlab {

namespace detail {

inline void clamp_unit(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

template <typename F>
SimplexResult minimize_bounded_simplex(F&& f, std::vector<double> start, const SimplexOptions& options) {
  const std::size_t n = start.size();
  detail::clamp_unit(start);

  SimplexResult result;
  result.x = start;
  result.value = f(start);
  result.evaluations = 1;

  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    return f(x);
  };

  for (int round = 0; round <= options.restarts && result.evaluations < options.max_evaluations; ++round) {
    // simplex around the incumbent; steps point inward when at the upper face
    std::vector<std::vector<double>> vertex(n + 1, result.x);
    std::vector<double> value(n + 1, result.value);
    const double step = options.initial_step / (1 << std::min(round, 8));
    for (std::size_t k = 0; k < n; ++k) {
      vertex[k + 1][k] += (vertex[k + 1][k] + step <= 1.0) ? step : -step;
      detail::clamp_unit(vertex[k + 1]);
      value[k + 1] = eval(vertex[k + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    while (result.evaluations < options.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

      double size = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(vertex[order[k]][d] - vertex[best][d]));
      }
      const double spread = std::abs(value[worst] - value[best]);
      const double scale = std::abs(value[best]) + std::numeric_limits<double>::min();
      if (size <= options.x_tolerance || (std::isfinite(spread) && spread <= options.f_tolerance * scale)) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t d = 0; d < n; ++d) centroid[d] += vertex[order[k]][d] / static_cast<double>(n);
      }
      auto along = [&](double coeff) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + coeff * (vertex[worst][d] - centroid[d]);
        detail::clamp_unit(x);
        return x;
      };

      auto reflected = along(-1.0);
      const double fr = eval(reflected);
      if (fr < value[best]) {
        auto expanded = along(-2.0);
        const double fe = eval(expanded);
        if (fe < fr) {
          vertex[worst] = std::move(expanded);
          value[worst] = fe;
        } else {
          vertex[worst] = std::move(reflected);
          value[worst] = fr;
        }
        continue;
      }
      if (fr < value[second]) {
        vertex[worst] = std::move(reflected);
        value[worst] = fr;
        continue;
      }
      const bool outside = fr < value[worst];
      auto contracted = along(outside ? -0.5 : 0.5);
      const double fc = eval(contracted);
      if (fc < (outside ? fr : value[worst])) {
        vertex[worst] = std::move(contracted);
        value[worst] = fc;
        continue;
      }
      for (std::size_t k = 0; k <= n; ++k) {
        if (k == best) continue;
        for (std::size_t d = 0; d < n; ++d) vertex[k][d] = vertex[best][d] + 0.5 * (vertex[k][d] - vertex[best][d]);
        value[k] = eval(vertex[k]);
      }
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (value[k] < value[best]) best = k;
    }
    const bool improved = value[best] < result.value;
    if (value[best] <= result.value) {
      result.x = vertex[best];
      result.value = value[best];
    }
    if (!improved && round > 0) break;
  }
  return result;
}

}  // namespace esrlab
