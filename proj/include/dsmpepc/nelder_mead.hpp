#pragma once

/// \file
/// Budgeted Nelder-Mead simplex minimiser.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>

namespace dsmpepc {

template <std::size_t N>
struct NelderMeadResult {
  std::array<double, N> x{};
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Minimises f from `start` (whose value `start_value` is already known) using
/// an initial simplex spanned by `steps`. Stops after `max_evals` calls of f.
/// The returned point is never worse than `start`.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& start, double start_value,
                                const std::array<double, N>& steps, std::size_t max_evals,
                                double f_tolerance = 1e-10) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> simplex;
  std::array<double, N + 1> fv;
  std::size_t evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    return f(p);
  };

  simplex[0] = start;
  fv[0] = start_value;
  std::size_t filled = 1;
  for (std::size_t d = 0; d < N && evals < max_evals; ++d, ++filled) {
    simplex[d + 1] = start;
    simplex[d + 1][d] += steps[d];
    fv[d + 1] = eval(simplex[d + 1]);
  }

  auto best_of = [&](std::size_t count) {
    std::size_t b = 0;
    for (std::size_t k = 1; k < count; ++k)
      if (fv[k] < fv[b]) b = k;
    return NelderMeadResult<N>{simplex[b], fv[b], evals};
  };
  if (filled < N + 1) return best_of(filled);

  std::array<std::size_t, N + 1> order;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[N - 1];
    if (std::abs(fv[worst] - fv[best]) <= f_tolerance) break;

    Point centroid{};
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t d = 0; d < N; ++d) centroid[d] += simplex[order[k]][d] / static_cast<double>(N);
    auto along = [&](double t) {
      Point p;
      for (std::size_t d = 0; d < N; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };

    const Point xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      if (evals >= max_evals) {
        simplex[worst] = xr;
        fv[worst] = fr;
        break;
      }
      const Point xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    if (evals >= max_evals) break;
    const bool outside = fr < fv[worst];
    const Point xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k < N + 1 && evals < max_evals; ++k) {
      if (k == best) continue;
      for (std::size_t d = 0; d < N; ++d) simplex[k][d] = simplex[best][d] + 0.5 * (simplex[k][d] - simplex[best][d]);
      fv[k] = eval(simplex[k]);
    }
  }
  return best_of(N + 1);
}

}  // namespace dsmpepc
