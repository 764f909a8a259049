#pragma once

#include <cstdint>
#include <vector>

#include "rankspec/linalg.hpp"
#include "rankspec/rng.hpp"
#include "rankspec/stepfn.hpp"

namespace testutil {

inline double uniform(std::uint64_t key, std::uint64_t index) {
  return rankspec::counter_uniform(key, 1, index);
}

inline double uniform_pm(std::uint64_t key, std::uint64_t index) {
  return 2.0 * uniform(key, index) - 1.0;
}

inline rankspec::Matrix random_matrix(int n, std::uint64_t key) {
  rankspec::Matrix m(n);
  std::uint64_t idx = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = uniform_pm(key, idx++);
  return m;
}

inline rankspec::Matrix random_symmetric(int n, std::uint64_t key) {
  rankspec::Matrix m(n);
  std::uint64_t idx = 0;
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      const double v = uniform_pm(key, idx++);
      m(r, c) = v;
      m(c, r) = v;
    }
  return m;
}

// Positive definite: G^T G / n + 0.1 I.
inline rankspec::Matrix random_positive(int n, std::uint64_t key) {
  const rankspec::Matrix g = random_matrix(n, key);
  rankspec::Matrix m = g.transposed() * g;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) /= n;
    m(r, r) += 0.1;
  }
  return m;
}

// Sum of r rank-one terms; rank exactly r almost surely. PSD when psd is set.
inline rankspec::Matrix random_low_rank(int n, int r, std::uint64_t key, bool psd) {
  rankspec::Matrix m(n);
  std::uint64_t idx = 0;
  for (int t = 0; t < r; ++t) {
    std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) u[static_cast<std::size_t>(a)] = uniform_pm(key, idx++);
    if (psd)
      v = u;
    else
      for (int a = 0; a < n; ++a) v[static_cast<std::size_t>(a)] = uniform_pm(key, idx++);
    const double c = psd ? 0.2 + uniform(key, idx++) : uniform_pm(key, idx++);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        m(a, b) += c * u[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(b)];
  }
  return m;
}

// n distinct sorted abscissae and masses summing below 1.
inline rankspec::StepFunction random_step_function(int jumps, std::uint64_t key) {
  std::vector<double> values(static_cast<std::size_t>(jumps));
  std::vector<double> masses(static_cast<std::size_t>(jumps));
  for (int m = 0; m < jumps; ++m) {
    values[static_cast<std::size_t>(m)] = 10.0 * uniform(key, 2 * static_cast<std::uint64_t>(m));
    masses[static_cast<std::size_t>(m)] =
        uniform(key, 2 * static_cast<std::uint64_t>(m) + 1) / jumps;
  }
  return rankspec::from_samples(values, masses);
}

}  // namespace testutil
