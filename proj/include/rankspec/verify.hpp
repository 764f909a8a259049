#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rankspec/bratteli.hpp"
#include "rankspec/models.hpp"
#include "rankspec/rankring.hpp"
#include "rankspec/rng.hpp"

namespace rankspec {

struct CheckResult {
  std::string name;
  double observed = 0.0;  // worst case over all trials
  double bound = 0.0;
  bool pass = false;
};

namespace detail {

inline Matrix verify_random_matrix(int n, std::uint64_t key) {
  Matrix m(n);
  std::uint64_t idx = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = 2.0 * counter_uniform(key, 2, idx++) - 1.0;
  return m;
}

inline Matrix verify_low_rank(int n, int r, std::uint64_t key, bool psd) {
  Matrix m(n);
  std::uint64_t idx = 0;
  for (int t = 0; t < r; ++t) {
    std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
      u[static_cast<std::size_t>(a)] = 2.0 * counter_uniform(key, 3, idx++) - 1.0;
    if (psd)
      v = u;
    else
      for (int a = 0; a < n; ++a)
        v[static_cast<std::size_t>(a)] = 2.0 * counter_uniform(key, 3, idx++) - 1.0;
    const double c = psd ? 0.2 + counter_uniform(key, 3, idx++) : 1.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        m(a, b) += c * u[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(b)];
  }
  return m;
}

inline BlockOperator verify_block_operator(int blocks, int max_dim, std::uint64_t key,
                                           bool psd) {
  std::vector<double> weights(static_cast<std::size_t>(blocks));
  double total = 0.0;
  for (int b = 0; b < blocks; ++b) {
    weights[static_cast<std::size_t>(b)] = 0.1 + counter_uniform(key, 4, static_cast<std::uint64_t>(b));
    total += weights[static_cast<std::size_t>(b)];
  }
  std::vector<Block> list;
  for (int b = 0; b < blocks; ++b) {
    const int n =
        1 + static_cast<int>(counter_uniform(key, 5, static_cast<std::uint64_t>(b)) * max_dim);
    Matrix m = verify_random_matrix(n, key ^ static_cast<std::uint64_t>(b + 1));
    if (psd) {
      Matrix g = m.transposed() * m;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) /= n;
      m = std::move(g);
    }
    list.push_back(Block{weights[static_cast<std::size_t>(b)] / total, std::move(m)});
  }
  return BlockOperator(std::move(list));
}

// Weighted eigenvalue-counting oracle for positive self-adjoint operators,
// evaluated pointwise; independent of the step-function machinery.
inline double counting_oracle(const BlockOperator& t, double lambda) {
  double acc = 0.0;
  for (const Block& b : t.blocks()) {
    const auto spectrum = sym_spectrum(SymMatrix(b.matrix));
    std::int64_t count = 0;
    for (double e : spectrum) count += e <= lambda;
    acc += b.weight * static_cast<double>(count) / b.matrix.dim();
  }
  return acc;
}

}  // namespace detail

/// Exactness of the complement identity on random block operators.
inline CheckResult check_complement_identity(std::uint64_t seed, int trials = 60) {
  CheckResult result{"sigma-complement-identity", 0.0, 0.0, false};
  for (int t = 0; t < trials; ++t) {
    const BlockOperator op =
        detail::verify_block_operator(1 + t % 3, 12, derive_seed(seed, 100 + static_cast<std::uint64_t>(t)), false);
    const StepFunction s = sigma(op);
    const StepFunction st = sigma_tilde(op);
    result.observed = std::max(result.observed, std::abs(s.pre_value() + st.pre_value() - 1.0));
    for (std::size_t m = 0; m < s.size(); ++m)
      result.observed =
          std::max(result.observed, std::abs(s.values()[m] + st.values()[m] - 1.0));
  }
  result.pass = result.observed == 0.0;
  return result;
}

/// Sigma of positive self-adjoint operators against the counting oracle,
/// probed between the jumps.
inline CheckResult check_counting_oracle(std::uint64_t seed, int trials = 40) {
  CheckResult result{"sigma-counting-oracle", 0.0, 1e-8, false};
  for (int t = 0; t < trials; ++t) {
    const BlockOperator op =
        detail::verify_block_operator(1 + t % 3, 10, derive_seed(seed, 200 + static_cast<std::uint64_t>(t)), true);
    const StepFunction s = sigma(op);
    std::vector<double> probes{-0.5};
    for (std::size_t m = 0; m + 1 < s.size(); ++m)
      probes.push_back(0.5 * (s.breakpoints()[m] + s.breakpoints()[m + 1]));
    if (!s.breakpoints().empty()) probes.push_back(s.breakpoints().back() + 1.0);
    for (double lambda : probes)
      result.observed =
          std::max(result.observed, std::abs(s(lambda) - detail::counting_oracle(op, lambda)));
  }
  result.pass = result.observed <= result.bound;
  return result;
}

/// Comparison bound: |sigma_T - sigma_S| <= r(T - S) for known-rank offsets.
inline CheckResult check_rank_comparison(std::uint64_t seed, int trials = 25) {
  CheckResult result{"sigma-rank-comparison", 0.0, 1e-8, false};
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t key = derive_seed(seed, 300 + static_cast<std::uint64_t>(t));
    const BlockOperator op = detail::verify_block_operator(2, 12, key, false);
    std::vector<Block> pert;
    for (const Block& blk : op.blocks())
      pert.push_back(Block{blk.weight,
                           detail::verify_low_rank(blk.matrix.dim(),
                                                   std::min(1 + t % 3, blk.matrix.dim()),
                                                   key ^ 0xabcd, false)});
    const BlockOperator shifted = op + BlockOperator(pert);
    const double eps = rank(op - shifted);
    const double dist = sup_distance(sigma(op), sigma(shifted));
    result.observed = std::max(result.observed, dist - eps);
  }
  result.pass = result.observed <= result.bound;
  return result;
}

/// Rank-perturbation bound for spectral distributions at n = 64.
inline CheckResult check_rank_perturbation(std::uint64_t seed, int trials = 40) {
  CheckResult result{"spectral-rank-perturbation", 0.0, 1e-8, false};
  const int n = 64;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t key = derive_seed(seed, 400 + static_cast<std::uint64_t>(t));
    const Matrix g = detail::verify_random_matrix(n, key);
    Matrix a = g.transposed() * g;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) /= n;
    const int rank_r = 1 + t % 8;
    const Matrix b = a + detail::verify_low_rank(n, rank_r, key ^ 0x77, true);
    const double dist = sup_distance(spectral_distribution(SymMatrix(a)),
                                     spectral_distribution(SymMatrix(b)));
    result.observed = std::max(result.observed, dist - static_cast<double>(rank_r) / n);
  }
  result.pass = result.observed <= result.bound;
  return result;
}

/// Conditional-expectation compatibility of the configuration probabilities,
/// at every enumerable level pair up to i = 2.
inline CheckResult check_probability_compatibility(const DisorderModel& model, int d) {
  CheckResult result{"probability-compatibility", 0.0, 1e-12, false};
  bool any = false;
  for (int i = 0; i <= 2; ++i) {
    try {
      result.observed = std::max(result.observed, check_compatibility(model, i, d));
      any = true;
    } catch (const CapExceeded&) {
      break;
    }
  }
  result.pass = any && result.observed <= result.bound;
  return result;
}

/// The Cauchy chain: rank distance within the boundary-fraction bound.
inline CheckResult check_embedding_rank_bound(const DisorderModel& model, int d) {
  CheckResult result{"embedding-rank-bound", 0.0, 1e-9, false};
  bool any = false;
  for (int i = 1; i <= 2; ++i) {
    try {
      const CauchyReport report = cauchy_report(model, i, i + 1, d);
      result.observed = std::max(result.observed, report.rank_distance - report.bound);
      any = true;
    } catch (const CapExceeded&) {
      break;
    }
  }
  result.pass = any && result.observed <= result.bound;
  return result;
}

/// The Cauchy chain: IDS distance within the rank distance.
inline CheckResult check_embedding_ids_bound(const DisorderModel& model, int d) {
  CheckResult result{"embedding-ids-bound", 0.0, 1e-9, false};
  bool any = false;
  for (int i = 1; i <= 2; ++i) {
    try {
      const CauchyReport report = cauchy_report(model, i, i + 1, d);
      const double dist =
          sup_distance(ids_approx(model, i, d), ids_approx(model, i + 1, d));
      result.observed = std::max(result.observed, dist - report.rank_distance);
      any = true;
    } catch (const CapExceeded&) {
      break;
    }
  }
  result.pass = any && result.observed <= result.bound;
  return result;
}

/// Subadditivity and submultiplicativity of the normalized rank.
inline CheckResult check_rank_axioms(std::uint64_t seed, int trials = 40) {
  CheckResult result{"rank-axioms", 0.0, 2 * kRankTol, false};
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t key = derive_seed(seed, 500 + static_cast<std::uint64_t>(t));
    const BlockOperator a = detail::verify_block_operator(2, 8, key, false);
    std::vector<Block> list;
    for (const Block& blk : a.blocks())
      list.push_back(Block{blk.weight,
                           detail::verify_low_rank(blk.matrix.dim(),
                                                   std::min(2, blk.matrix.dim()), key ^ 0x99,
                                                   false)});
    const BlockOperator b(std::move(list));
    const double ra = rank(a), rb = rank(b);
    result.observed = std::max(result.observed, rank(a + b) - (ra + rb));
    result.observed = std::max(result.observed, rank(a * b) - std::min(ra, rb));
  }
  result.pass = result.observed <= result.bound;
  return result;
}

inline std::vector<CheckResult> run_verification(const DisorderModel& model, int d,
                                                 std::uint64_t seed) {
  return {check_complement_identity(seed),
          check_counting_oracle(seed),
          check_rank_comparison(seed),
          check_rank_perturbation(seed),
          check_probability_compatibility(model, d),
          check_embedding_rank_bound(model, d),
          check_embedding_ids_bound(model, d),
          check_rank_axioms(seed)};
}

}  // namespace rankspec
