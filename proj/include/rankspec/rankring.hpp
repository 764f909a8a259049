#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankspec/linalg.hpp"
#include "rankspec/parallel.hpp"
#include "rankspec/stepfn.hpp"

namespace rankspec {

struct Block {
  double weight;  // strictly positive, weights sum to 1 across the operator
  Matrix matrix;  // square
};

/// A weighted direct sum of square matrices: one block per summand of a
/// finite-dimensional algebra, with the block's probability weight. All
/// spectral and rank computations on the finite levels act on these.
class BlockOperator {
 public:
  explicit BlockOperator(std::vector<Block> blocks, std::optional<int> level = std::nullopt)
      : blocks_(std::move(blocks)), level_(level) {
    if (blocks_.empty()) throw std::invalid_argument("BlockOperator: no blocks");
    detail::KahanSum sum;
    for (const Block& b : blocks_) {
      if (!(b.weight > 0.0)) throw std::invalid_argument("BlockOperator: weight must be positive");
      if (b.matrix.dim() == 0) throw std::invalid_argument("BlockOperator: empty block");
      sum.add(b.weight);
    }
    if (std::abs(sum.value() - 1.0) > 1e-12)
      throw std::invalid_argument("BlockOperator: weights must sum to 1");
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t block_count() const { return blocks_.size(); }
  std::optional<int> level() const { return level_; }

 private:
  std::vector<Block> blocks_;
  std::optional<int> level_;
};

namespace detail {

inline void check_compatible(const BlockOperator& a, const BlockOperator& b) {
  if (a.block_count() != b.block_count())
    throw std::invalid_argument("BlockOperator: block count mismatch");
  for (std::size_t k = 0; k < a.block_count(); ++k) {
    if (a.blocks()[k].matrix.dim() != b.blocks()[k].matrix.dim())
      throw std::invalid_argument("BlockOperator: block size mismatch");
    if (std::abs(a.blocks()[k].weight - b.blocks()[k].weight) > 1e-12)
      throw std::invalid_argument("BlockOperator: block weight mismatch");
  }
}

template <class Op>
BlockOperator combine(const BlockOperator& a, const BlockOperator& b, Op op) {
  check_compatible(a, b);
  std::vector<Block> out;
  out.reserve(a.block_count());
  for (std::size_t k = 0; k < a.block_count(); ++k)
    out.push_back({a.blocks()[k].weight, op(a.blocks()[k].matrix, b.blocks()[k].matrix)});
  return BlockOperator(std::move(out), a.level() == b.level() ? a.level() : std::nullopt);
}

}  // namespace detail

inline BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
  return detail::combine(a, b, [](const Matrix& x, const Matrix& y) { return x + y; });
}
inline BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) {
  return detail::combine(a, b, [](const Matrix& x, const Matrix& y) { return x - y; });
}
inline BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
  return detail::combine(a, b, [](const Matrix& x, const Matrix& y) { return x * y; });
}

/// Normalized rank: sum over blocks of weight * Rank(block) / block size.
/// 0 exactly when every block vanishes, 1 when every block is invertible.
inline double rank(const BlockOperator& t, double tol = kRankTol, unsigned threads = 1) {
  std::vector<double> terms(t.block_count());
  parallel_for(t.block_count(), threads, [&](std::size_t k) {
    const Block& b = t.blocks()[k];
    terms[k] = b.weight * numerical_rank(b.matrix, tol) / static_cast<double>(b.matrix.dim());
  });
  detail::KahanSum sum;
  for (double v : terms) sum.add(v);
  return sum.value();
}

/// The spectral function sigma_T: the weighted singular-value distribution of
/// the blocks. For positive self-adjoint T this is the weighted eigenvalue
/// counting function; general T reduces to that case through S^2 = T^*T, so a
/// single code path serves both.
inline StepFunction sigma(const BlockOperator& t, unsigned threads = 1) {
  std::vector<StepFunction> parts(t.block_count());
  parallel_for(t.block_count(), threads, [&](std::size_t k) {
    const Matrix& m = t.blocks()[k].matrix;
    const std::vector<double> sv = singular_values(m);
    parts[k] = from_samples(sv, std::vector<double>(sv.size(), 1.0 / m.dim()));
  });
  std::vector<std::pair<double, StepFunction>> weighted;
  weighted.reserve(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k)
    weighted.emplace_back(t.blocks()[k].weight, std::move(parts[k]));
  return mix(weighted);
}

/// The complementary spectral function: pointwise 1 - sigma_T, the maximal
/// normalized dimension of subspaces where ||Tv|| > lambda ||v||.
inline StepFunction sigma_tilde(const BlockOperator& t, unsigned threads = 1) {
  return sigma(t, threads).complement();
}

}  // namespace rankspec
