#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rankspec {

// Breakpoints closer than this are coalesced into one jump, matching the
// accuracy of the dense eigensolver at the matrix sizes this library handles.
inline constexpr double kBreakpointMergeTol = 1e-9;

namespace detail {

// Compensated (Kahan) accumulator. Long mass sums must stay accurate to a
// few ulps so that normalization checks with 1e-12 tolerances are meaningful.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

}  // namespace detail

/// A right-continuous step function with finitely many jumps: the value at
/// lambda is `values[m]` for the largest breakpoint <= lambda, and
/// `pre_value()` left of every breakpoint (0 for distribution functions,
/// 1 for their complements). Spectral distributions and the sigma/sigma-tilde
/// functions are all stored in this form, so sup-norm distances can be
/// computed exactly on the merged breakpoint set instead of on a grid.
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<double> breakpoints, std::vector<double> values, double pre = 0.0)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)), pre_(pre) {
    if (breakpoints_.size() != values_.size())
      throw std::invalid_argument("StepFunction: breakpoint/value length mismatch");
    for (std::size_t m = 0; m + 1 < breakpoints_.size(); ++m)
      if (!(breakpoints_[m] < breakpoints_[m + 1]))
        throw std::invalid_argument("StepFunction: breakpoints not strictly increasing");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("StepFunction: non-finite value");
  }

  /// Right-continuous evaluation.
  double operator()(double lambda) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), lambda);
    if (it == breakpoints_.begin()) return pre_;
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  /// Value at +infinity.
  double total() const { return values_.empty() ? pre_ : values_.back(); }

  /// Value left of the first breakpoint.
  double pre_value() const { return pre_; }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return breakpoints_.size(); }

  /// The pointwise complement 1 - f, on the same breakpoints.
  StepFunction complement() const {
    std::vector<double> flipped(values_.size());
    for (std::size_t m = 0; m < values_.size(); ++m) flipped[m] = 1.0 - values_[m];
    return StepFunction(breakpoints_, std::move(flipped), 1.0 - pre_);
  }

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<double> breakpoints_;  // strictly increasing
  std::vector<double> values_;       // value on [breakpoints_[m], breakpoints_[m+1])
  double pre_ = 0.0;                 // value on (-inf, breakpoints_[0])
};

namespace detail {

// Shared tail of from_samples/mix: sorted (abscissa, jump) events are
// coalesced within the merge tolerance and turned into cumulative values.
inline StepFunction accumulate_jumps(std::vector<std::pair<double, double>>& events, double pre,
                                     bool snap_to_one) {
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> breakpoints;
  std::vector<double> values;
  breakpoints.reserve(events.size());
  values.reserve(events.size());
  KahanSum acc;
  acc.add(pre);
  for (std::size_t m = 0; m < events.size();) {
    const double b = events[m].first;
    std::size_t e = m;
    while (e < events.size() && events[e].first - b <= kBreakpointMergeTol) {
      acc.add(events[e].second);
      ++e;
    }
    breakpoints.push_back(b);
    values.push_back(acc.value());
    m = e;
  }
  if (snap_to_one && !values.empty() && std::abs(values.back() - 1.0) <= 1e-12)
    values.back() = 1.0;
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
  return StepFunction(std::move(breakpoints), std::move(values), pre);
}

}  // namespace detail

/// Builds the cumulative function lambda -> sum of masses[m] over values[m] <= lambda.
/// Values within the merge tolerance coalesce into a single breakpoint.
inline StepFunction from_samples(const std::vector<double>& values,
                                 const std::vector<double>& masses) {
  if (values.empty() || values.size() != masses.size())
    throw std::invalid_argument("from_samples: lists must have equal nonzero length");
  detail::KahanSum mass_sum;
  for (double m : masses) {
    if (!(m >= 0.0)) throw std::invalid_argument("from_samples: negative mass");
    mass_sum.add(m);
  }
  if (mass_sum.value() > 1.0 + 1e-12)
    throw std::invalid_argument("from_samples: mass sum exceeds 1");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("from_samples: non-finite value");
  std::vector<std::pair<double, double>> events;
  events.reserve(values.size());
  for (std::size_t m = 0; m < values.size(); ++m) events.emplace_back(values[m], masses[m]);
  return detail::accumulate_jumps(events, 0.0, true);
}

/// Convex combination of step functions. The breakpoint set of the result is
/// the (merge-tolerance) union of the input breakpoint sets.
inline StepFunction mix(const std::vector<std::pair<double, StepFunction>>& parts) {
  if (parts.empty()) throw std::invalid_argument("mix: no parts");
  detail::KahanSum weight_sum;
  for (const auto& [w, f] : parts) {
    if (!(w >= 0.0)) throw std::invalid_argument("mix: negative weight");
    weight_sum.add(w);
  }
  if (std::abs(weight_sum.value() - 1.0) > 1e-12)
    throw std::invalid_argument("mix: weights must sum to 1");
  if (parts.size() == 1 && parts.front().first == 1.0) return parts.front().second;
  detail::KahanSum pre;
  std::vector<std::pair<double, double>> events;
  for (const auto& [w, f] : parts) {
    pre.add(w * f.pre_value());
    double prev = f.pre_value();
    for (std::size_t m = 0; m < f.size(); ++m) {
      events.emplace_back(f.breakpoints()[m], w * (f.values()[m] - prev));
      prev = f.values()[m];
    }
  }
  return detail::accumulate_jumps(events, pre.value(), true);
}

/// Exact sup of |f - g| over lambda >= 0, found by scanning the merged
/// breakpoint set and checking both sides of every jump. Breakpoints of the
/// two functions closer than the merge tolerance are treated as the same
/// abscissa, so jumps the eigensolver placed within its own accuracy of each
/// other compare as simultaneous instead of as full-height slivers.
inline double sup_distance(const StepFunction& f, const StepFunction& g) {
  const auto& fb = f.breakpoints();
  const auto& gb = g.breakpoints();
  double vf = f.pre_value();
  double vg = g.pre_value();
  double best = 0.0;
  auto consider = [&] { best = std::max(best, std::abs(vf - vg)); };
  std::size_t i = 0, j = 0;
  while (i < fb.size() || j < gb.size()) {
    bool step_f = false, step_g = false;
    if (i < fb.size() && j < gb.size() && std::abs(fb[i] - gb[j]) <= kBreakpointMergeTol)
      step_f = step_g = true;
    else if (j == gb.size() || (i < fb.size() && fb[i] <= gb[j]))
      step_f = true;
    else
      step_g = true;
    const double b = step_f && step_g ? std::min(fb[i], gb[j]) : (step_f ? fb[i] : gb[j]);
    if (b > 0.0) consider();  // left limit at b, attained inside [0, inf)
    if (step_f) vf = f.values()[i++];
    if (step_g) vg = g.values()[j++];
    if (b >= 0.0) consider();
  }
  consider();  // terminal plateau (covers the all-negative-breakpoints case at lambda = 0)
  return best;
}

/// CSV serialization: header `lambda,value`, a leading `-inf` row with the
/// pre-breakpoint value, then one row per breakpoint with the post-jump value.
inline void write_csv(std::ostream& os, const StepFunction& f) {
  os << "lambda,value\n";
  os << "-inf," << detail::format_double(f.pre_value()) << "\n";
  for (std::size_t m = 0; m < f.size(); ++m)
    os << detail::format_double(f.breakpoints()[m]) << ','
       << detail::format_double(f.values()[m]) << "\n";
}

}  // namespace rankspec
