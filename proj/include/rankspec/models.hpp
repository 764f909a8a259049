#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rankspec/lattice.hpp"
#include "rankspec/linalg.hpp"
#include "rankspec/rng.hpp"

namespace rankspec {

enum class ModelKind { SitePotential, BondPercolation, SitePercolation };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::SitePotential: return "site-potential";
    case ModelKind::BondPercolation: return "bond-percolation";
    case ModelKind::SitePercolation: return "site-percolation";
  }
  return "?";
}

/// A finite-valued i.i.d. disorder specification. Site potentials draw a
/// value from `values` per site; percolation kinds draw a bit per edge
/// (bond) or per site (site), with bit 0 meaning open/present and
/// P(bit = 0) = p.
struct DisorderModel {
  ModelKind kind = ModelKind::SitePotential;
  std::vector<double> values;         // per-element outcomes (bits 0/1 for percolation)
  std::vector<double> probabilities;  // positive, sum to 1
  double retention = 0.0;             // p, percolation kinds only

  std::size_t value_count() const { return values.size(); }
};

inline DisorderModel site_potential_model(std::vector<double> values,
                                          std::vector<double> probabilities) {
  if (values.empty() || values.size() != probabilities.size())
    throw std::invalid_argument("site_potential_model: values/probabilities mismatch");
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b)
      if (values[a] == values[b])
        throw std::invalid_argument("site_potential_model: values must be distinct");
  detail::KahanSum sum;
  for (double p : probabilities) {
    if (!(p > 0.0)) throw std::invalid_argument("site_potential_model: probabilities must be > 0");
    sum.add(p);
  }
  if (std::abs(sum.value() - 1.0) > 1e-12)
    throw std::invalid_argument("site_potential_model: probabilities must sum to 1");
  return DisorderModel{ModelKind::SitePotential, std::move(values), std::move(probabilities), 0.0};
}

namespace detail {

inline DisorderModel percolation_model(ModelKind kind, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("percolation model: p must lie in (0, 1)");
  return DisorderModel{kind, {0.0, 1.0}, {p, 1.0 - p}, p};
}

}  // namespace detail

inline DisorderModel bond_percolation_model(double p) {
  return detail::percolation_model(ModelKind::BondPercolation, p);
}

inline DisorderModel site_percolation_model(double p) {
  return detail::percolation_model(ModelKind::SitePercolation, p);
}

enum class Carrier { Sites, Edges };

inline Carrier carrier_of(const DisorderModel& model) {
  return model.kind == ModelKind::BondPercolation ? Carrier::Edges : Carrier::Sites;
}

/// One realization of the disorder on a finite region: a value per carrier
/// element (sites, or box-graph edges in their deterministic order).
struct Configuration {
  Region region;
  Carrier carrier = Carrier::Sites;
  std::vector<double> values;

  bool operator==(const Configuration&) const = default;
};

inline std::int64_t carrier_size(const DisorderModel& model, const Region& region) {
  if (carrier_of(model) == Carrier::Sites) return region.volume();
  return static_cast<std::int64_t>(region_graph(region).edges.size());
}

namespace detail {

inline int value_index(const DisorderModel& model, double v) {
  for (std::size_t t = 0; t < model.values.size(); ++t)
    if (model.values[t] == v) return static_cast<int>(t);
  throw std::invalid_argument("configuration value not in model alphabet");
}

inline void check_bits(const Configuration& config) {
  for (double v : config.values)
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("percolation configuration values must be bits");
}

}  // namespace detail

/// Number of configurations k^carrier, guarded against the enumeration cap.
inline std::int64_t config_count(const DisorderModel& model, const Region& region,
                                 std::int64_t cap) {
  const std::int64_t c = carrier_size(model, region);
  std::int64_t count = 1;
  for (std::int64_t e = 0; e < c; ++e) {
    count *= static_cast<std::int64_t>(model.value_count());
    if (count > cap)
      throw CapExceeded("configuration space of size " + std::to_string(model.value_count()) +
                        "^" + std::to_string(c) + " exceeds cap " + std::to_string(cap));
  }
  return count;
}

inline constexpr std::int64_t kConfigCap = std::int64_t{1} << 16;

/// All configurations on the region in lexicographic order (first carrier
/// element most significant), each with its product-measure probability.
inline std::vector<std::pair<Configuration, double>> enumerate_configs(
    const DisorderModel& model, const Region& region, std::int64_t cap = kConfigCap) {
  const std::int64_t count = config_count(model, region, cap);
  const std::int64_t c = carrier_size(model, region);
  const std::int64_t k = static_cast<std::int64_t>(model.value_count());
  std::vector<std::pair<Configuration, double>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> digits(static_cast<std::size_t>(c), 0);
  for (std::int64_t idx = 0; idx < count; ++idx) {
    Configuration config{region, carrier_of(model), std::vector<double>(digits.size())};
    double prob = 1.0;
    for (std::size_t e = 0; e < digits.size(); ++e) {
      config.values[e] = model.values[static_cast<std::size_t>(digits[e])];
      prob *= model.probabilities[static_cast<std::size_t>(digits[e])];
    }
    out.emplace_back(std::move(config), prob);
    for (std::int64_t e = c - 1; e >= 0; --e) {  // increment, last element fastest
      if (++digits[static_cast<std::size_t>(e)] < k) break;
      digits[static_cast<std::size_t>(e)] = 0;
    }
  }
  return out;
}

/// Deterministic i.i.d. sample: element e draws from the model distribution
/// at counter_uniform(seed, 0, e). Identical seeds give identical output.
inline Configuration sample_config(const DisorderModel& model, const Region& region,
                                   std::uint64_t seed) {
  const std::int64_t c = carrier_size(model, region);
  Configuration config{region, carrier_of(model), std::vector<double>(static_cast<std::size_t>(c))};
  for (std::int64_t e = 0; e < c; ++e) {
    const double u = counter_uniform(seed, 0, static_cast<std::uint64_t>(e));
    double acc = 0.0;
    std::size_t pick = model.value_count() - 1;
    for (std::size_t t = 0; t < model.value_count(); ++t) {
      acc += model.probabilities[t];
      if (u < acc) {
        pick = t;
        break;
      }
    }
    config.values[static_cast<std::size_t>(e)] = model.values[pick];
  }
  return config;
}

/// The truncated operator for one configuration, always on the full vertex
/// space of the region (closed percolation regions keep their zero rows):
///  - site potential: Laplacian with diagonal deg(x) * omega(x);
///  - bond percolation: Laplacian of the subgraph keeping open (bit 0) edges;
///  - site percolation: Laplacian keeping edges whose both endpoints are open.
inline SymMatrix model_operator(const DisorderModel& model, const Configuration& config) {
  if (config.carrier != carrier_of(model))
    throw std::invalid_argument("model_operator: configuration carrier mismatch");
  const RegionGraph g = region_graph(config.region);
  const std::int64_t n = g.vertex_count();
  switch (model.kind) {
    case ModelKind::SitePotential: {
      if (static_cast<std::int64_t>(config.values.size()) != n)
        throw std::invalid_argument("model_operator: site value count mismatch");
      return laplacian(g, config.values);
    }
    case ModelKind::BondPercolation: {
      if (config.values.size() != g.edges.size())
        throw std::invalid_argument("model_operator: edge value count mismatch");
      detail::check_bits(config);
      RegionGraph open{g.region, {}, std::vector<std::int32_t>(static_cast<std::size_t>(n), 0)};
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (config.values[e] != 0.0) continue;
        open.edges.push_back(g.edges[e]);
        ++open.degrees[static_cast<std::size_t>(g.edges[e].first)];
        ++open.degrees[static_cast<std::size_t>(g.edges[e].second)];
      }
      return laplacian(open);
    }
    case ModelKind::SitePercolation: {
      if (static_cast<std::int64_t>(config.values.size()) != n)
        throw std::invalid_argument("model_operator: site value count mismatch");
      detail::check_bits(config);
      RegionGraph open{g.region, {}, std::vector<std::int32_t>(static_cast<std::size_t>(n), 0)};
      for (const auto& [u, v] : g.edges) {
        if (config.values[static_cast<std::size_t>(u)] != 0.0 ||
            config.values[static_cast<std::size_t>(v)] != 0.0)
          continue;
        open.edges.emplace_back(u, v);
        ++open.degrees[static_cast<std::size_t>(u)];
        ++open.degrees[static_cast<std::size_t>(v)];
      }
      return laplacian(open);
    }
  }
  throw std::logic_error("model_operator: unknown kind");
}

struct ShiftedModel {
  DisorderModel model;
  double shift = 0.0;
};

/// Shifts site-potential values by max(0, -min c) + 2d, the Gershgorin bound
/// making the shifted operator positive semidefinite on any region of Z^d.
inline ShiftedModel shift_to_positive(const DisorderModel& model, int d) {
  if (model.kind != ModelKind::SitePotential)
    throw std::invalid_argument("shift_to_positive: percolation Hamiltonians are already psd");
  double min_value = model.values.front();
  for (double v : model.values) min_value = std::min(min_value, v);
  const double shift = std::max(0.0, -min_value) + 2.0 * d;
  DisorderModel shifted = model;
  for (double& v : shifted.values) v += shift;
  return {std::move(shifted), shift};
}

}  // namespace rankspec
