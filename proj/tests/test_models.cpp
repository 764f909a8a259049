#include <catch2/catch.hpp>

#include <cmath>

#include "helpers.hpp"
#include "rankspec/models.hpp"

using rankspec::Configuration;
using rankspec::DisorderModel;
using rankspec::Region;

TEST_CASE("model constructors validate") {
  CHECK_THROWS_AS(rankspec::site_potential_model({1, 2}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(rankspec::site_potential_model({1, 2}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(rankspec::site_potential_model({1, 1}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(rankspec::bond_percolation_model(0.0), std::invalid_argument);
  CHECK_THROWS_AS(rankspec::site_percolation_model(1.0), std::invalid_argument);
}

TEST_CASE("enumerate_configs on a two-site region") {
  const DisorderModel model = rankspec::site_potential_model({2, 3}, {0.25, 0.75});
  const Region r2 = rankspec::make_region(1, {2});
  const auto configs = rankspec::enumerate_configs(model, r2);
  REQUIRE(configs.size() == 4);
  CHECK(configs[0].first.values == std::vector<double>{2, 2});
  CHECK(configs[1].first.values == std::vector<double>{2, 3});
  CHECK(configs[2].first.values == std::vector<double>{3, 2});
  CHECK(configs[3].first.values == std::vector<double>{3, 3});
  CHECK(configs[0].second == Approx(0.0625).margin(1e-15));
  CHECK(configs[1].second == Approx(0.1875).margin(1e-15));
  CHECK(configs[3].second == Approx(0.5625).margin(1e-15));
}

TEST_CASE("enumerate_configs for bond percolation on one edge") {
  const DisorderModel model = rankspec::bond_percolation_model(0.3);
  const auto configs = rankspec::enumerate_configs(model, rankspec::make_region(1, {2}));
  REQUIRE(configs.size() == 2);
  CHECK(configs[0].first.values == std::vector<double>{0.0});
  CHECK(configs[0].second == 0.3);
  CHECK(configs[1].second == 0.7);
}

TEST_CASE("enumerate_configs covers C_2 uniformly") {
  const DisorderModel model = rankspec::site_potential_model({2, 3}, {0.5, 0.5});
  const auto configs = rankspec::enumerate_configs(model, rankspec::cube_region(2, 1));
  REQUIRE(configs.size() == 16);
  for (const auto& [config, p] : configs) CHECK(p == 1.0 / 16.0);
}

TEST_CASE("enumerate_configs probabilities sum to one") {
  const DisorderModel model = rankspec::site_potential_model({0, 1, 5}, {0.2, 0.3, 0.5});
  const auto configs = rankspec::enumerate_configs(model, rankspec::make_region(1, {6}));
  rankspec::detail::KahanSum sum;
  for (const auto& [config, p] : configs) sum.add(p);
  CHECK(sum.value() == Approx(1.0).margin(1e-10));
}

TEST_CASE("enumerate_configs enforces the cap") {
  const DisorderModel model = rankspec::site_potential_model({0, 1}, {0.5, 0.5});
  CHECK_THROWS_AS(rankspec::enumerate_configs(model, rankspec::make_region(1, {17})),
                  rankspec::CapExceeded);
}

TEST_CASE("sample_config determinism") {
  const DisorderModel degenerate = rankspec::site_potential_model({4.0}, {1.0});
  const Region region = rankspec::make_region(1, {8});
  for (std::uint64_t seed : {1ULL, 99ULL})
    CHECK(rankspec::sample_config(degenerate, region, seed).values ==
          std::vector<double>(8, 4.0));

  const DisorderModel site = rankspec::site_potential_model({2, 3}, {0.5, 0.5});
  CHECK(rankspec::sample_config(site, region, 7) == rankspec::sample_config(site, region, 7));
  CHECK(rankspec::sample_config(site, region, 7) != rankspec::sample_config(site, region, 8));
}

TEST_CASE("sampled Bernoulli frequency obeys the binomial bound") {
  const double p = 0.3;
  const DisorderModel bond = rankspec::bond_percolation_model(p);
  const std::int64_t edges = 100000;
  const Region region = rankspec::make_region(1, {edges + 1});
  const Configuration config = rankspec::sample_config(bond, region, 20240201);
  double open = 0.0;
  for (double v : config.values) open += (v == 0.0);
  const double freq = open / static_cast<double>(edges);
  CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(edges)));
}

TEST_CASE("model operators") {
  const Region r2 = rankspec::make_region(1, {2});

  const DisorderModel bond = rankspec::bond_percolation_model(0.5);
  const auto open = rankspec::model_operator(bond, Configuration{r2, rankspec::Carrier::Edges, {0.0}});
  CHECK(open(0, 0) == 1.0);
  CHECK(open(0, 1) == -1.0);
  const auto closed =
      rankspec::model_operator(bond, Configuration{r2, rankspec::Carrier::Edges, {1.0}});
  CHECK(closed(0, 0) == 0.0);
  CHECK(closed(0, 1) == 0.0);

  const DisorderModel site_perc = rankspec::site_percolation_model(0.5);
  const auto half_open =
      rankspec::model_operator(site_perc, Configuration{r2, rankspec::Carrier::Sites, {0.0, 1.0}});
  CHECK(half_open(0, 0) == 0.0);
  CHECK(half_open(0, 1) == 0.0);

  const DisorderModel site = rankspec::site_potential_model({2, 3}, {0.5, 0.5});
  const auto weighted =
      rankspec::model_operator(site, Configuration{r2, rankspec::Carrier::Sites, {2.0, 3.0}});
  CHECK(weighted(0, 0) == 2.0);
  CHECK(weighted(1, 1) == 3.0);
  CHECK(weighted(0, 1) == -1.0);

  CHECK_THROWS_AS(
      rankspec::model_operator(site, Configuration{r2, rankspec::Carrier::Edges, {0.0}}),
      std::invalid_argument);
}

TEST_CASE("percolation operators are positive semidefinite") {
  const Region region = rankspec::make_region(2, {3, 3});
  for (const DisorderModel& model :
       {rankspec::bond_percolation_model(0.4), rankspec::site_percolation_model(0.6)}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto op = rankspec::model_operator(model, rankspec::sample_config(model, region, seed));
      CHECK(rankspec::sym_spectrum(op).front() >= -1e-8);
    }
  }
}

TEST_CASE("shift_to_positive") {
  const auto [shifted, shift] =
      rankspec::shift_to_positive(rankspec::site_potential_model({2, 3}, {0.5, 0.5}), 1);
  CHECK(shift == 2.0);
  CHECK(shifted.values == std::vector<double>{4.0, 5.0});

  const auto [zero_shifted, zero_shift] =
      rankspec::shift_to_positive(rankspec::site_potential_model({0.0}, {1.0}), 1);
  CHECK(zero_shift == 2.0);
  CHECK(zero_shifted.values == std::vector<double>{2.0});

  CHECK_THROWS_AS(rankspec::shift_to_positive(rankspec::bond_percolation_model(0.5), 1),
                  std::invalid_argument);

  // shifted operators are positive semidefinite on sampled configurations
  const auto [model, s] =
      rankspec::shift_to_positive(rankspec::site_potential_model({-1, 0, 2}, {0.3, 0.3, 0.4}), 1);
  const Region region = rankspec::make_region(1, {9});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto op = rankspec::model_operator(model, rankspec::sample_config(model, region, seed));
    CHECK(rankspec::sym_spectrum(op).front() >= -1e-8);
  }
}

TEST_CASE("sampled configuration frequencies match enumeration probabilities") {
  const DisorderModel model = rankspec::site_potential_model({2, 3}, {0.4, 0.6});
  const Region region = rankspec::cube_region(1, 1);
  const auto configs = rankspec::enumerate_configs(model, region);
  std::vector<double> counts(configs.size(), 0.0);
  const int draws = 20000;
  for (int m = 0; m < draws; ++m) {
    const Configuration sample =
        rankspec::sample_config(model, region, rankspec::derive_seed(555, static_cast<std::uint64_t>(m)));
    for (std::size_t a = 0; a < configs.size(); ++a)
      if (configs[a].first.values == sample.values) {
        counts[a] += 1.0;
        break;
      }
  }
  for (std::size_t a = 0; a < configs.size(); ++a) {
    const double p = configs[a].second;
    CHECK(std::abs(counts[a] / draws - p) <= 3.0 * std::sqrt(p * (1 - p) / draws));
  }
}
