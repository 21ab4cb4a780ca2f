#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "vertiplan/scoring.hpp"

using namespace vertiplan;

namespace {

GridSpec grid(int rows, int cols, double cell = 100.0) {
  GridSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.cell_size = cell;
  return spec;
}

RealMatrix random_real(Rng& rng, int rows, int cols, int lo, int hi) {
  RealMatrix m(rows, cols, 0.0);
  for (auto& v : m.flat()) v = gen::uniform_int(rng, lo, hi);
  return m;
}

SupplyMatrix random_supply(Rng& rng, const GridSpec& spec, double p) {
  SupplyMatrix s = SupplyMatrix::zeros(spec);
  for (auto& v : s.values.flat()) v = rng.uniform() < p ? 20 : 0;
  return s;
}

// Uncovered cells within `radius`, straight from the definition.
RealMatrix coverage_oracle(const SupplyMatrix& s, const GridSpec& spec, double radius) {
  RealMatrix out(spec.rows, spec.cols, 0.0);
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      int count = 0;
      for (const auto& c : oracle::cells_within(spec, {i, j}, radius)) {
        bool covered = false;
        for (int a = 0; a < spec.rows && !covered; ++a) {
          for (int b = 0; b < spec.cols && !covered; ++b) {
            covered = s(a, b) > 0 && oracle::in_range(spec, {a, b}, c, radius);
          }
        }
        if (!covered) ++count;
      }
      out(i, j) = count;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("normalize") {
  CHECK(normalize(RealMatrix{{1, 3}, {5, 5}}) == RealMatrix{{0, 0.5}, {1, 1}});
  CHECK(normalize(RealMatrix{{-2, 2}}) == RealMatrix{{0, 1}});
  CHECK(normalize(RealMatrix{{7, 7}, {7, 7}}) == RealMatrix{{0, 0}, {0, 0}});
  CHECK(normalize(RealMatrix(0, 0)).size() == 0);
  CHECK_THROWS_AS(normalize(RealMatrix{{0, std::nan("")}}), InputError);
  CHECK_THROWS_AS(normalize(RealMatrix{{0, std::numeric_limits<double>::infinity()}}), InputError);
}

TEST_CASE("normalize ignores positive affine maps") {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_real(rng, 1 + gen::uniform_int(rng, 0, 6), 1 + gen::uniform_int(rng, 0, 6), -50, 50);
    const double a = gen::uniform_int(rng, 1, 9);
    const double b = gen::uniform_int(rng, -100, 100);
    RealMatrix mapped = m;
    for (auto& v : mapped.flat()) v = a * v + b;
    const auto x = normalize(m);
    const auto y = normalize(mapped);
    for (std::size_t k = 0; k < x.size(); ++k) {
      CHECK(y[k] == doctest::Approx(x[k]).epsilon(1e-12));
      CHECK(x[k] >= 0.0);
      CHECK(x[k] <= 1.0);
    }
  }
}

TEST_CASE("demand score") {
  const auto spec = grid(1, 3);
  const auto distilled = DemandTensor::from_slice(CountMatrix{{0, 0, 5}});
  const auto none = SupplyMatrix::zeros(spec);

  CHECK(score_demand(none, distilled, spec, 100.0, 0).values == RealMatrix{{0, 0, 1}});
  CHECK(score_demand(none, distilled, spec, 100.0, 1).values == RealMatrix{{0, 1, 1}});

  const SupplyMatrix served{CountMatrix{{0, 20, 0}}};
  CHECK(score_demand(served, distilled, spec, 100.0, 0).values == RealMatrix{{0, 0, 0}});
  // Out of range when the radius is below one cell.
  CHECK(score_demand(served, distilled, spec, 50.0, 0).values == RealMatrix{{0, 0, 1}});

  DemandTensor two_bins(2, 1, 3);
  CHECK_THROWS_AS(score_demand(none, two_bins, spec, 100.0, 0), InputError);
}

TEST_CASE("coverage counts") {
  SUBCASE("empty plan, radius of one cell") {
    const auto spec = grid(3, 3);
    const auto raw = coverage_counts(SupplyMatrix::zeros(spec), spec, 100.0);
    CHECK(raw == RealMatrix{{3, 4, 3}, {4, 5, 4}, {3, 4, 3}});
    CHECK(score_coverage(SupplyMatrix::zeros(spec), spec, 100.0).values ==
          RealMatrix{{0, 0.5, 0}, {0.5, 1, 0.5}, {0, 0.5, 0}});
  }
  SUBCASE("radius spanning the grid") {
    const auto spec = grid(9, 9);
    const auto raw = coverage_counts(SupplyMatrix::zeros(spec), spec, 1e6);
    for (double v : raw.flat()) CHECK(v == 81.0);
    const auto score = score_coverage(SupplyMatrix::zeros(spec), spec, 1e6);
    for (double v : score.values.flat()) CHECK(v == 0.0);
  }
  SUBCASE("a site covers its neighborhood") {
    const auto spec = grid(1, 5);
    SupplyMatrix s = SupplyMatrix::zeros(spec);
    s.values(0, 0) = 20;
    CHECK(coverage_counts(s, spec, 100.0) == RealMatrix{{0, 1, 2, 3, 2}});
  }
  CHECK_THROWS_AS(coverage_counts(SupplyMatrix{CountMatrix(2, 2, 0)}, grid(3, 3), 100.0), InputError);
}

TEST_CASE("coverage counts agree with a direct count") {
  Rng rng(52);
  for (int trial = 0; trial < 60; ++trial) {
    const auto spec = grid(gen::uniform_int(rng, 1, 8), gen::uniform_int(rng, 1, 8));
    const double radius = gen::pick_radius(rng, spec.cell_size);
    const auto s = random_supply(rng, spec, 0.15);
    CHECK(coverage_counts(s, spec, radius) == coverage_oracle(s, spec, radius));
  }
}

TEST_CASE("adding a site never raises a coverage count") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = grid(gen::uniform_int(rng, 1, 10), gen::uniform_int(rng, 1, 10));
    const double radius = gen::pick_radius(rng, spec.cell_size);
    auto s = random_supply(rng, spec, 0.1);
    const auto before = coverage_counts(s, spec, radius);
    const Cell added{gen::uniform_int(rng, 0, spec.rows - 1), gen::uniform_int(rng, 0, spec.cols - 1)};
    s.values(added.row, added.col) += 20;
    const auto after = coverage_counts(s, spec, radius);
    for (std::size_t k = 0; k < after.size(); ++k) CHECK(after[k] <= before[k]);
  }
}

TEST_CASE("connectivity score") {
  const auto spec = grid(1, 5);
  const std::vector<Cell> stations{{0, 0}};
  const auto times = min_station_travel_time(spec, stations, 10.0);
  CHECK(times == RealMatrix{{0, 10, 20, 30, 40}});
  CHECK(score_connectivity(spec, stations, 10.0).values == RealMatrix{{1, 0.75, 0.5, 0.25, 0}});

  const std::vector<Cell> both_ends{{0, 0}, {0, 4}};
  CHECK(score_connectivity(spec, both_ends, 10.0).values == RealMatrix{{1, 0.5, 0, 0.5, 1}});

  // Every cell a station: flat.
  const auto one = grid(1, 1);
  const std::vector<Cell> only{{0, 0}};
  CHECK(score_connectivity(one, only, 10.0).values == RealMatrix{{0}});

  CHECK_THROWS_AS(min_station_travel_time(spec, {}, 10.0), InputError);
  CHECK_THROWS_AS(min_station_travel_time(spec, stations, 0.0), InputError);
  const std::vector<Cell> outside{{1, 0}};
  CHECK_THROWS_AS(min_station_travel_time(spec, outside, 10.0), InputError);
}

TEST_CASE("station cells score one and travel speed does not matter") {
  Rng rng(54);
  for (int trial = 0; trial < 80; ++trial) {
    const auto spec = grid(gen::uniform_int(rng, 2, 12), gen::uniform_int(rng, 2, 12), 150.0);
    std::vector<Cell> stations(static_cast<std::size_t>(gen::uniform_int(rng, 1, 4)));
    for (auto& s : stations) s = {gen::uniform_int(rng, 0, spec.rows - 1), gen::uniform_int(rng, 0, spec.cols - 1)};
    const auto base = score_connectivity(spec, stations, 15.0).values;
    for (const auto& s : stations) CHECK(base(s.row, s.col) == 1.0);
    // Power-of-two ratios keep the arithmetic exact.
    CHECK(score_connectivity(spec, stations, 30.0).values == base);
    CHECK(score_connectivity(spec, stations, 3.75).values == base);
    const auto odd = score_connectivity(spec, stations, 7.0).values;
    for (std::size_t k = 0; k < odd.size(); ++k) CHECK(odd[k] == doctest::Approx(base[k]).epsilon(1e-12));
  }
}

TEST_CASE("summed connectivity ranks site sets like total travel time") {
  Rng rng(55);
  const auto spec = grid(12, 12, 200.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Cell> stations(static_cast<std::size_t>(gen::uniform_int(rng, 1, 5)));
    for (auto& s : stations) s = {gen::uniform_int(rng, 0, 11), gen::uniform_int(rng, 0, 11)};
    const auto score = score_connectivity(spec, stations, 15.0).values;
    auto random_sites = [&] {
      std::vector<Cell> sites(6);
      for (auto& s : sites) s = {gen::uniform_int(rng, 0, 11), gen::uniform_int(rng, 0, 11)};
      return sites;
    };
    const auto a = random_sites();
    const auto b = random_sites();
    double sa = 0.0, sb = 0.0;
    for (const auto& c : a) sa += score(c.row, c.col);
    for (const auto& c : b) sb += score(c.row, c.col);
    const double ta = oracle::station_travel_sum(spec, a, stations, 15.0);
    const double tb = oracle::station_travel_sum(spec, b, stations, 15.0);
    if (std::abs(ta - tb) < 1e-9) {
      CHECK(sa == doctest::Approx(sb).epsilon(1e-9));
    } else {
      CHECK((sa > sb) == (ta < tb));
    }
  }
}

TEST_CASE("cost score") {
  const RealMatrix up{{0, 1}};
  const RealMatrix down{{1, 0}};
  const RealMatrix flat{{0, 0}};
  CHECK(score_cost({up, up, up}).values == RealMatrix{{0, 1}});
  CHECK(score_cost({up, down, flat}).values == RealMatrix{{0, 0}});
  CHECK(score_cost({up, flat, RealMatrix{{5, 9}}}).values == RealMatrix{{0, 1}});
  CHECK(score_cost({RealMatrix{{0, 1, 2}}, RealMatrix{{0, 0, 0}}, RealMatrix{{3, 3, 3}}}).values ==
        RealMatrix{{0, 0.5, 1}});
  CHECK_THROWS_AS(score_cost({up, up, RealMatrix{{0}, {1}}}), InputError);
}

TEST_CASE("strategy names round trip") {
  for (auto s : kStrategies) CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("beauty"), InputError);
}
