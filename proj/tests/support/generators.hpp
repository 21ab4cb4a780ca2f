#pragma once

// Seeded random instances for property tests.

#include <cstdint>
#include <vector>

#include "vertiplan/grid.hpp"
#include "vertiplan/random.hpp"

namespace gen {

using namespace vertiplan;

struct Instance {
  GridSpec spec;
  CapacityPolicy policy;
  DemandTensor demand;
  SupplyMatrix supply;
};

struct Limits {
  int max_rows = 20;
  int max_cols = 20;
  int max_bins = 8;
  std::int64_t max_demand = 30;
  std::int64_t max_sites = 3;
  std::int64_t max_capacity = 20;
  double site_probability = 0.3;
};

inline int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))); }

inline double pick_radius(Rng& rng, double cell_size) {
  static constexpr double kFactors[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.3, 3.0, 5.0};
  return kFactors[rng.index(std::size(kFactors))] * cell_size;
}

inline Instance instance(Rng& rng, const Limits& lim = {}) {
  Instance in;
  in.spec.rows = uniform_int(rng, 1, lim.max_rows);
  in.spec.cols = uniform_int(rng, 1, lim.max_cols);
  in.spec.time_bins = uniform_int(rng, 1, lim.max_bins);
  in.spec.cell_size = 200.0;
  in.policy.per_site_capacity = uniform_int(rng, 1, static_cast<int>(lim.max_capacity));
  in.policy.service_radius = pick_radius(rng, in.spec.cell_size);
  CountTensor d(in.spec.time_bins, in.spec.rows, in.spec.cols, 0);
  for (auto& v : d.flat()) v = uniform_int(rng, 0, static_cast<int>(lim.max_demand)) * (rng.uniform() < 0.6 ? 1 : 0);
  in.demand = DemandTensor(std::move(d));
  in.supply = SupplyMatrix::zeros(in.spec);
  std::int64_t sites = 0;
  for (auto& v : in.supply.values.flat()) {
    if (rng.uniform() < lim.site_probability) {
      const auto n = uniform_int(rng, 1, static_cast<int>(lim.max_sites));
      v = n * in.policy.per_site_capacity;
      sites += n;
    }
  }
  in.policy.site_budget = sites > 0 ? sites : 1;
  return in;
}

inline CountMatrix slice(const DemandTensor& d, int t) { return d.values().slice_matrix(t); }

}  // namespace gen
