#include "vertiplan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vertiplan/matching.hpp"
#include "vertiplan/optimizer.hpp"

namespace vertiplan {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::demand: return "demand";
    case Strategy::coverage: return "coverage";
    case Strategy::connectivity: return "connectivity";
    case Strategy::cost: return "cost";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  for (auto s : kStrategies) {
    if (to_string(s) == name) return s;
  }
  throw InputError("unknown strategy '" + name + "'");
}

RealMatrix normalize(const RealMatrix& matrix) {
  RealMatrix out(matrix.rows(), matrix.cols(), 0.0);
  if (matrix.size() == 0) return out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : matrix.flat()) {
    if (!std::isfinite(v)) throw InputError("cannot normalize a matrix with non-finite entries");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) return out;
  const double span = hi - lo;
  for (std::size_t k = 0; k < matrix.size(); ++k) out[k] = (matrix[k] - lo) / span;
  return out;
}

ScoreMatrix score_demand(const SupplyMatrix& user_supply, const DemandTensor& distilled_demand,
                         const GridSpec& spec, double radius, int kernel_radius) {
  if (distilled_demand.time_bins() != 1) throw InputError("distilled demand must have exactly one time bin");
  GridSpec single = spec;
  single.time_bins = 1;
  const auto matched = match(distilled_demand, user_supply, single, radius);
  return {Strategy::demand, normalize(aggregate_and_smooth(matched.final_residual_demand, kernel_radius))};
}

RealMatrix coverage_counts(const SupplyMatrix& user_supply, const GridSpec& spec, double radius) {
  if (user_supply.rows() != spec.rows || user_supply.cols() != spec.cols) {
    throw InputError("supply shape does not match grid");
  }
  const auto stencil = neighborhood_stencil(spec, radius);
  Matrix<char> covered(spec.rows, spec.cols, 0);
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      if (user_supply(i, j) <= 0) continue;
      for (const auto& off : stencil) {
        const Cell c{i + off.drow, j + off.dcol};
        if (spec.contains(c)) covered(c.row, c.col) = 1;
      }
    }
  }
  RealMatrix counts(spec.rows, spec.cols, 0.0);
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      int uncovered = 0;
      for (const auto& off : stencil) {
        const Cell c{i + off.drow, j + off.dcol};
        if (spec.contains(c) && !covered(c.row, c.col)) ++uncovered;
      }
      counts(i, j) = uncovered;
    }
  }
  return counts;
}

ScoreMatrix score_coverage(const SupplyMatrix& user_supply, const GridSpec& spec, double radius) {
  return {Strategy::coverage, normalize(coverage_counts(user_supply, spec, radius))};
}

RealMatrix min_station_travel_time(const GridSpec& spec, std::span<const Cell> stations, double travel_speed) {
  if (stations.empty()) throw InputError("connectivity scoring needs at least one station");
  if (!(travel_speed > 0.0) || !std::isfinite(travel_speed)) throw InputError("travel_speed must be positive");
  for (const auto& s : stations) {
    if (!spec.contains(s)) throw InputError("station cell " + to_string(s) + " is outside the grid");
  }
  RealMatrix out(spec.rows, spec.cols, 0.0);
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : stations) best = std::min(best, spec.center_distance({i, j}, s));
      out(i, j) = best / travel_speed;
    }
  }
  return out;
}

ScoreMatrix score_connectivity(const GridSpec& spec, std::span<const Cell> stations, double travel_speed) {
  const auto times = min_station_travel_time(spec, stations, travel_speed);
  const double worst = *std::max_element(times.flat().begin(), times.flat().end());
  RealMatrix raw(spec.rows, spec.cols, 0.0);
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = worst - times[k];
  return {Strategy::connectivity, normalize(raw)};
}

ScoreMatrix score_cost(const CostRasters& rasters) {
  if (!rasters.obstacle_density.same_shape(rasters.population_density) ||
      !rasters.obstacle_density.same_shape(rasters.rent)) {
    throw InputError("cost rasters must share one shape");
  }
  const auto a = normalize(rasters.obstacle_density);
  const auto b = normalize(rasters.population_density);
  const auto c = normalize(rasters.rent);
  RealMatrix composite(a.rows(), a.cols(), 0.0);
  for (std::size_t k = 0; k < composite.size(); ++k) composite[k] = a[k] + b[k] + c[k];
  return {Strategy::cost, normalize(composite)};
}

}  // namespace vertiplan
