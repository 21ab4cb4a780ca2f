#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vertiplan/grid.hpp"

namespace vertiplan {

enum class Strategy { demand = 0, coverage = 1, connectivity = 2, cost = 3 };

inline constexpr std::array<Strategy, 4> kStrategies{Strategy::demand, Strategy::coverage,
                                                     Strategy::connectivity, Strategy::cost};

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct ScoreMatrix {
  Strategy strategy = Strategy::demand;
  RealMatrix values;  // normalized to [0, 1]
};

struct CostRasters {
  RealMatrix obstacle_density;
  RealMatrix population_density;
  RealMatrix rent;
};

struct ScoringParams {
  double travel_speed = 15.0;  // m/s, straight-line proxy for T_{a,b}
  int kernel_radius = 5;       // smoothing for the demand strategy
};

// Min-max rescale to [0, 1]; a constant matrix maps to zeros. Throws
// InputError on non-finite entries.
RealMatrix normalize(const RealMatrix& matrix);

// Unmet demand left by the user's supply against the distilled T=1 demand,
// smoothed with the all-ones kernel and normalized.
ScoreMatrix score_demand(const SupplyMatrix& user_supply, const DemandTensor& distilled_demand,
                         const GridSpec& spec, double radius, int kernel_radius);

// Number of uncovered cells within `radius` of each candidate, normalized. A
// cell is covered when some cell with supply > 0 lies within `radius`.
ScoreMatrix score_coverage(const SupplyMatrix& user_supply, const GridSpec& spec, double radius);

// Raw coverage counts before normalization (exposed for monotonicity checks).
RealMatrix coverage_counts(const SupplyMatrix& user_supply, const GridSpec& spec, double radius);

// Per-cell minimum straight-line travel time to any station (seconds).
RealMatrix min_station_travel_time(const GridSpec& spec, std::span<const Cell> stations, double travel_speed);

// Proximity reward: (max over grid of the min travel time) minus the cell's own
// min travel time, normalized. Cells holding a station score 1.
ScoreMatrix score_connectivity(const GridSpec& spec, std::span<const Cell> stations, double travel_speed);

// normalize(normalize(obstacle) + normalize(population) + normalize(rent)).
// High values mean expensive; the synthesis layer gives this a negative weight.
ScoreMatrix score_cost(const CostRasters& rasters);

}  // namespace vertiplan
