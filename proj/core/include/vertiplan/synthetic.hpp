#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vertiplan/grid.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/io.hpp"
#include "vertiplan/scoring.hpp"

namespace vertiplan {

// Seeded synthetic city: Gaussian-mixture trip demand with per-hotspot
// diurnal peaks, a sprinkle of sporadic uniform trips, transit stations and
// cost rasters. Stands in for proprietary flight logs.
struct SyntheticParams {
  int rows = 50;
  int cols = 50;
  double cell_size = 200.0;
  int time_bins = 24;
  double bin_duration = 3600.0;
  double time_origin = 1730419200.0;  // 2024-11-01T00:00:00Z
  GeoReference geo{120.10, 30.20};
  int hotspots = 10;
  std::int64_t trips = 12000;        // each trip yields an origin and a destination endpoint
  double sporadic_fraction = 0.08;   // trips drawn uniformly over the extent
  int stations = 12;
  std::uint64_t seed = 20241101;

  // Planning defaults bundled with the dataset.
  std::int64_t per_site_capacity = 20;
  std::int64_t site_budget = 80;
  double service_radius = 1000.0;
};

struct SyntheticEndpoint {
  double timestamp = 0.0;
  PlanarPoint position;
  EndpointKind kind = EndpointKind::origin;
};

struct SyntheticCity {
  SyntheticParams params;
  GridSpec spec;
  CapacityPolicy policy;
  std::vector<SyntheticEndpoint> endpoints;  // every generated endpoint, in generation order
  DemandTensor demand;                       // endpoints inside the extent and time window
  std::vector<PlanarPoint> points;           // positions of the gridded endpoints
  std::vector<PlanarPoint> station_positions;
  std::vector<Cell> stations;
  CostRasters rasters;
};

SyntheticCity generate_synthetic_city(const SyntheticParams& params = {});

// Writes od.csv, stations.csv, obstacle.csv, population.csv, rent.csv and a
// config.json referencing them into `dir`.
void write_synthetic_bundle(const SyntheticCity& city, const std::filesystem::path& dir);

// Shifts every center by (dx, dy) meters.
std::vector<PlanarPoint> displace_centers(std::vector<PlanarPoint> centers, double dx, double dy);

// Optimizer benchmark: k-means placement of site_budget sites shifted off the
// demand by a fixed displacement, to give the optimizer something to repair.
struct DisplacedInit {
  double dx = 1600.0;
  double dy = -1200.0;
  std::uint64_t seed = 7;
};

SupplyMatrix displaced_kmeans_supply(const SyntheticCity& city, const DisplacedInit& init = {});

}  // namespace vertiplan
