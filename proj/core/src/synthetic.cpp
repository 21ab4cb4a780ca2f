#include "vertiplan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vertiplan/random.hpp"

namespace vertiplan {

namespace {

struct Hotspot {
  PlanarPoint center;
  double sigma = 500.0;
  double weight = 1.0;
  std::vector<double> hourly;  // cumulative temporal profile over bins
};

struct Bump {
  PlanarPoint center;
  double sigma;
  double height;
};

std::size_t draw_cumulative(Rng& rng, const std::vector<double>& cumulative) {
  const double target = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

PlanarPoint draw_inside(Rng& rng, const Hotspot& h, double width, double height) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const PlanarPoint p{rng.normal(h.center.x, h.sigma), rng.normal(h.center.y, h.sigma)};
    if (p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height) return p;
  }
  return h.center;
}

double bump_field(const std::vector<Bump>& bumps, PlanarPoint p) {
  double v = 0.0;
  for (const auto& b : bumps) {
    const double dx = p.x - b.center.x, dy = p.y - b.center.y;
    v += b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
  }
  return v;
}

}  // namespace

SyntheticCity generate_synthetic_city(const SyntheticParams& params) {
  SyntheticCity city;
  city.params = params;
  city.spec.rows = params.rows;
  city.spec.cols = params.cols;
  city.spec.cell_size = params.cell_size;
  city.spec.origin = {0.0, 0.0};
  city.spec.time_bins = params.time_bins;
  city.spec.bin_duration = params.bin_duration;
  city.spec.time_origin = params.time_origin;
  city.spec.validate();
  city.policy = {params.per_site_capacity, params.site_budget, params.service_radius};
  city.policy.validate();
  if (params.hotspots < 1 || params.trips < 0 || params.stations < 1) {
    throw InputError("synthetic city needs hotspots, stations and a non-negative trip count");
  }

  Rng rng(params.seed);
  const double width = params.cols * params.cell_size;
  const double height = params.rows * params.cell_size;

  std::vector<Hotspot> hotspots(static_cast<std::size_t>(params.hotspots));
  std::vector<double> hotspot_cdf;
  double acc = 0.0;
  for (auto& h : hotspots) {
    h.center = {rng.uniform(0.1, 0.9) * width, rng.uniform(0.1, 0.9) * height};
    h.sigma = rng.uniform(250.0, 800.0);
    h.weight = rng.uniform(0.5, 2.0);
    const double peak = rng.uniform(0.25, 0.9) * params.time_bins;
    const double spread = std::max(1.0, rng.uniform(0.06, 0.16) * params.time_bins);
    double cum = 0.0;
    for (int t = 0; t < params.time_bins; ++t) {
      const double z = (t + 0.5 - peak) / spread;
      cum += 0.15 + std::exp(-0.5 * z * z);
      h.hourly.push_back(cum);
    }
    acc += h.weight;
    hotspot_cdf.push_back(acc);
  }

  const double window = params.time_bins * params.bin_duration;
  city.endpoints.reserve(static_cast<std::size_t>(params.trips) * 2);
  for (std::int64_t trip = 0; trip < params.trips; ++trip) {
    PlanarPoint from, to;
    double depart = 0.0;
    if (rng.uniform() < params.sporadic_fraction) {
      from = {rng.uniform() * width, rng.uniform() * height};
      to = {rng.uniform() * width, rng.uniform() * height};
      depart = rng.uniform() * window;
    } else {
      const auto& origin = hotspots[draw_cumulative(rng, hotspot_cdf)];
      const auto& dest = hotspots[draw_cumulative(rng, hotspot_cdf)];
      from = draw_inside(rng, origin, width, height);
      to = draw_inside(rng, dest, width, height);
      const auto bin = draw_cumulative(rng, origin.hourly);
      depart = (static_cast<double>(bin) + rng.uniform()) * params.bin_duration;
    }
    const double arrive = depart + rng.uniform(600.0, 1800.0);
    city.endpoints.push_back({std::floor(params.time_origin + depart), from, EndpointKind::origin});
    city.endpoints.push_back({std::floor(params.time_origin + arrive), to, EndpointKind::destination});
  }

  city.demand = DemandTensor::zeros(city.spec);
  for (const auto& e : city.endpoints) {
    const auto cell = city.spec.cell_of(e.position);
    const auto bin = city.spec.bin_of(e.timestamp);
    if (!cell || !bin) continue;
    city.demand.add(*bin, *cell);
    city.points.push_back(e.position);
  }

  // Half the stations sit near hotspots, the rest anywhere.
  for (int s = 0; s < params.stations; ++s) {
    PlanarPoint p;
    if (s % 2 == 0) {
      const auto& h = hotspots[static_cast<std::size_t>(s / 2) % hotspots.size()];
      p = {std::clamp(rng.normal(h.center.x, 400.0), 0.0, width - 1e-6),
           std::clamp(rng.normal(h.center.y, 400.0), 0.0, height - 1e-6)};
    } else {
      p = {rng.uniform() * width, rng.uniform() * height};
    }
    city.station_positions.push_back(p);
    city.stations.push_back(*city.spec.cell_of(p));
  }

  std::vector<Bump> people, noise, terrain;
  for (const auto& h : hotspots) people.push_back({h.center, 2.0 * h.sigma, h.weight});
  for (int b = 0; b < 6; ++b) {
    noise.push_back({{rng.uniform() * width, rng.uniform() * height}, rng.uniform(500.0, 1500.0), rng.uniform(0.2, 1.0)});
  }
  for (int b = 0; b < 4; ++b) {
    terrain.push_back(
        {{rng.uniform() * width, rng.uniform() * height}, rng.uniform(800.0, 2000.0), rng.uniform(0.5, 1.5)});
  }
  RealMatrix pop_raw(params.rows, params.cols, 0.0);
  for (int i = 0; i < params.rows; ++i) {
    for (int j = 0; j < params.cols; ++j) pop_raw(i, j) = bump_field(people, city.spec.cell_center({i, j}));
  }
  const auto pop_norm = normalize(pop_raw);
  city.rasters.population_density = RealMatrix(params.rows, params.cols, 0.0);
  city.rasters.rent = RealMatrix(params.rows, params.cols, 0.0);
  city.rasters.obstacle_density = RealMatrix(params.rows, params.cols, 0.0);
  for (int i = 0; i < params.rows; ++i) {
    for (int j = 0; j < params.cols; ++j) {
      const auto c = city.spec.cell_center({i, j});
      const double pn = pop_norm(i, j);
      city.rasters.population_density(i, j) = std::round(2000.0 + 28000.0 * pn);
      city.rasters.rent(i, j) = std::round(20.0 + 60.0 * pn + 25.0 * bump_field(noise, c));
      city.rasters.obstacle_density(i, j) = std::round(1000.0 * (bump_field(terrain, c) + 0.3 * pn)) / 1000.0;
    }
  }
  return city;
}

void write_synthetic_bundle(const SyntheticCity& city, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const GeoReference& geo = city.params.geo;
  {
    std::string out = "timestamp,lon,lat,kind\n";
    char buf[128];
    for (const auto& e : city.endpoints) {
      double lon = 0.0, lat = 0.0;
      geo.unproject(e.position, lon, lat);
      std::snprintf(buf, sizeof buf, "%.0f,%.10f,%.10f,%s\n", e.timestamp, lon, lat,
                    e.kind == EndpointKind::origin ? "origin" : "destination");
      out += buf;
    }
    write_text_file(dir / "od.csv", out);
  }
  {
    std::string out = "name,lon,lat\n";
    char buf[128];
    for (std::size_t s = 0; s < city.station_positions.size(); ++s) {
      double lon = 0.0, lat = 0.0;
      geo.unproject(city.station_positions[s], lon, lat);
      std::snprintf(buf, sizeof buf, "station-%02zu,%.10f,%.10f\n", s + 1, lon, lat);
      out += buf;
    }
    write_text_file(dir / "stations.csv", out);
  }
  write_matrix_csv(dir / "obstacle.csv", city.rasters.obstacle_density);
  write_matrix_csv(dir / "population.csv", city.rasters.population_density);
  write_matrix_csv(dir / "rent.csv", city.rasters.rent);

  AppConfig cfg;
  cfg.grid = city.spec;
  cfg.geo = geo;
  cfg.policy = city.policy;
  cfg.optimizer = OptimizerConfig::defaults_for(cfg.grid, cfg.policy);
  cfg.scoring.kernel_radius = cfg.optimizer.kernel_radius;
  cfg.recommender.min_separation = cfg.policy.service_radius;
  cfg.init.target_sites = static_cast<int>(cfg.policy.site_budget);
  cfg.init.seed = city.params.seed;
  cfg.dataset.name = "synthetic";
  cfg.dataset.od_csv = "od.csv";
  cfg.dataset.obstacle_csv = "obstacle.csv";
  cfg.dataset.population_csv = "population.csv";
  cfg.dataset.rent_csv = "rent.csv";
  cfg.dataset.stations_csv = "stations.csv";
  write_text_file(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
}

std::vector<PlanarPoint> displace_centers(std::vector<PlanarPoint> centers, double dx, double dy) {
  for (auto& c : centers) {
    c.x += dx;
    c.y += dy;
  }
  return centers;
}

SupplyMatrix displaced_kmeans_supply(const SyntheticCity& city, const DisplacedInit& init) {
  const auto clusters =
      cluster(city.points, static_cast<int>(city.policy.site_budget), ClusterAlgorithm::kmeans, init.seed);
  const auto centers = displace_centers(clusters.centers, init.dx, init.dy);
  return supply_from_layout(layout_from_centers(centers, city.spec).layout, city.policy);
}

}  // namespace vertiplan
