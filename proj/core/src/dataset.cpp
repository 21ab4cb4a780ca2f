#include "vertiplan/dataset.hpp"

#include "vertiplan/error.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/optimizer.hpp"

namespace vertiplan {

DemandArchive load_dataset_demand(const AppConfig& config, std::vector<std::string>& warnings) {
  const auto& paths = config.dataset;
  if (!paths.demand_archive.empty()) {
    auto archive = load_demand_archive(paths.demand_archive);
    if (archive.grid != config.grid) {
      throw ValidationError("demand archive " + paths.demand_archive.string() + " was built for a different grid");
    }
    return archive;
  }
  if (paths.od_csv.empty()) throw InputError("dataset '" + paths.name + "' names neither od_csv nor demand_archive");
  auto loaded = load_od_csv(paths.od_csv, config.grid, config.geo);
  warnings.insert(warnings.end(), loaded.warnings.begin(), loaded.warnings.end());
  return {config.grid, std::move(loaded.demand), std::move(loaded.points)};
}

CostRasters load_dataset_rasters(const AppConfig& config) {
  const auto& spec = config.grid;
  auto load = [&](const std::filesystem::path& path) {
    return path.empty() ? RealMatrix(spec.rows, spec.cols, 0.0) : load_raster_csv(path, spec);
  };
  return {load(config.dataset.obstacle_csv), load(config.dataset.population_csv), load(config.dataset.rent_csv)};
}

std::vector<Cell> load_dataset_stations(const AppConfig& config) {
  if (config.dataset.stations_csv.empty()) {
    throw InputError("dataset '" + config.dataset.name + "' has no stations_csv");
  }
  return station_cells(load_stations_csv(config.dataset.stations_csv, config.grid, config.geo).stations);
}

VertiportLayout load_existing_layout(const AppConfig& config) {
  if (config.dataset.existing_plan.empty()) {
    return {CountMatrix(config.grid.rows, config.grid.cols, 0)};
  }
  const auto doc = load_plan(config.dataset.existing_plan);
  if (doc.grid.rows != config.grid.rows || doc.grid.cols != config.grid.cols) {
    throw ValidationError("existing plan grid does not match the configured grid");
  }
  return doc.layout;
}

DemandTensor supply_as_demand(const SupplyMatrix& supply) {
  return DemandTensor::from_slice(supply.values);
}

DemandTensor distilled_demand(const AppConfig& config, const DemandArchive& demand) {
  if (!config.dataset.distilled_plan.empty()) {
    const auto doc = load_plan(config.dataset.distilled_plan);
    if (doc.grid.rows != config.grid.rows || doc.grid.cols != config.grid.cols) {
      throw ValidationError("distilled plan grid does not match the configured grid");
    }
    return supply_as_demand(doc.supply());
  }
  auto strategy = config.init;
  strategy.target_sites = static_cast<int>(config.policy.site_budget);
  if (demand.points.size() < static_cast<std::size_t>(strategy.target_sites + strategy.over_cluster)) {
    throw InputError("too few demand points to distill a " + std::to_string(strategy.target_sites) + "-site network");
  }
  const auto init = initialize_layout(demand.points, strategy, config.grid);
  auto optimizer = config.optimizer;
  optimizer.mode = OptimizerMode::relocate;
  const auto result = optimize(demand.demand, supply_from_layout(init.layout.layout, config.policy), config.grid,
                               config.policy, optimizer);
  return supply_as_demand(result.best_supply);
}

std::shared_ptr<const SessionInputs> build_session_inputs(const AppConfig& config, const DemandArchive& demand) {
  auto inputs = std::make_shared<SessionInputs>();
  inputs->spec = config.grid;
  inputs->policy = config.policy;
  inputs->scoring = config.scoring;
  inputs->distilled_demand = distilled_demand(config, demand);
  inputs->initial_plan = load_existing_layout(config);
  inputs->stations = load_dataset_stations(config);
  inputs->rasters = load_dataset_rasters(config);
  inputs->validate();
  return inputs;
}

Dataset load_dataset(const AppConfig& config) {
  Dataset ds;
  ds.config = config;
  ds.demand = load_dataset_demand(config, ds.warnings);
  ds.inputs = build_session_inputs(config, ds.demand);
  return ds;
}

}  // namespace vertiplan
