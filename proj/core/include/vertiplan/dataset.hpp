#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vertiplan/io.hpp"
#include "vertiplan/recommender.hpp"

namespace vertiplan {

// Demand from the bundle's archive when present, otherwise gridded from the
// OD CSV. Skip counts land in `warnings`.
DemandArchive load_dataset_demand(const AppConfig& config, std::vector<std::string>& warnings);

// Missing rasters load as zeros, which the cost strategy treats as flat.
CostRasters load_dataset_rasters(const AppConfig& config);

std::vector<Cell> load_dataset_stations(const AppConfig& config);

// Existing sites sessions start from; empty when the bundle names none.
VertiportLayout load_existing_layout(const AppConfig& config);

// Optimized supply used as the static T=1 demand for scoring. Read from the
// bundle's distilled plan, or computed by clustering site_budget sites and
// running the configured optimizer.
DemandTensor distilled_demand(const AppConfig& config, const DemandArchive& demand);

// Reinterprets a supply matrix as a single-bin demand tensor.
DemandTensor supply_as_demand(const SupplyMatrix& supply);

std::shared_ptr<const SessionInputs> build_session_inputs(const AppConfig& config, const DemandArchive& demand);

// A loaded bundle: configuration plus everything derived from it once.
struct Dataset {
  AppConfig config;
  DemandArchive demand;
  std::shared_ptr<const SessionInputs> inputs;
  std::vector<std::string> warnings;
};

Dataset load_dataset(const AppConfig& config);

}  // namespace vertiplan
