#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vertiplan/grid.hpp"

namespace vertiplan {

// Residuals of one time bin after same-cell clearance. A cell never holds both
// residual demand and residual supply.
struct StageResult {
  CountMatrix residual_demand;
  CountMatrix residual_supply;
};

// Demand units from `origin` served by capacity at `server`.
struct Flow {
  Cell origin;
  Cell server;
  std::int64_t units = 0;
  friend bool operator==(const Flow&, const Flow&) = default;
};

struct RedistributionResult {
  std::vector<Flow> flows;
  CountMatrix final_residual_demand;  // at origin cells
  CountMatrix final_residual_supply;
};

struct MatchOptions {
  bool record_flows = false;
};

struct MatchResult {
  CountTensor final_residual_demand;  // FRD, T×M×N, expressed at origin cells
  CountTensor final_residual_supply;  // FRS, T×M×N
  // Per-bin overflow flows; populated only with MatchOptions::record_flows.
  std::optional<std::vector<std::vector<Flow>>> served_flows;
};

// Stage 1: RD = max(D_t - S, 0), RS = max(S - D_t, 0).
StageResult local_clearance(const CountMatrix& demand_slice, const SupplyMatrix& supply);

// Stages 2 and 3. Origins are visited in row-major order; each one draws from
// in-range residual supply nearest first (row-major among equal distances)
// until its residual demand or the reachable supply is exhausted. Unserved
// demand stays at its origin cell.
RedistributionResult redistribute(const StageResult& stage1, const GridSpec& spec, double radius,
                                  bool record_flows = true);

// Runs clearance and redistribution independently for every time bin; supply
// renews at each bin.
MatchResult match(const DemandTensor& demand, const SupplyMatrix& supply, const GridSpec& spec,
                  double radius, MatchOptions options = {});

// Σ_t Σ_i Σ_j FRD.
std::int64_t total_loss(const MatchResult& result);

}  // namespace vertiplan
