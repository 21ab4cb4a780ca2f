#include "vertiplan/matching.hpp"

#include <algorithm>

namespace vertiplan {
namespace {

StageResult clear_slice(std::span<const std::int64_t> demand, const SupplyMatrix& supply) {
  StageResult out{CountMatrix(supply.rows(), supply.cols(), 0), CountMatrix(supply.rows(), supply.cols(), 0)};
  for (std::size_t k = 0; k < demand.size(); ++k) {
    const auto d = demand[k];
    const auto s = supply.values[k];
    out.residual_demand[k] = std::max<std::int64_t>(d - s, 0);
    out.residual_supply[k] = std::max<std::int64_t>(s - d, 0);
  }
  return out;
}

// Redistribution with a precomputed stencil; the core loop shared by every bin.
void redistribute_in_place(CountMatrix& demand, CountMatrix& supply, const std::vector<Offset>& stencil,
                           std::vector<Flow>* flows) {
  const int rows = demand.rows();
  const int cols = demand.cols();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      auto& need = demand(i, j);
      if (need == 0) continue;
      for (const auto& off : stencil) {
        const int r = i + off.drow;
        const int c = j + off.dcol;
        if (r < 0 || r >= rows || c < 0 || c >= cols) continue;
        auto& avail = supply(r, c);
        if (avail == 0) continue;
        const auto units = std::min(need, avail);
        need -= units;
        avail -= units;
        if (flows) flows->push_back(Flow{Cell{i, j}, Cell{r, c}, units});
        if (need == 0) break;
      }
    }
  }
}

}  // namespace

StageResult local_clearance(const CountMatrix& demand_slice, const SupplyMatrix& supply) {
  if (!demand_slice.same_shape(supply.values)) {
    throw InputError("demand slice and supply shapes differ");
  }
  return clear_slice(demand_slice.flat(), supply);
}

RedistributionResult redistribute(const StageResult& stage1, const GridSpec& spec, double radius,
                                  bool record_flows) {
  if (stage1.residual_demand.rows() != spec.rows || stage1.residual_demand.cols() != spec.cols ||
      !stage1.residual_demand.same_shape(stage1.residual_supply)) {
    throw InputError("stage result shape does not match grid");
  }
  RedistributionResult out{{}, stage1.residual_demand, stage1.residual_supply};
  const auto stencil = neighborhood_stencil(spec, radius);
  redistribute_in_place(out.final_residual_demand, out.final_residual_supply, stencil,
                        record_flows ? &out.flows : nullptr);
  return out;
}

MatchResult match(const DemandTensor& demand, const SupplyMatrix& supply, const GridSpec& spec,
                  double radius, MatchOptions options) {
  if (!demand.matches(spec)) throw InputError("demand tensor shape does not match grid");
  if (supply.rows() != spec.rows || supply.cols() != spec.cols) {
    throw InputError("supply shape does not match grid");
  }
  const int bins = spec.time_bins;
  MatchResult result{CountTensor(bins, spec.rows, spec.cols, 0), CountTensor(bins, spec.rows, spec.cols, 0),
                     std::nullopt};
  if (options.record_flows) result.served_flows.emplace(static_cast<std::size_t>(bins));

  const auto stencil = neighborhood_stencil(spec, radius);
  for (int t = 0; t < bins; ++t) {
    auto stage = clear_slice(demand.values().slice(t), supply);
    auto* flows = options.record_flows ? &(*result.served_flows)[static_cast<std::size_t>(t)] : nullptr;
    redistribute_in_place(stage.residual_demand, stage.residual_supply, stencil, flows);
    result.final_residual_demand.set_slice(t, stage.residual_demand);
    result.final_residual_supply.set_slice(t, stage.residual_supply);
  }
  return result;
}

std::int64_t total_loss(const MatchResult& result) { return result.final_residual_demand.sum(); }

}  // namespace vertiplan
