#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vertiplan/grid.hpp"
#include "vertiplan/matching.hpp"

namespace vertiplan {

enum class OptimizerMode { relocate, add_only, remove_only };

std::string to_string(OptimizerMode mode);
OptimizerMode optimizer_mode_from_string(const std::string& name);

struct OptimizerConfig {
  int iterations = 300;
  int kernel_radius = 5;  // half-width of the all-ones smoothing kernel, in cells
  int tabu_tenure = 10;
  OptimizerMode mode = OptimizerMode::relocate;

  void validate() const;

  // Kernel reach matched to the service radius: floor(r / cell_size).
  static OptimizerConfig defaults_for(const GridSpec& spec, const CapacityPolicy& policy);

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

int default_kernel_radius(const GridSpec& spec, const CapacityPolicy& policy);

// Cells that may not be modified until their expiry iteration.
class TabuList {
 public:
  void add(Cell cell, int expiry) { expiry_[cell] = expiry; }
  bool is_tabu(Cell cell, int iteration) const;
  std::optional<int> expiry(Cell cell) const;
  std::vector<Cell> active(int iteration) const;

  friend bool operator==(const TabuList&, const TabuList&) = default;

 private:
  std::map<Cell, int> expiry_;
};

enum class SiteAction { added, removed };

struct LossPoint {
  int iteration = 0;
  std::int64_t loss = 0;
  friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

struct OptimizerEvent {
  enum class Kind { addition_skipped, removal_skipped, tabu_entered, site_added, site_removed };
  int iteration = 0;
  Kind kind = Kind::site_added;
  std::optional<Cell> cell;
  std::string message;
};

struct OptimizerState {
  SupplyMatrix supply;
  int iteration = 0;
  TabuList tabu;
  std::map<Cell, SiteAction> last_action;
  std::vector<LossPoint> loss_history;
  std::vector<OptimizerEvent> events;
  MatchResult current_match;  // matching of `supply`, reused by the next step
};

// Temporal sum followed by a (2k+1)×(2k+1) all-ones convolution with zero padding.
RealMatrix aggregate_and_smooth(const CountTensor& field, int kernel_radius);

// Temporal sum only.
RealMatrix temporal_sum(const CountTensor& field);

// Non-tabu cell maximizing the smoothed unmet-demand field; ties go to the
// first cell in row-major order. nullopt when every cell is tabu.
std::optional<Cell> select_addition(const RealMatrix& smoothed_frd, const TabuList& tabu, int iteration);

// Non-tabu cell holding at least p supply that maximizes summed residual
// supply; ties row-major. nullopt when no cell is eligible.
std::optional<Cell> select_removal(const RealMatrix& aggregated_frs, const TabuList& tabu, int iteration,
                                   const SupplyMatrix& supply, std::int64_t per_site_capacity);

// Matches the initial supply and records its loss as iteration 0.
OptimizerState make_initial_state(const DemandTensor& demand, SupplyMatrix supply, const GridSpec& spec,
                                  const CapacityPolicy& policy);

// One round: remove p at the removal cell, then add p at the addition cell
// (relocate), or a single action in the add/remove-only modes. A cell whose
// consecutive actions alternate is placed on the tabu list until
// iteration + tabu_tenure. The new supply is re-matched and its loss appended.
OptimizerState step(OptimizerState state, const DemandTensor& demand, const GridSpec& spec,
                    const CapacityPolicy& policy, const OptimizerConfig& config);

struct OptimizeResult {
  SupplyMatrix best_supply;
  std::int64_t best_loss = 0;
  int best_iteration = 0;
  SupplyMatrix final_supply;
  std::vector<LossPoint> loss_history;  // iteration 0 (initial) through config.iterations
  std::vector<OptimizerEvent> events;
};

using StepObserver = std::function<void(const OptimizerState&)>;

// Runs config.iterations rounds and returns the best supply seen (earliest on
// ties). Throws InputError when the initial supply is infeasible.
OptimizeResult optimize(const DemandTensor& demand, const SupplyMatrix& initial, const GridSpec& spec,
                        const CapacityPolicy& policy, const OptimizerConfig& config,
                        const StepObserver& observer = {});

// "iteration,loss" rows with a header line.
std::string loss_history_csv(const std::vector<LossPoint>& history);

}  // namespace vertiplan
