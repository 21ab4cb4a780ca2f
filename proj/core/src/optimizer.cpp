#include "vertiplan/optimizer.hpp"

#include <cmath>
#include <sstream>

namespace vertiplan {

std::string to_string(OptimizerMode mode) {
  switch (mode) {
    case OptimizerMode::relocate: return "relocate";
    case OptimizerMode::add_only: return "add_only";
    case OptimizerMode::remove_only: return "remove_only";
  }
  return "unknown";
}

OptimizerMode optimizer_mode_from_string(const std::string& name) {
  if (name == "relocate") return OptimizerMode::relocate;
  if (name == "add_only") return OptimizerMode::add_only;
  if (name == "remove_only") return OptimizerMode::remove_only;
  throw InputError("unknown optimizer mode '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (iterations < 0) throw InputError("iterations must be non-negative");
  if (kernel_radius < 0) throw InputError("kernel_radius must be non-negative");
  if (tabu_tenure < 0) throw InputError("tabu_tenure must be non-negative");
}

int default_kernel_radius(const GridSpec& spec, const CapacityPolicy& policy) {
  return static_cast<int>(std::floor(policy.service_radius / spec.cell_size + 1e-9));
}

OptimizerConfig OptimizerConfig::defaults_for(const GridSpec& spec, const CapacityPolicy& policy) {
  OptimizerConfig cfg;
  cfg.kernel_radius = default_kernel_radius(spec, policy);
  return cfg;
}

bool TabuList::is_tabu(Cell cell, int iteration) const {
  auto it = expiry_.find(cell);
  return it != expiry_.end() && iteration < it->second;
}

std::optional<int> TabuList::expiry(Cell cell) const {
  auto it = expiry_.find(cell);
  if (it == expiry_.end()) return std::nullopt;
  return it->second;
}

std::vector<Cell> TabuList::active(int iteration) const {
  std::vector<Cell> out;
  for (const auto& [cell, until] : expiry_) {
    if (iteration < until) out.push_back(cell);
  }
  return out;
}

namespace {

CountMatrix temporal_sum_exact(const CountTensor& field) {
  CountMatrix sum(field.rows(), field.cols(), 0);
  for (int t = 0; t < field.depth(); ++t) {
    const auto slice = field.slice(t);
    for (std::size_t k = 0; k < slice.size(); ++k) sum[k] += slice[k];
  }
  return sum;
}

}  // namespace

RealMatrix temporal_sum(const CountTensor& field) {
  const auto exact = temporal_sum_exact(field);
  RealMatrix out(exact.rows(), exact.cols(), 0.0);
  for (std::size_t k = 0; k < exact.size(); ++k) out[k] = static_cast<double>(exact[k]);
  return out;
}

RealMatrix aggregate_and_smooth(const CountTensor& field, int kernel_radius) {
  if (kernel_radius < 0) throw InputError("kernel_radius must be non-negative");
  const auto sum = temporal_sum_exact(field);
  const int rows = sum.rows();
  const int cols = sum.cols();

  // Box filter via a summed-area table; integer arithmetic keeps it exact.
  Matrix<std::int64_t> sat(rows + 1, cols + 1, 0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      sat(i + 1, j + 1) = sum(i, j) + sat(i, j + 1) + sat(i + 1, j) - sat(i, j);
    }
  }
  RealMatrix out(rows, cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const int r0 = std::max(0, i - kernel_radius);
    const int r1 = std::min(rows, i + kernel_radius + 1);
    for (int j = 0; j < cols; ++j) {
      const int c0 = std::max(0, j - kernel_radius);
      const int c1 = std::min(cols, j + kernel_radius + 1);
      out(i, j) = static_cast<double>(sat(r1, c1) - sat(r0, c1) - sat(r1, c0) + sat(r0, c0));
    }
  }
  return out;
}

std::optional<Cell> select_addition(const RealMatrix& smoothed_frd, const TabuList& tabu, int iteration) {
  std::optional<Cell> best;
  double best_value = 0.0;
  for (int i = 0; i < smoothed_frd.rows(); ++i) {
    for (int j = 0; j < smoothed_frd.cols(); ++j) {
      const Cell cell{i, j};
      if (tabu.is_tabu(cell, iteration)) continue;
      const double v = smoothed_frd(i, j);
      if (!best || v > best_value) {
        best = cell;
        best_value = v;
      }
    }
  }
  return best;
}

std::optional<Cell> select_removal(const RealMatrix& aggregated_frs, const TabuList& tabu, int iteration,
                                   const SupplyMatrix& supply, std::int64_t per_site_capacity) {
  if (aggregated_frs.rows() != supply.rows() || aggregated_frs.cols() != supply.cols()) throw InputError("residual supply and supply shapes differ");
  std::optional<Cell> best;
  double best_value = 0.0;
  for (int i = 0; i < aggregated_frs.rows(); ++i) {
    for (int j = 0; j < aggregated_frs.cols(); ++j) {
      const Cell cell{i, j};
      if (supply(i, j) < per_site_capacity || tabu.is_tabu(cell, iteration)) continue;
      const double v = aggregated_frs(i, j);
      if (!best || v > best_value) {
        best = cell;
        best_value = v;
      }
    }
  }
  return best;
}

OptimizerState make_initial_state(const DemandTensor& demand, SupplyMatrix supply, const GridSpec& spec,
                                  const CapacityPolicy& policy) {
  OptimizerState state;
  state.current_match = match(demand, supply, spec, policy.service_radius);
  state.supply = std::move(supply);
  state.loss_history.push_back({0, total_loss(state.current_match)});
  return state;
}

namespace {

void apply_action(OptimizerState& state, Cell cell, SiteAction action, int iteration, std::int64_t p,
                  int tenure) {
  auto& value = state.supply.values(cell.row, cell.col);
  value += action == SiteAction::added ? p : -p;
  state.events.push_back({iteration,
                          action == SiteAction::added ? OptimizerEvent::Kind::site_added
                                                      : OptimizerEvent::Kind::site_removed,
                          cell, ""});
  auto prev = state.last_action.find(cell);
  if (prev != state.last_action.end() && prev->second != action) {
    state.tabu.add(cell, iteration + tenure);
    state.events.push_back({iteration, OptimizerEvent::Kind::tabu_entered, cell,
                            "cell " + to_string(cell) + " alternated; tabu until iteration " +
                                std::to_string(iteration + tenure)});
  }
  state.last_action[cell] = action;
}

void skipped(OptimizerState& state, int iteration, OptimizerEvent::Kind kind, const char* why) {
  state.events.push_back({iteration, kind, std::nullopt, why});
}

}  // namespace

OptimizerState step(OptimizerState state, const DemandTensor& demand, const GridSpec& spec,
                    const CapacityPolicy& policy, const OptimizerConfig& config) {
  const int iteration = state.iteration + 1;
  const auto p = policy.per_site_capacity;
  const auto& frd = state.current_match.final_residual_demand;
  const auto& frs = state.current_match.final_residual_supply;

  bool changed = false;
  switch (config.mode) {
    case OptimizerMode::relocate: {
      const auto removal = select_removal(temporal_sum(frs), state.tabu, iteration, state.supply, p);
      if (!removal) {
        skipped(state, iteration, OptimizerEvent::Kind::removal_skipped, "no eligible removal cell");
        break;
      }
      // Commit the relocation only when both halves succeed so Σ S stays p·c.
      OptimizerState next = state;
      apply_action(next, *removal, SiteAction::removed, iteration, p, config.tabu_tenure);
      const auto addition =
          select_addition(aggregate_and_smooth(frd, config.kernel_radius), next.tabu, iteration);
      if (!addition) {
        skipped(state, iteration, OptimizerEvent::Kind::addition_skipped, "every cell is tabu");
        break;
      }
      apply_action(next, *addition, SiteAction::added, iteration, p, config.tabu_tenure);
      state = std::move(next);
      changed = true;
      break;
    }
    case OptimizerMode::add_only: {
      if (state.supply.total() >= p * policy.site_budget) {
        skipped(state, iteration, OptimizerEvent::Kind::addition_skipped, "site budget reached");
        break;
      }
      const auto addition =
          select_addition(aggregate_and_smooth(frd, config.kernel_radius), state.tabu, iteration);
      if (!addition) {
        skipped(state, iteration, OptimizerEvent::Kind::addition_skipped, "every cell is tabu");
        break;
      }
      apply_action(state, *addition, SiteAction::added, iteration, p, config.tabu_tenure);
      changed = true;
      break;
    }
    case OptimizerMode::remove_only: {
      const auto removal = select_removal(temporal_sum(frs), state.tabu, iteration, state.supply, p);
      if (!removal) {
        skipped(state, iteration, OptimizerEvent::Kind::removal_skipped, "no eligible removal cell");
        break;
      }
      apply_action(state, *removal, SiteAction::removed, iteration, p, config.tabu_tenure);
      changed = true;
      break;
    }
  }

  if (changed) state.current_match = match(demand, state.supply, spec, policy.service_radius);
  state.iteration = iteration;
  state.loss_history.push_back({iteration, total_loss(state.current_match)});
  return state;
}

OptimizeResult optimize(const DemandTensor& demand, const SupplyMatrix& initial, const GridSpec& spec,
                        const CapacityPolicy& policy, const OptimizerConfig& config,
                        const StepObserver& observer) {
  spec.validate();
  policy.validate();
  config.validate();
  if (!demand.matches(spec)) throw InputError("demand tensor shape does not match grid");
  if (initial.rows() != spec.rows || initial.cols() != spec.cols) {
    throw InputError("initial supply shape does not match grid");
  }
  const auto report = validate_supply(initial, policy, config.mode == OptimizerMode::relocate);
  if (!report.ok()) throw InputError("infeasible initial supply: " + report.summary());

  auto state = make_initial_state(demand, initial, spec, policy);
  if (observer) observer(state);
  OptimizeResult result;
  result.best_supply = state.supply;
  result.best_loss = state.loss_history.back().loss;
  result.best_iteration = 0;

  for (int k = 0; k < config.iterations; ++k) {
    state = step(std::move(state), demand, spec, policy, config);
    if (observer) observer(state);
    const auto loss = state.loss_history.back().loss;
    if (loss < result.best_loss) {
      result.best_loss = loss;
      result.best_iteration = state.iteration;
      result.best_supply = state.supply;
    }
  }
  result.final_supply = std::move(state.supply);
  result.loss_history = std::move(state.loss_history);
  result.events = std::move(state.events);
  return result;
}

std::string loss_history_csv(const std::vector<LossPoint>& history) {
  std::ostringstream out;
  out << "iteration,loss\n";
  for (const auto& point : history) out << point.iteration << ',' << point.loss << '\n';
  return out.str();
}

}  // namespace vertiplan
