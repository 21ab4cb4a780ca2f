#include "vertiplan/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vertiplan {

void WeightVector::validate() const {
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("weights must be finite");
  }
}

double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

double cosine_similarity(const WeightVector& a, const WeightVector& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    ab += a.values[k] * b.values[k];
    aa += a.values[k] * a.values[k];
    bb += b.values[k] * b.values[k];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

namespace {

void check_layers(const StrategyLayers& scores) {
  for (const auto& s : scores) {
    if (!s.values.same_shape(scores[0].values)) throw InputError("score matrices must share one shape");
  }
}

}  // namespace

RealMatrix synthesis_logits(const StrategyLayers& scores, const WeightVector& weights) {
  check_layers(scores);
  RealMatrix out(scores[0].values.rows(), scores[0].values.cols(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = weights.dot({scores[0].values[k], scores[1].values[k], scores[2].values[k], scores[3].values[k]});
  }
  return out;
}

RealMatrix comprehensive_score(const StrategyLayers& scores, const WeightVector& weights) {
  auto out = synthesis_logits(scores, weights);
  for (auto& v : out.flat()) v = sigmoid(v);
  return out;
}

FeatureVector features_at(const StrategyLayers& scores, Cell cell) {
  return {scores[0].values(cell.row, cell.col), scores[1].values(cell.row, cell.col),
          scores[2].values(cell.row, cell.col), scores[3].values(cell.row, cell.col)};
}

std::vector<Cell> recommend(const RealMatrix& comprehensive, int k, double min_separation, const GridSpec& spec) {
  if (k < 1) throw InputError("k must be at least 1");
  if (comprehensive.rows() != spec.rows || comprehensive.cols() != spec.cols) {
    throw InputError("score shape does not match grid");
  }
  std::vector<std::size_t> order(comprehensive.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return comprehensive[a] > comprehensive[b]; });
  std::vector<Cell> picked;
  for (std::size_t flat : order) {
    const Cell cell = spec.cell_at(flat);
    const bool clear = std::all_of(picked.begin(), picked.end(), [&](Cell other) {
      return spec.center_distance(cell, other) >= min_separation;
    });
    if (!clear) continue;
    picked.push_back(cell);
    if (static_cast<int>(picked.size()) == k) break;
  }
  return picked;
}

WeightVector feedback_update(const WeightVector& weights, const InteractionRecord& record, double learning_rate) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be positive");
  if (record.features.size() != record.recommended.size()) {
    throw InputError("interaction record needs one feature vector per recommended cell");
  }
  const auto chosen_at = std::find(record.recommended.begin(), record.recommended.end(), record.chosen);
  if (chosen_at == record.recommended.end()) {
    throw InputError("chosen cell " + to_string(record.chosen) + " was not among the recommendations");
  }
  const auto chosen_index = static_cast<std::size_t>(chosen_at - record.recommended.begin());
  const auto& xc = record.features[chosen_index];

  WeightVector w = weights;
  for (std::size_t u = 0; u < record.recommended.size(); ++u) {
    if (u == chosen_index) continue;
    FeatureVector diff{};
    for (std::size_t d = 0; d < 4; ++d) diff[d] = xc[d] - record.features[u][d];
    const double gain = learning_rate * sigmoid(-w.dot(diff));
    for (std::size_t d = 0; d < 4; ++d) w.values[d] += gain * diff[d];
  }
  return w;
}

void SessionInputs::validate() const {
  spec.validate();
  policy.validate();
  auto fits = [&](const RealMatrix& m) { return m.rows() == spec.rows && m.cols() == spec.cols; };
  if (distilled_demand.time_bins() != 1 || distilled_demand.rows() != spec.rows ||
      distilled_demand.cols() != spec.cols) {
    throw InputError("distilled demand must be a 1×M×N tensor");
  }
  if (initial_plan.counts.rows() != spec.rows || initial_plan.counts.cols() != spec.cols) {
    throw InputError("initial plan shape does not match grid");
  }
  if (!fits(rasters.obstacle_density) || !fits(rasters.population_density) || !fits(rasters.rent)) {
    throw InputError("cost raster shape does not match grid");
  }
  if (stations.empty()) throw InputError("at least one station is required");
}

void RecommenderConfig::validate() const {
  initial_weights.validate();
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be >= 0");
  if (top_k < 1) throw InputError("top_k must be at least 1");
  if (!(min_separation >= 0.0)) throw InputError("min_separation must be >= 0");
}

RecommendationSession::RecommendationSession(std::shared_ptr<const SessionInputs> inputs, RecommenderConfig config)
    : inputs_(std::move(inputs)), config_(config), weights_(config.initial_weights) {
  if (!inputs_) throw InputError("session inputs are required");
  inputs_->validate();
  config_.validate();
  plan_ = inputs_->initial_plan;
  layers_[static_cast<std::size_t>(Strategy::connectivity)] =
      score_connectivity(inputs_->spec, inputs_->stations, inputs_->scoring.travel_speed);
  layers_[static_cast<std::size_t>(Strategy::cost)] = score_cost(inputs_->rasters);
  refresh_supply_layers();
  refresh_recommendations();
}

bool RecommendationSession::budget_exhausted() const { return plan_.total_sites() >= inputs_->policy.site_budget; }

void RecommendationSession::set_weights(const WeightVector& weights) {
  weights.validate();
  weights_ = weights;
  refresh_recommendations();
}

const InteractionRecord& RecommendationSession::select(Cell selection) {
  const auto& spec = inputs_->spec;
  if (!spec.contains(selection)) throw InputError("cell " + to_string(selection) + " is outside the grid");
  if (budget_exhausted()) {
    throw BudgetExhaustedError("plan already holds " + std::to_string(plan_.total_sites()) + " of " +
                               std::to_string(inputs_->policy.site_budget) + " sites");
  }

  InteractionRecord record;
  record.iteration = static_cast<int>(log_.size()) + 1;
  record.chosen = selection;
  for (const auto& rec : recommendations_) {
    record.recommended.push_back(rec.cell);
    record.features.push_back(rec.features);
  }
  if (std::find(record.recommended.begin(), record.recommended.end(), selection) == record.recommended.end()) {
    record.recommended.push_back(selection);
    record.features.push_back(features_at(layers_, selection));
  }
  if (config_.learning_rate > 0.0) weights_ = feedback_update(weights_, record, config_.learning_rate);
  record.weights_after = weights_;

  plan_.counts(selection.row, selection.col) += 1;
  refresh_supply_layers();
  refresh_recommendations();
  log_.push_back(std::move(record));
  return log_.back();
}

void RecommendationSession::refresh_supply_layers() {
  const auto& in = *inputs_;
  const auto supply = supply_from_layout(plan_, in.policy);
  layers_[static_cast<std::size_t>(Strategy::demand)] =
      score_demand(supply, in.distilled_demand, in.spec, in.policy.service_radius, in.scoring.kernel_radius);
  layers_[static_cast<std::size_t>(Strategy::coverage)] = score_coverage(supply, in.spec, in.policy.service_radius);
}

void RecommendationSession::refresh_recommendations() {
  const auto scores = comprehensive();
  recommendations_.clear();
  for (const auto& cell : recommend(scores, config_.top_k, config_.min_separation, inputs_->spec)) {
    recommendations_.push_back({cell, scores(cell.row, cell.col), features_at(layers_, cell)});
  }
}

}  // namespace vertiplan
