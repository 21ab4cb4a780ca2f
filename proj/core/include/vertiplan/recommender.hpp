#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "vertiplan/grid.hpp"
#include "vertiplan/scoring.hpp"

namespace vertiplan {

// Per-cell strategy scores in Strategy order (demand, coverage, connectivity, cost).
using FeatureVector = std::array<double, 4>;

// Synthesis-layer weights P1..P4. Only the direction matters for ranking.
struct WeightVector {
  std::array<double, 4> values{1.0, 1.0, 1.0, -0.5};

  double dot(const FeatureVector& x) const noexcept {
    return values[0] * x[0] + values[1] * x[1] + values[2] * x[2] + values[3] * x[3];
  }
  void validate() const;
  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

double sigmoid(double x) noexcept;
double cosine_similarity(const WeightVector& a, const WeightVector& b);

struct InteractionRecord {
  int iteration = 0;
  std::vector<Cell> recommended;
  Cell chosen;
  std::vector<FeatureVector> features;  // aligned with `recommended`
  WeightVector weights_after;
};

using StrategyLayers = std::array<ScoreMatrix, 4>;

// Σ_k w_k · score_k per cell, before the sigmoid.
RealMatrix synthesis_logits(const StrategyLayers& scores, const WeightVector& weights);

// σ(Σ_k w_k · score_k) per cell; values in (0, 1).
RealMatrix comprehensive_score(const StrategyLayers& scores, const WeightVector& weights);

FeatureVector features_at(const StrategyLayers& scores, Cell cell);

// Greedy diverse top-k: repeatedly takes the best remaining cell (row-major on
// ties) that is at least min_separation from every cell already taken. May
// return fewer than k cells. Output is in descending score order.
std::vector<Cell> recommend(const RealMatrix& comprehensive, int k, double min_separation, const GridSpec& spec);

// Pairwise logistic preference step, one pass over the unchosen alternatives in
// recommendation order: w += η σ(-w·(x_c - x_u)) (x_c - x_u).
WeightVector feedback_update(const WeightVector& weights, const InteractionRecord& record, double learning_rate);

// Everything a planning session reads but never mutates.
struct SessionInputs {
  GridSpec spec;
  CapacityPolicy policy;
  ScoringParams scoring;
  DemandTensor distilled_demand;  // T = 1
  VertiportLayout initial_plan;   // existing sites; the budget counts them
  std::vector<Cell> stations;
  CostRasters rasters;

  void validate() const;
};

struct RecommenderConfig {
  WeightVector initial_weights;
  double learning_rate = 0.05;
  int top_k = 10;
  double min_separation = 1000.0;

  void validate() const;
};

struct Recommendation {
  Cell cell;
  double score = 0.0;  // comprehensive (post-sigmoid)
  FeatureVector features{};
};

// One human-in-the-loop planning session: scores, recommendations, the plan
// being built, and the weights learned from the user's picks.
class RecommendationSession {
 public:
  RecommendationSession(std::shared_ptr<const SessionInputs> inputs, RecommenderConfig config);

  const SessionInputs& inputs() const noexcept { return *inputs_; }
  const RecommenderConfig& config() const noexcept { return config_; }
  const WeightVector& weights() const noexcept { return weights_; }
  const StrategyLayers& layers() const noexcept { return layers_; }
  const ScoreMatrix& layer(Strategy s) const noexcept { return layers_[static_cast<std::size_t>(s)]; }
  RealMatrix comprehensive() const { return comprehensive_score(layers_, weights_); }
  const std::vector<Recommendation>& recommendations() const noexcept { return recommendations_; }
  const VertiportLayout& plan() const noexcept { return plan_; }
  SupplyMatrix supply() const { return supply_from_layout(plan_, inputs_->policy); }
  const std::vector<InteractionRecord>& log() const noexcept { return log_; }
  bool budget_exhausted() const;

  // Replaces the weights (user override) and refreshes recommendations.
  void set_weights(const WeightVector& weights);

  // Adds one site at `selection`, learns from the choice against the last
  // recommendation set, rescoring supply-dependent layers and recommending
  // again. A pick outside the recommendations is compared against all of
  // them. Throws InputError for out-of-grid cells, BudgetExhaustedError when
  // the plan already holds site_budget sites.
  const InteractionRecord& select(Cell selection);

 private:
  void refresh_supply_layers();
  void refresh_recommendations();

  std::shared_ptr<const SessionInputs> inputs_;
  RecommenderConfig config_;
  WeightVector weights_;
  VertiportLayout plan_;
  StrategyLayers layers_;
  std::vector<Recommendation> recommendations_;
  std::vector<InteractionRecord> log_;
};

}  // namespace vertiplan
