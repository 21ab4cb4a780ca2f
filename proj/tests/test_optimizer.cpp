#include <doctest.h>

#include <algorithm>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "vertiplan/error.hpp"
#include "vertiplan/optimizer.hpp"

using namespace vertiplan;

namespace {

CountTensor single_bin(const CountMatrix& m) {
  CountTensor t(1, m.rows(), m.cols(), 0);
  t.set_slice(0, m);
  return t;
}

GridSpec grid(int rows, int cols, int bins = 1) {
  GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.cell_size = 200.0;
  s.time_bins = bins;
  return s;
}

bool has_event(const std::vector<OptimizerEvent>& events, OptimizerEvent::Kind kind) {
  return std::any_of(events.begin(), events.end(), [&](const auto& e) { return e.kind == kind; });
}

// Random feasible relocate-mode instance with at least one site.
gen::Instance relocatable(Rng& rng, gen::Limits lim) {
  for (;;) {
    auto in = gen::instance(rng, lim);
    if (in.supply.total() > 0) return in;
  }
}

}  // namespace

TEST_CASE("smoothing with radius 0 is the temporal sum") {
  CountTensor t(2, 2, 2, 0);
  t(0, 0, 1) = 3;
  t(1, 0, 1) = 4;
  t(1, 1, 0) = 5;
  CHECK(aggregate_and_smooth(t, 0) == RealMatrix{{0.0, 7.0}, {5.0, 0.0}});
  CHECK(temporal_sum(t) == RealMatrix{{0.0, 7.0}, {5.0, 0.0}});
  CHECK_THROWS_AS(aggregate_and_smooth(t, -1), InputError);
}

TEST_CASE("smoothing spreads a point into a plateau") {
  CountMatrix m(5, 5, 0);
  m(2, 2) = 4;
  const auto out = aggregate_and_smooth(single_bin(m), 1);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const bool inside = std::abs(i - 2) <= 1 && std::abs(j - 2) <= 1;
      CHECK(out(i, j) == (inside ? 4.0 : 0.0));
    }
  }
}

TEST_CASE("smoothing agrees with direct convolution") {
  const CountMatrix m{{1, 0, 0}, {0, 0, 0}, {0, 0, 2}};
  const auto expected = oracle::box_filter(m, 1);
  REQUIRE(expected(1, 1) == 3.0);
  CHECK(aggregate_and_smooth(single_bin(m), 1) == expected);

  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = gen::uniform_int(rng, 1, 12);
    const int cols = gen::uniform_int(rng, 1, 12);
    const int bins = gen::uniform_int(rng, 1, 3);
    CountTensor t(bins, rows, cols, 0);
    for (auto& v : t.flat()) v = gen::uniform_int(rng, 0, 9);
    CountMatrix sum(rows, cols, 0);
    for (int b = 0; b < bins; ++b) {
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) sum(i, j) += t(b, i, j);
      }
    }
    const int k = gen::uniform_int(rng, 0, 4);
    CHECK(aggregate_and_smooth(t, k) == oracle::box_filter(sum, k));
  }
}

TEST_CASE("addition picks the non-tabu maximum, row-major on ties") {
  const RealMatrix field{{0.0, 5.0}, {3.0, 1.0}};
  TabuList none;
  CHECK(select_addition(field, none, 1) == Cell{0, 1});

  TabuList blocked;
  blocked.add({0, 1}, 5);
  CHECK(select_addition(field, blocked, 1) == Cell{1, 0});
  CHECK(select_addition(field, blocked, 5) == Cell{0, 1});  // expired

  CHECK(select_addition(RealMatrix(3, 3, 2.0), none, 1) == Cell{0, 0});

  TabuList all;
  all.add({0, 0}, 9);
  CHECK_FALSE(select_addition(RealMatrix(1, 1, 0.0), all, 1).has_value());
}

TEST_CASE("removal picks the largest leftover among supplied cells") {
  TabuList none;
  const std::int64_t p = 20;
  CHECK(select_removal(RealMatrix{{40.0, 0.0}}, none, 1, {CountMatrix{{20, 20}}}, p) == Cell{0, 0});
  CHECK(select_removal(RealMatrix{{40.0, 0.0}}, none, 1, {CountMatrix{{0, 20}}}, p) == Cell{0, 1});
  CHECK(select_removal(RealMatrix{{0.0, 0.0}}, none, 1, {CountMatrix{{20, 20}}}, p) == Cell{0, 0});
  CHECK_FALSE(select_removal(RealMatrix{{9.0}}, none, 1, {CountMatrix{{0}}}, p).has_value());

  TabuList blocked;
  blocked.add({0, 0}, 3);
  CHECK(select_removal(RealMatrix{{40.0, 0.0}}, blocked, 2, {CountMatrix{{20, 20}}}, p) == Cell{0, 1});
}

TEST_CASE("one relocation moves the idle site onto unmet demand") {
  const auto spec = grid(1, 2);
  const CapacityPolicy policy{20, 1, 150.0};  // neighbors out of reach
  const DemandTensor demand{single_bin(CountMatrix{{0, 10}})};
  const auto config = OptimizerConfig::defaults_for(spec, policy);
  REQUIRE(config.kernel_radius == 0);

  auto state = make_initial_state(demand, {CountMatrix{{20, 0}}}, spec, policy);
  CHECK(state.loss_history.back().loss == 10);
  state = step(std::move(state), demand, spec, policy, config);
  CHECK(state.supply.values == CountMatrix{{0, 20}});
  CHECK(state.loss_history.back() == LossPoint{1, 0});
}

TEST_CASE("an oscillating cell becomes tabu") {
  // No demand: removal and addition both land on (0,0).
  const auto spec = grid(1, 2);
  const CapacityPolicy policy{20, 1, 0.0};
  const DemandTensor demand{single_bin(CountMatrix{{0, 0}})};
  auto config = OptimizerConfig::defaults_for(spec, policy);

  auto state = make_initial_state(demand, {CountMatrix{{20, 0}}}, spec, policy);
  for (int i = 0; i < 3; ++i) state = step(std::move(state), demand, spec, policy, config);
  CHECK(state.tabu.is_tabu({0, 0}, 3));
  CHECK(state.tabu.expiry({0, 0}) == 1 + config.tabu_tenure);
  CHECK(has_event(state.events, OptimizerEvent::Kind::tabu_entered));
  CHECK(has_event(state.events, OptimizerEvent::Kind::removal_skipped));
  CHECK(state.supply.values == CountMatrix{{20, 0}});
  CHECK(state.loss_history.size() == 4);

  SUBCASE("zero tenure never blocks") {
    config.tabu_tenure = 0;
    auto s = make_initial_state(demand, {CountMatrix{{20, 0}}}, spec, policy);
    for (int i = 0; i < 5; ++i) s = step(std::move(s), demand, spec, policy, config);
    CHECK_FALSE(has_event(s.events, OptimizerEvent::Kind::removal_skipped));
    CHECK_FALSE(has_event(s.events, OptimizerEvent::Kind::addition_skipped));
    CHECK(s.tabu.active(s.iteration + 1).empty());
  }
}

TEST_CASE("optimize keeps an optimal plan and reports a flat curve") {
  const auto spec = grid(2, 2, 2);
  const CapacityPolicy policy{5, 2, 0.0};
  CountTensor d(2, 2, 2, 0);
  d(0, 0, 0) = 5;
  d(1, 1, 1) = 3;
  const SupplyMatrix s{CountMatrix{{5, 0}, {0, 5}}};
  OptimizerConfig config;
  config.iterations = 6;
  config.kernel_radius = 0;
  const auto r = optimize(DemandTensor{d}, s, spec, policy, config);
  CHECK(r.best_loss == 0);
  CHECK(r.best_iteration == 0);
  CHECK(r.best_supply == s);
  REQUIRE(r.loss_history.size() == 7);
  CHECK(r.loss_history.front() == LossPoint{0, 0});
}

TEST_CASE("optimize rejects infeasible starts and bad configs") {
  const auto spec = grid(1, 2);
  const CapacityPolicy policy{20, 2, 0.0};
  const DemandTensor demand{single_bin(CountMatrix{{1, 1}})};
  OptimizerConfig config;
  CHECK_THROWS_AS(optimize(demand, {CountMatrix{{30, 10}}}, spec, policy, config), InputError);
  CHECK_THROWS_AS(optimize(demand, {CountMatrix{{20, 0}}}, spec, policy, config), InputError);  // 1 of 2 sites
  config.mode = OptimizerMode::add_only;
  CHECK_NOTHROW(optimize(demand, {CountMatrix{{20, 0}}}, spec, policy, config));
  config.iterations = -1;
  CHECK_THROWS_AS(optimize(demand, {CountMatrix{{20, 20}}}, spec, policy, config), InputError);
  CHECK_THROWS_AS(optimizer_mode_from_string("sideways"), InputError);
  CHECK(optimizer_mode_from_string(to_string(OptimizerMode::remove_only)) == OptimizerMode::remove_only);
}

TEST_CASE("add-only and remove-only modes") {
  const auto spec = grid(1, 3);
  const CapacityPolicy policy{10, 2, 0.0};
  const DemandTensor demand{single_bin(CountMatrix{{0, 0, 25}})};
  OptimizerConfig config;
  config.kernel_radius = 0;
  config.iterations = 4;

  config.mode = OptimizerMode::add_only;
  const auto grown = optimize(demand, {CountMatrix{{0, 0, 0}}}, spec, policy, config);
  CHECK(grown.final_supply.values == CountMatrix{{0, 0, 20}});  // stops at the site budget
  CHECK(has_event(grown.events, OptimizerEvent::Kind::addition_skipped));
  CHECK(grown.best_loss == 5);

  config.mode = OptimizerMode::remove_only;
  const auto shrunk = optimize(demand, {CountMatrix{{10, 0, 10}}}, spec, policy, config);
  CHECK(shrunk.final_supply.values == CountMatrix{{0, 0, 0}});
  CHECK(shrunk.best_supply.values == CountMatrix{{10, 0, 10}});
  CHECK(shrunk.best_loss == 15);
}

TEST_CASE("relocation keeps every constraint and the site count at every step") {
  Rng rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const auto in = relocatable(rng, {.max_rows = 10, .max_cols = 10, .max_bins = 4});
    OptimizerConfig config = OptimizerConfig::defaults_for(in.spec, in.policy);
    config.iterations = 25;
    config.tabu_tenure = gen::uniform_int(rng, 0, 6);
    std::int64_t running_best = -1;
    const auto result = optimize(in.demand, in.supply, in.spec, in.policy, config, [&](const OptimizerState& s) {
      CHECK(validate_supply(s.supply, in.policy, true).ok());
      CHECK(s.supply.total() == in.supply.total());
      const auto loss = s.loss_history.back().loss;
      running_best = running_best < 0 ? loss : std::min(running_best, loss);
    });
    CHECK(result.best_loss == running_best);
    CHECK(result.loss_history.size() == 26);
    const auto best_it = std::min_element(result.loss_history.begin(), result.loss_history.end(),
                                          [](const auto& a, const auto& b) { return a.loss < b.loss; });
    CHECK(result.best_iteration == best_it->iteration);
    CHECK(total_loss(match(in.demand, result.best_supply, in.spec, in.policy.service_radius)) == result.best_loss);
  }
}

TEST_CASE("a tabu cell keeps its supply until expiry") {
  Rng rng(33);
  int tabu_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto in = relocatable(rng, {.max_rows = 6, .max_cols = 6, .max_bins = 2, .max_demand = 10});
    auto config = OptimizerConfig::defaults_for(in.spec, in.policy);
    config.iterations = 30;
    config.tabu_tenure = 4;
    std::map<Cell, std::pair<int, std::int64_t>> frozen;  // cell -> (expiry, supply at entry)
    optimize(in.demand, in.supply, in.spec, in.policy, config, [&](const OptimizerState& s) {
      for (auto it = frozen.begin(); it != frozen.end();) {
        if (s.iteration >= it->second.first) {
          it = frozen.erase(it);
          continue;
        }
        CHECK(s.supply(it->first.row, it->first.col) == it->second.second);
        ++it;
      }
      for (const auto& e : s.events) {
        if (e.iteration == s.iteration && e.kind == OptimizerEvent::Kind::tabu_entered) {
          frozen[*e.cell] = {*s.tabu.expiry(*e.cell), s.supply(e.cell->row, e.cell->col)};
          ++tabu_seen;
        }
      }
    });
  }
  CHECK(tabu_seen > 0);
}

TEST_CASE("optimization is deterministic") {
  Rng rng(34);
  const auto in = relocatable(rng, {.max_rows = 12, .max_cols = 12, .max_bins = 4});
  auto config = OptimizerConfig::defaults_for(in.spec, in.policy);
  config.iterations = 30;
  std::vector<SupplyMatrix> first, second;
  optimize(in.demand, in.supply, in.spec, in.policy, config, [&](const auto& s) { first.push_back(s.supply); });
  optimize(in.demand, in.supply, in.spec, in.policy, config, [&](const auto& s) { second.push_back(s.supply); });
  CHECK(first == second);
}

TEST_CASE("loss curve CSV") {
  CHECK(loss_history_csv({{0, 12}, {1, 9}}) == "iteration,loss\n0,12\n1,9\n");
}
