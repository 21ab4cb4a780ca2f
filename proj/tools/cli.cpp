#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vertiplan/dataset.hpp"
#include "vertiplan/error.hpp"
#include "vertiplan/http_server.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/io.hpp"
#include "vertiplan/optimizer.hpp"
#include "vertiplan/recommender.hpp"
#include "vertiplan/scoring.hpp"
#include "vertiplan/service.hpp"
#include "vertiplan/synthetic.hpp"

namespace vertiplan::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  bool deterministic = false;

  // ingest / init / optimize
  std::string demand;

  // init
  std::string algorithm;
  int k = 0;
  int over_cluster = -1;
  std::int64_t seed = -1;

  // optimize / validate / score
  std::string plan;
  int iterations = -1;
  std::string mode;
  std::string loss_out;
  bool partial = false;

  // score / recommend
  std::string distilled;
  std::string weights;
  std::string scores;
  int top_k = 0;
  double min_separation = -1.0;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log_dir;

  // synth
  std::int64_t trips = -1;
  std::int64_t site_budget = -1;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

AppConfig config_of(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  return load_config(o.config);
}

void stamp(Provenance& p, const Options& o) {
  if (o.deterministic) {
    p.created_at.reset();
  } else {
    p.created_at = utc_now_iso8601();
  }
}

DemandArchive demand_of(const Options& o, const AppConfig& cfg, std::ostream& err) {
  if (!o.demand.empty()) {
    auto archive = load_demand_archive(o.demand);
    if (archive.grid != cfg.grid) throw ValidationError("demand archive grid does not match the configured grid");
    return archive;
  }
  std::vector<std::string> warnings;
  auto archive = load_dataset_demand(cfg, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return archive;
}

WeightVector parse_weights(const std::string& text) {
  WeightVector w;
  std::stringstream in(text);
  std::string piece;
  std::size_t n = 0;
  while (std::getline(in, piece, ',')) {
    if (n == 4) throw UsageError("--weights takes exactly four values");
    try {
      std::size_t used = 0;
      w.values[n] = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw UsageError("--weights: '" + piece + "' is not a number");
    }
    ++n;
  }
  if (n != 4) throw UsageError("--weights takes exactly four values");
  w.validate();
  return w;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("--out DIR is required");
  SyntheticParams params;
  if (o.seed >= 0) params.seed = static_cast<std::uint64_t>(o.seed);
  if (o.trips >= 0) params.trips = o.trips;
  if (o.site_budget > 0) params.site_budget = o.site_budget;
  const auto city = generate_synthetic_city(params);
  write_synthetic_bundle(city, o.out);
  out << "wrote synthetic bundle to " << o.out << " (" << city.endpoints.size() << " endpoints, "
      << city.demand.total() << " gridded)\n";
  return kExitOk;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = config_of(o);
  if (o.out.empty()) throw UsageError("--out is required");
  if (cfg.dataset.od_csv.empty()) throw UsageError("config names no dataset.od_csv");
  const auto loaded = load_od_csv(cfg.dataset.od_csv, cfg.grid, cfg.geo);
  for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
  save_demand_archive({cfg.grid, loaded.demand, loaded.points}, o.out);

  nlohmann::json per_bin = nlohmann::json::array();
  std::int64_t peak = 0;
  for (int t = 0; t < loaded.demand.time_bins(); ++t) {
    std::int64_t sum = 0;
    for (int i = 0; i < loaded.demand.rows(); ++i) {
      for (int j = 0; j < loaded.demand.cols(); ++j) {
        sum += loaded.demand.at(t, i, j);
        peak = std::max(peak, loaded.demand.at(t, i, j));
      }
    }
    per_bin.push_back(sum);
  }
  const nlohmann::json summary{{"records", loaded.records.size()},
                               {"gridded", loaded.demand.total()},
                               {"skipped_outside_extent", loaded.skipped_outside_extent},
                               {"skipped_outside_window", loaded.skipped_outside_window},
                               {"per_bin", per_bin},
                               {"peak_cell_bin", peak}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_init(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = config_of(o);
  if (o.out.empty()) throw UsageError("--out is required");
  auto strategy = cfg.init;
  if (!o.algorithm.empty()) strategy.algorithm = cluster_algorithm_from_string(o.algorithm);
  if (o.k > 0) strategy.target_sites = o.k;
  if (o.over_cluster >= 0) strategy.over_cluster = o.over_cluster;
  if (o.seed >= 0) strategy.seed = static_cast<std::uint64_t>(o.seed);
  strategy.validate();

  const auto demand = demand_of(o, cfg, err);
  const auto init = initialize_layout(demand.points, strategy, cfg.grid);
  for (const auto& w : init.layout.warnings) err << "warning: " << w << '\n';

  PlanDocument doc;
  doc.grid = cfg.grid;
  doc.policy = cfg.policy;
  doc.layout = init.layout.layout;
  doc.geo = cfg.geo;
  doc.provenance.source = "init:" + to_string(strategy.algorithm) + " k=" + std::to_string(strategy.target_sites) +
                          " over=" + std::to_string(strategy.over_cluster);
  doc.provenance.seed = strategy.seed;
  stamp(doc.provenance, o);
  save_plan(doc, o.out);

  const auto loss = total_loss(match(demand.demand, doc.supply(), cfg.grid, cfg.policy.service_radius));
  out << "sites " << doc.layout.total_sites() << ", initial loss " << loss << '\n';
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = config_of(o);
  if (o.plan.empty()) throw UsageError("--plan is required");
  if (o.out.empty()) throw UsageError("--out is required");
  auto optimizer = cfg.optimizer;
  if (o.iterations >= 0) optimizer.iterations = o.iterations;
  if (!o.mode.empty()) optimizer.mode = optimizer_mode_from_string(o.mode);
  optimizer.validate();

  const auto input = load_plan(o.plan);
  if (input.grid.rows != cfg.grid.rows || input.grid.cols != cfg.grid.cols) {
    throw ValidationError("plan grid does not match the configured grid");
  }
  const auto demand = demand_of(o, cfg, err);
  const auto result = optimize(demand.demand, input.supply(), cfg.grid, input.policy, optimizer);

  PlanDocument doc = input;
  doc.layout = layout_from_supply(result.best_supply, input.policy);
  doc.loss_history = result.loss_history;
  doc.provenance.source = "optimize:" + to_string(optimizer.mode) + " iterations=" +
                          std::to_string(optimizer.iterations) + " from " + input.provenance.source;
  stamp(doc.provenance, o);
  save_plan(doc, o.out);

  std::filesystem::path loss_path = o.loss_out;
  if (loss_path.empty()) {
    loss_path = o.out;
    loss_path.replace_extension(".loss.csv");
  }
  write_text_file(loss_path, loss_history_csv(result.loss_history));

  const auto initial = result.loss_history.front().loss;
  out << "loss " << initial << " -> " << result.best_loss << " (best at iteration " << result.best_iteration
      << ")\n";
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = config_of(o);
  if (o.out.empty()) throw UsageError("--out DIR is required");
  if (!o.plan.empty()) cfg.dataset.existing_plan = o.plan;
  if (!o.distilled.empty()) cfg.dataset.distilled_plan = o.distilled;
  const auto weights = o.weights.empty() ? cfg.recommender.initial_weights : parse_weights(o.weights);

  DemandArchive demand;
  if (cfg.dataset.distilled_plan.empty()) demand = demand_of(o, cfg, err);
  const auto inputs = build_session_inputs(cfg, demand);
  auto rec = cfg.recommender;
  rec.initial_weights = weights;
  const RecommendationSession session(inputs, rec);

  const std::filesystem::path dir = o.out;
  for (const auto s : kStrategies) write_matrix_csv(dir / (to_string(s) + ".csv"), session.layer(s).values);
  write_matrix_csv(dir / "comprehensive.csv", session.comprehensive());
  out << "wrote 5 score layers to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_recommend(const Options& o, std::ostream& out) {
  const auto cfg = config_of(o);
  if (o.scores.empty()) throw UsageError("--scores is required");
  const int k = o.top_k > 0 ? o.top_k : cfg.recommender.top_k;
  const double sep = o.min_separation >= 0.0 ? o.min_separation : cfg.recommender.min_separation;
  const auto scores = load_raster_csv(o.scores, cfg.grid);
  const auto cells = recommend(scores, k, sep, cfg.grid);

  std::ostringstream csv;
  csv << "rank,row,col,score\n";
  char buf[64];
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", scores(cells[r].row, cells[r].col));
    csv << r + 1 << ',' << cells[r].row << ',' << cells[r].col << ',' << buf << '\n';
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_text_file(o.out, csv.str());
    out << "wrote " << cells.size() << " recommendations to " << o.out << '\n';
  }
  return kExitOk;
}

HttpServer* g_server = nullptr;

int cmd_serve(const Options& o, std::ostream& out) {
  const auto cfg = config_of(o);
  ServiceOptions opts;
  if (!o.log_dir.empty()) opts.log_dir = o.log_dir;
  PlanningService service(opts);
  auto dataset = load_dataset(cfg);
  for (const auto& w : dataset.warnings) out << "warning: " << w << '\n';
  service.add_dataset(std::move(dataset));
  HttpServer server(service);
  const int port = server.bind(o.host, o.port);
  out << "serving dataset '" << cfg.dataset.name << "' on http://" << o.host << ':' << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.plan.empty()) throw UsageError("--plan is required");
  PlanDocument doc;
  try {
    doc = load_plan(o.plan);
  } catch (const ValidationError& e) {
    out << "invalid: " << e.what() << '\n';
    return kExitValidation;
  }
  if (!o.config.empty()) {
    const auto cfg = load_config(o.config);
    if (doc.grid.rows != cfg.grid.rows || doc.grid.cols != cfg.grid.cols) {
      out << "invalid: plan grid " << doc.grid.rows << 'x' << doc.grid.cols << " does not match config grid "
          << cfg.grid.rows << 'x' << cfg.grid.cols << '\n';
      return kExitValidation;
    }
    if (doc.policy != cfg.policy) {
      out << "invalid: plan capacity policy differs from config\n";
      return kExitValidation;
    }
  }
  const auto report = doc.validate(!o.partial);
  if (!report.ok()) {
    out << "invalid: " << report.summary() << '\n';
    return kExitValidation;
  }
  out << "valid: " << doc.layout.total_sites() << " sites, total supply " << doc.supply().total() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vertiport network planning: gridding, matching, optimization, scoring and recommendation."};
  app.name("vertiplan");
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config", o.config, "Config JSON");
    if (config_required) opt->required();
    opt->check(CLI::ExistingFile);
  };

  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic dataset bundle");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--trips", o.trips, "Trip count");
  synth->add_option("--site-budget", o.site_budget, "Site budget written to the config");

  auto* ingest = app.add_subcommand("ingest", "Grid an OD CSV into a demand archive");
  common(ingest);
  ingest->add_option("--out", o.out, "Demand archive JSON")->required();

  auto* init = app.add_subcommand("init", "Cluster demand points into an initial plan");
  common(init);
  init->add_option("--out", o.out, "Plan JSON")->required();
  init->add_option("--demand", o.demand, "Demand archive (defaults to the config's dataset)");
  init->add_option("--algorithm", o.algorithm, "kmeans | gmm | hac");
  init->add_option("--k", o.k, "Target site count");
  init->add_option("--over-cluster", o.over_cluster, "Extra clusters to form and prune");
  init->add_option("--seed", o.seed, "Clustering seed");
  init->add_flag("--deterministic", o.deterministic, "Omit wall-clock timestamps");

  auto* opt = app.add_subcommand("optimize", "Improve a plan with the greedy/tabu optimizer");
  common(opt);
  opt->add_option("--plan", o.plan, "Input plan JSON")->required()->check(CLI::ExistingFile);
  opt->add_option("--out", o.out, "Output plan JSON")->required();
  opt->add_option("--loss-out", o.loss_out, "Loss curve CSV (default: <out>.loss.csv)");
  opt->add_option("--demand", o.demand, "Demand archive (defaults to the config's dataset)");
  opt->add_option("--iterations", o.iterations, "Iterations");
  opt->add_option("--mode", o.mode, "relocate | add_only | remove_only");
  opt->add_flag("--deterministic", o.deterministic, "Omit wall-clock timestamps");

  auto* score = app.add_subcommand("score", "Write the four strategy layers and the comprehensive score");
  common(score);
  score->add_option("--out", o.out, "Output directory")->required();
  score->add_option("--plan", o.plan, "User plan (defaults to the config's existing plan)");
  score->add_option("--distilled", o.distilled, "Optimized plan used as distilled demand");
  score->add_option("--demand", o.demand, "Demand archive used when distilling");
  score->add_option("--weights", o.weights, "P1,P2,P3,P4");

  auto* rec = app.add_subcommand("recommend", "Pick diverse top-k cells from a comprehensive score CSV");
  common(rec);
  rec->add_option("--scores", o.scores, "comprehensive.csv")->required()->check(CLI::ExistingFile);
  rec->add_option("--out", o.out, "Output CSV (stdout when omitted)");
  rec->add_option("--k", o.top_k, "Number of recommendations");
  rec->add_option("--min-separation", o.min_separation, "Meters between recommendations");

  auto* serve = app.add_subcommand("serve", "Run the HTTP planning service");
  common(serve);
  serve->add_option("--host", o.host, "Listen address");
  serve->add_option("--port", o.port, "Listen port (0 picks one)");
  serve->add_option("--log-dir", o.log_dir, "Directory for per-session interaction logs");

  auto* validate = app.add_subcommand("validate", "Check a plan's capacity constraints");
  common(validate, false);
  validate->add_option("--plan", o.plan, "Plan JSON")->required();
  validate->add_flag("--partial", o.partial, "Skip the total-supply check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (ingest->parsed()) return cmd_ingest(o, out, err);
    if (init->parsed()) return cmd_init(o, out, err);
    if (opt->parsed()) return cmd_optimize(o, out, err);
    if (score->parsed()) return cmd_score(o, out, err);
    if (rec->parsed()) return cmd_recommend(o, out);
    if (serve->parsed()) return cmd_serve(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace vertiplan::cli
