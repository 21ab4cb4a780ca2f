#include "vertiplan/service.hpp"

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <shared_mutex>
#include <thread>
#include <unordered_map>

#include "vertiplan/error.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/optimizer.hpp"

namespace vertiplan {

namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::string detail;
};

[[noreturn]] void fail(int status, std::string code, std::string message, std::string detail = {}) {
  throw HttpError{status, std::move(code), std::move(message), std::move(detail)};
}

ServiceResponse error_response(const HttpError& e) {
  return {e.status, {{"code", e.code}, {"message", e.message}, {"detail", e.detail}}};
}

json recommendations_json(const std::vector<Recommendation>& recs) {
  auto out = json::array();
  for (const auto& r : recs) {
    out.push_back({{"row", r.cell.row}, {"col", r.cell.col}, {"score", r.score}, {"features", r.features}});
  }
  return out;
}

json grid_meta(const GridSpec& spec) {
  return {{"rows", spec.rows}, {"cols", spec.cols}, {"cell_size", spec.cell_size}};
}

json summary_json(const RealMatrix& m) {
  const auto flat = m.flat();
  const auto [lo, hi] = std::minmax_element(flat.begin(), flat.end());
  const double mean = std::accumulate(flat.begin(), flat.end(), 0.0) / static_cast<double>(flat.size());
  return {{"min", *lo}, {"max", *hi}, {"mean", mean}};
}

json plan_json(const VertiportLayout& layout, const CapacityPolicy& policy) {
  auto sites = json::array();
  for (int i = 0; i < layout.counts.rows(); ++i) {
    for (int j = 0; j < layout.counts.cols(); ++j) {
      if (layout.counts(i, j) > 0) sites.push_back({{"row", i}, {"col", j}, {"count", layout.counts(i, j)}});
    }
  }
  return {{"sites", std::move(sites)}, {"sites_used", layout.total_sites()}, {"site_budget", policy.site_budget}};
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) fail(400, "bad_request", "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(400, "bad_request", "request body is not valid JSON", e.what());
  }
}

WeightVector weights_from(const json& j) {
  WeightVector w;
  try {
    w.values = j.get<std::array<double, 4>>();
  } catch (const json::exception& e) {
    fail(400, "bad_request", "weights must be an array of four numbers", e.what());
  }
  try {
    w.validate();
  } catch (const InputError& e) {
    fail(400, "bad_request", "invalid weights", e.what());
  }
  return w;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto piece = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!piece.empty()) parts.push_back(piece);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

std::string random_token(const char* prefix) {
  static std::mutex mu;
  static std::mt19937_64 engine{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%016llx", prefix, static_cast<unsigned long long>(engine()));
  return buf;
}

struct Session {
  std::string id;
  std::string dataset;
  std::mutex mu;
  RecommendationSession state;
  std::uint64_t version = 1;
  std::optional<InteractionLogWriter> log;

  Session(std::string id_, std::string dataset_, std::shared_ptr<const SessionInputs> inputs, RecommenderConfig cfg)
      : id(std::move(id_)), dataset(std::move(dataset_)), state(std::move(inputs), cfg) {}
};

enum class JobStatus { queued, running, done, failed };

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "unknown";
}

struct JobSpec {
  std::shared_ptr<const Dataset> dataset;
  InitStrategy init;
  OptimizerConfig optimizer;
  std::optional<PlanDocument> initial_plan;
};

struct Job {
  std::string id;
  JobSpec spec;
  JobStatus status = JobStatus::queued;
  std::string error;
  std::optional<OptimizeResult> result;
  std::optional<PlanDocument> plan;
};

}  // namespace

struct PlanningService::Impl {
  ServiceOptions options;

  mutable std::shared_mutex datasets_mu;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets;

  std::shared_mutex sessions_mu;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex jobs_mu;
  std::condition_variable jobs_cv;
  std::unordered_map<std::string, std::shared_ptr<Job>> jobs;
  std::deque<std::shared_ptr<Job>> queue;
  bool stopping = false;
  std::vector<std::thread> workers;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
    const int n = std::max(1, options.job_workers);
    for (int w = 0; w < n; ++w) workers.emplace_back([this] { worker_loop(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(jobs_mu);
      stopping = true;
    }
    jobs_cv.notify_all();
    for (auto& t : workers) t.join();
  }

  std::shared_ptr<const Dataset> dataset_named(const json& body) {
    std::shared_lock lock(datasets_mu);
    if (datasets.empty()) fail(404, "not_found", "no dataset is loaded");
    if (!body.contains("dataset")) {
      if (datasets.size() == 1) return datasets.begin()->second;
      fail(400, "bad_request", "several datasets are loaded; name one with \"dataset\"");
    }
    const auto name = body.at("dataset").is_string() ? body.at("dataset").get<std::string>() : std::string{};
    auto it = datasets.find(name);
    if (it == datasets.end()) fail(404, "not_found", "unknown dataset '" + name + "'");
    return it->second;
  }

  std::shared_ptr<Session> session_named(const std::string& id) {
    std::shared_lock lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) fail(404, "not_found", "unknown session '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Job> job_named(const std::string& id) {
    std::lock_guard lock(jobs_mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) fail(404, "not_found", "unknown job '" + id + "'");
    return it->second;
  }

  // Caller holds the session mutex.
  static json session_json(const Session& s) {
    const auto& st = s.state;
    return {{"id", s.id},
            {"dataset", s.dataset},
            {"version", s.version},
            {"grid", grid_meta(st.inputs().spec)},
            {"weights", st.weights().values},
            {"learning_rate", st.config().learning_rate},
            {"top_k", st.config().top_k},
            {"min_separation", st.config().min_separation},
            {"plan", plan_json(st.plan(), st.inputs().policy)},
            {"budget_exhausted", st.budget_exhausted()},
            {"interactions", st.log().size()},
            {"recommendations", recommendations_json(st.recommendations())}};
  }

  ServiceResponse create_session(const json& body) {
    auto dataset = dataset_named(body);
    auto cfg = dataset->config.recommender;
    if (body.contains("weights")) cfg.initial_weights = weights_from(body.at("weights"));
    try {
      if (body.contains("learning_rate")) cfg.learning_rate = body.at("learning_rate").get<double>();
      if (body.contains("top_k")) cfg.top_k = body.at("top_k").get<int>();
      if (body.contains("min_separation")) cfg.min_separation = body.at("min_separation").get<double>();
      cfg.validate();
    } catch (const json::exception& e) {
      fail(400, "bad_request", "malformed session options", e.what());
    } catch (const InputError& e) {
      fail(400, "bad_request", "invalid session options", e.what());
    }

    const auto id = random_token("s");
    auto session = std::make_shared<Session>(id, dataset->config.dataset.name, dataset->inputs, cfg);
    if (!options.log_dir.empty()) session->log.emplace(options.log_dir / (id + ".jsonl"));

    json out;
    {
      std::lock_guard lock(session->mu);
      out = session_json(*session);
      out["summary"] = summary_json(session->state.comprehensive());
    }
    std::unique_lock lock(sessions_mu);
    sessions.emplace(id, session);
    return {201, out};
  }

  static ServiceResponse scores(Session& s, const std::map<std::string, std::string>& query) {
    auto it = query.find("layer");
    if (it == query.end()) fail(400, "bad_request", "missing query parameter 'layer'");
    const auto& name = it->second;
    std::lock_guard lock(s.mu);
    RealMatrix values;
    if (name == "comprehensive") {
      values = s.state.comprehensive();
    } else {
      try {
        values = s.state.layer(strategy_from_string(name)).values;
      } catch (const InputError&) {
        fail(400, "bad_request", "unknown layer '" + name + "'",
             "expected demand, coverage, connectivity, cost or comprehensive");
      }
    }
    const auto flat = values.flat();
    return {200,
            {{"layer", name},
             {"rows", values.rows()},
             {"cols", values.cols()},
             {"version", s.version},
             {"values", std::vector<double>(flat.begin(), flat.end())}}};
  }

  static ServiceResponse select(Session& s, const json& body) {
    Cell cell;
    try {
      cell = {body.at("row").get<int>(), body.at("col").get<int>()};
    } catch (const json::exception& e) {
      fail(400, "bad_request", "select needs integer 'row' and 'col'", e.what());
    }
    std::lock_guard lock(s.mu);
    try {
      const auto& record = s.state.select(cell);
      ++s.version;
      if (s.log) s.log->append(record);
      auto out = session_json(s);
      out["interaction"] = interaction_to_json(record);
      return {200, out};
    } catch (const BudgetExhaustedError& e) {
      fail(409, "budget_exhausted", "site budget exhausted", e.what());
    } catch (const InputError& e) {
      fail(400, "bad_request", "invalid selection", e.what());
    }
  }

  static ServiceResponse set_weights(Session& s, const json& body) {
    if (!body.contains("weights")) fail(400, "bad_request", "missing 'weights'");
    const auto w = weights_from(body.at("weights"));
    std::lock_guard lock(s.mu);
    s.state.set_weights(w);
    ++s.version;
    return {200, session_json(s)};
  }

  ServiceResponse submit_job(const json& body) {
    JobSpec spec;
    spec.dataset = dataset_named(body);
    const auto& cfg = spec.dataset->config;
    spec.init = cfg.init;
    spec.optimizer = cfg.optimizer;
    try {
      if (body.contains("init")) {
        const auto& j = body.at("init");
        if (j.contains("algorithm")) spec.init.algorithm = cluster_algorithm_from_string(j.at("algorithm").get<std::string>());
        if (j.contains("k")) spec.init.target_sites = j.at("k").get<int>();
        if (j.contains("over_cluster")) spec.init.over_cluster = j.at("over_cluster").get<int>();
        if (j.contains("seed")) spec.init.seed = j.at("seed").get<std::uint64_t>();
      }
      if (body.contains("optimizer")) {
        const auto& j = body.at("optimizer");
        if (j.contains("iterations")) spec.optimizer.iterations = j.at("iterations").get<int>();
        if (j.contains("kernel_radius")) spec.optimizer.kernel_radius = j.at("kernel_radius").get<int>();
        if (j.contains("tabu_tenure")) spec.optimizer.tabu_tenure = j.at("tabu_tenure").get<int>();
        if (j.contains("mode")) spec.optimizer.mode = optimizer_mode_from_string(j.at("mode").get<std::string>());
      }
      if (body.contains("initial_plan")) spec.initial_plan = plan_from_json(body.at("initial_plan"));
      spec.init.validate();
      spec.optimizer.validate();
    } catch (const json::exception& e) {
      fail(400, "bad_request", "malformed optimize request", e.what());
    } catch (const std::runtime_error& e) {
      fail(400, "bad_request", "invalid optimize request", e.what());
    } catch (const InputError& e) {
      fail(400, "bad_request", "invalid optimize request", e.what());
    }

    auto job = std::make_shared<Job>();
    job->id = random_token("j");
    job->spec = std::move(spec);
    {
      std::lock_guard lock(jobs_mu);
      jobs.emplace(job->id, job);
      queue.push_back(job);
    }
    jobs_cv.notify_one();
    return {202, {{"job", job->id}, {"status", to_string(JobStatus::queued)}}};
  }

  json job_json(const Job& job) {
    json out{{"job", job.id}, {"status", to_string(job.status)}};
    if (job.status == JobStatus::failed) out["error"] = job.error;
    if (job.result) {
      auto curve = json::array();
      for (const auto& p : job.result->loss_history) curve.push_back({p.iteration, p.loss});
      out["loss_history"] = std::move(curve);
      out["best_loss"] = job.result->best_loss;
      out["best_iteration"] = job.result->best_iteration;
    }
    if (job.plan) out["plan"] = plan_to_json(*job.plan);
    return out;
  }

  void run_job(Job& job) {
    const auto& ds = *job.spec.dataset;
    const auto& cfg = ds.config;
    PlanDocument plan;
    plan.grid = cfg.grid;
    plan.policy = cfg.policy;
    plan.geo = cfg.geo;
    plan.provenance.source = "optimize:" + to_string(job.spec.optimizer.mode);
    SupplyMatrix initial;
    if (job.spec.initial_plan) {
      initial = supply_from_layout(job.spec.initial_plan->layout, cfg.policy);
    } else {
      const auto init = initialize_layout(ds.demand.points, job.spec.init, cfg.grid);
      initial = supply_from_layout(init.layout.layout, cfg.policy);
      plan.provenance.seed = job.spec.init.seed;
    }
    auto result = optimize(ds.demand.demand, initial, cfg.grid, cfg.policy, job.spec.optimizer);
    plan.layout = layout_from_supply(result.best_supply, cfg.policy);
    plan.loss_history = result.loss_history;
    plan.provenance.created_at = utc_now_iso8601();
    std::lock_guard lock(jobs_mu);
    job.result = std::move(result);
    job.plan = std::move(plan);
  }

  void worker_loop() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(jobs_mu);
        jobs_cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = queue.front();
        queue.pop_front();
        job->status = JobStatus::running;
      }
      jobs_cv.notify_all();
      std::string error;
      try {
        run_job(*job);
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(jobs_mu);
        if (error.empty()) {
          job->status = JobStatus::done;
        } else {
          job->status = JobStatus::failed;
          job->error = error;
        }
      }
      jobs_cv.notify_all();
    }
  }

  ServiceResponse route(const ServiceRequest& req) {
    const auto parts = split_path(req.path);
    const auto& m = req.method;
    const auto n = parts.size();

    if (n == 1 && parts[0] == "health" && m == "GET") {
      return {200, {{"status", "ok"}}};
    }
    if (n == 1 && parts[0] == "datasets" && m == "GET") {
      std::shared_lock lock(datasets_mu);
      auto out = json::array();
      for (const auto& [name, ds] : datasets) {
        out.push_back({{"name", name},
                       {"grid", grid_meta(ds->config.grid)},
                       {"time_bins", ds->config.grid.time_bins},
                       {"site_budget", ds->config.policy.site_budget},
                       {"demand_total", ds->demand.demand.total()}});
      }
      return {200, {{"datasets", out}}};
    }
    if (n >= 1 && parts[0] == "sessions") {
      if (n == 1) {
        if (m != "POST") fail(405, "method_not_allowed", m + " is not supported on /sessions");
        return create_session(parse_body(req.body));
      }
      auto session = session_named(parts[1]);
      if (n == 2 && m == "GET") {
        std::lock_guard lock(session->mu);
        return {200, session_json(*session)};
      }
      if (n == 3) {
        const auto& action = parts[2];
        if (action == "scores" && m == "GET") return scores(*session, req.query);
        if (action == "recommendations" && m == "GET") {
          std::lock_guard lock(session->mu);
          return {200,
                  {{"version", session->version},
                   {"recommendations", recommendations_json(session->state.recommendations())}}};
        }
        if (action == "log" && m == "GET") {
          std::lock_guard lock(session->mu);
          auto out = json::array();
          for (const auto& r : session->state.log()) out.push_back(interaction_to_json(r));
          return {200, {{"version", session->version}, {"interactions", out}}};
        }
        if (action == "select" && m == "POST") return select(*session, parse_body(req.body));
        if (action == "weights" && m == "POST") return set_weights(*session, parse_body(req.body));
      }
    }
    if (n >= 1 && parts[0] == "optimize") {
      if (n == 1) {
        if (m != "POST") fail(405, "method_not_allowed", m + " is not supported on /optimize");
        return submit_job(parse_body(req.body));
      }
      auto job = job_named(parts[1]);
      std::lock_guard lock(jobs_mu);
      if (n == 2 && m == "GET") return {200, job_json(*job)};
      if (n == 3 && parts[2] == "plan" && m == "GET") {
        if (!job->plan) fail(409, "not_ready", "job " + job->id + " is " + to_string(job->status), job->error);
        return {200, plan_to_json(*job->plan)};
      }
    }
    fail(404, "not_found", "no route for " + m + " " + req.path);
  }
};

PlanningService::PlanningService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (!impl_->options.log_dir.empty()) std::filesystem::create_directories(impl_->options.log_dir);
}

PlanningService::~PlanningService() = default;

void PlanningService::add_dataset(Dataset dataset) {
  auto name = dataset.config.dataset.name;
  auto shared = std::make_shared<const Dataset>(std::move(dataset));
  std::unique_lock lock(impl_->datasets_mu);
  impl_->datasets[name] = std::move(shared);
}

std::vector<std::string> PlanningService::dataset_names() const {
  std::shared_lock lock(impl_->datasets_mu);
  std::vector<std::string> out;
  for (const auto& [name, ds] : impl_->datasets) out.push_back(name);
  return out;
}

ServiceResponse PlanningService::handle(const ServiceRequest& request) {
  try {
    return impl_->route(request);
  } catch (const HttpError& e) {
    return error_response(e);
  } catch (const InputError& e) {
    return error_response({400, "bad_request", "invalid input", e.what()});
  } catch (const std::exception& e) {
    return error_response({500, "internal", "internal error", e.what()});
  }
}

bool PlanningService::wait_for_job(const std::string& job_id, std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->jobs_mu);
  auto it = impl_->jobs.find(job_id);
  if (it == impl_->jobs.end()) return false;
  auto job = it->second;
  return impl_->jobs_cv.wait_for(lock, timeout, [&] {
    return job->status == JobStatus::done || job->status == JobStatus::failed;
  });
}

std::map<std::string, std::string> parse_query(const std::string& query) {
  auto decode = [](std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '+') {
        out += ' ';
      } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
                 std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
        out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
        i += 2;
      } else {
        out += s[i];
      }
    }
    return out;
  };
  std::map<std::string, std::string> out;
  std::string_view rest = query;
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto piece = rest.substr(0, amp);
    if (!piece.empty()) {
      const auto eq = piece.find('=');
      if (eq == std::string_view::npos) {
        out[decode(piece)] = "";
      } else {
        out[decode(piece.substr(0, eq))] = decode(piece.substr(eq + 1));
      }
    }
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
  return out;
}

}  // namespace vertiplan
