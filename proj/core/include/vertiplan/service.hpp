#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vertiplan/dataset.hpp"

namespace vertiplan {

struct ServiceRequest {
  std::string method;  // "GET", "POST", ...
  std::string path;    // without the query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  std::filesystem::path log_dir;  // when set, each session appends <id>.jsonl here
  int job_workers = 1;
};

// Transport-independent planning API. Requests for different sessions run in
// parallel; requests on one session are serialized. Optimization jobs run on
// background workers and never touch session state.
//
//   GET  /health
//   GET  /datasets
//   POST /sessions                       {dataset?, weights?, learning_rate?, top_k?, min_separation?}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/scores?layer=demand|coverage|connectivity|cost|comprehensive
//   GET  /sessions/{id}/recommendations
//   GET  /sessions/{id}/log
//   POST /sessions/{id}/select           {row, col}
//   POST /sessions/{id}/weights          {weights: [P1, P2, P3, P4]}
//   POST /optimize                       {dataset?, init?, optimizer?, initial_plan?}
//   GET  /optimize/{job}
//   GET  /optimize/{job}/plan
//
// Errors carry {code, message, detail}.
class PlanningService {
 public:
  explicit PlanningService(ServiceOptions options = {});
  ~PlanningService();
  PlanningService(const PlanningService&) = delete;
  PlanningService& operator=(const PlanningService&) = delete;

  // Registers a bundle under config.dataset.name, replacing any previous one.
  void add_dataset(Dataset dataset);
  std::vector<std::string> dataset_names() const;

  ServiceResponse handle(const ServiceRequest& request);

  // Blocks until the job leaves queued/running or the timeout passes.
  // Returns false on timeout or for an unknown job.
  bool wait_for_job(const std::string& job_id, std::chrono::milliseconds timeout);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "a=1&b=two" into a map, percent-decoding keys and values.
std::map<std::string, std::string> parse_query(const std::string& query);

}  // namespace vertiplan
