#pragma once

#include <memory>
#include <string>

#include "vertiplan/service.hpp"

namespace vertiplan {

// Binds a PlanningService to an HTTP listener. JSON in, JSON out.
class HttpServer {
 public:
  explicit HttpServer(PlanningService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoError on failure.
  int bind(const std::string& host, int port);

  // Serves until stop(). Call after bind().
  void listen();

  // listen() on a background thread; returns once the socket accepts.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vertiplan
