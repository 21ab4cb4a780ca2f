#include "vertiplan/http_server.hpp"

#include <thread>

#include <httplib.h>

#include "vertiplan/error.hpp"

namespace vertiplan {

struct HttpServer::Impl {
  PlanningService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(PlanningService& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ServiceRequest request;
      request.method = req.method;
      request.path = req.path;
      for (const auto& [key, value] : req.params) request.query[key] = value;
      request.body = req.body;
      const auto response = service.handle(request);
      res.status = response.status;
      res.set_content(response.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  }
};

HttpServer::HttpServer(PlanningService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace vertiplan
