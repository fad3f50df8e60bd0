#include "vslcav/feed_http.hpp"

#include <chrono>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace vslcav {

double wall_clock_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

struct FeedHttpServer::Impl {
  httplib::Server server;
};

namespace {

int status_for(FeedErrorKind kind) {
  switch (kind) {
    case FeedErrorKind::OutOfOrder: return 409;
    case FeedErrorKind::UnknownGantry: return 404;
    case FeedErrorKind::Unavailable: return 503;
    default: return 400;
  }
}

void error_body(httplib::Response& res, int status, const std::string& kind, const std::string& msg) {
  res.status = status;
  nlohmann::json j{{"error", kind}, {"message", msg}};
  res.set_content(j.dump(), "application/json");
}

}  // namespace

FeedHttpServer::FeedHttpServer(FeedService& service, Clock clock) : impl_(std::make_unique<Impl>()) {
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->server.Get(kSnapshotPath, [&service](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(*service.serve(), "application/json");
    } catch (const FeedError& e) {
      error_body(res, status_for(e.kind()), to_string(e.kind()), e.what());
    }
  });
  impl_->server.Post(kUpdatePath, [&service, clock](const httplib::Request& req,
                                                    httplib::Response& res) {
    GantryUpdate u;
    try {
      const auto j = nlohmann::json::parse(req.body);
      u.gantry_id = j.at("gantry_id").get<std::string>();
      u.posted_speed_mph = j.at("posted_speed").get<double>();
      u.effective_at = j.contains("effective_at") ? j.at("effective_at").get<double>() : clock();
      if (j.contains("triggered")) {
        u.triggered = j.at("triggered").get<bool>();
      } else {
        const Gantry* g = nullptr;
        for (const auto& x : service.store().gantries()) {
          if (x.id == u.gantry_id) g = &x;
        }
        u.triggered = g != nullptr && u.posted_speed_mph < g->default_limit_mph;
      }
    } catch (const nlohmann::json::exception& e) {
      error_body(res, 400, "bad_request", e.what());
      return;
    }
    try {
      service.mirror(u);
      res.set_content(nlohmann::json{{"stored", true}, {"effective_at", u.effective_at}}.dump(),
                      "application/json");
    } catch (const FeedError& e) {
      error_body(res, status_for(e.kind()), to_string(e.kind()), e.what());
    }
  });
}

FeedHttpServer::~FeedHttpServer() { stop(); }

int FeedHttpServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void FeedHttpServer::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port))
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  port_ = port;
  impl_->server.listen_after_bind();
}

void FeedHttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

SnapshotScheduler::SnapshotScheduler(FeedService& service, Clock clock)
    : service_(service), clock_(std::move(clock)) {}

SnapshotScheduler::~SnapshotScheduler() { stop(); }

void SnapshotScheduler::start() {
  running_ = true;
  thread_ = std::thread([this] {
    while (running_) {
      service_.tick(clock_());
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
}

void SnapshotScheduler::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

HttpTransport::HttpTransport(std::string host, int port, double timeout_s)
    : host_(std::move(host)), port_(port), timeout_s_(timeout_s) {}

std::string HttpTransport::get() {
  httplib::Client cli(host_, port_);
  const auto usec = static_cast<long>(timeout_s_ * 1e6);
  cli.set_connection_timeout(0, usec);
  cli.set_read_timeout(0, usec);
  auto res = cli.Get(kSnapshotPath);
  if (!res) throw FeedError(FeedErrorKind::Timeout, "snapshot request failed: " + httplib::to_string(res.error()));
  if (res->status == 503) throw FeedError(FeedErrorKind::Unavailable, "service unavailable");
  if (res->status != 200)
    throw FeedError(FeedErrorKind::Parse, "unexpected HTTP status " + std::to_string(res->status));
  return res->body;
}

std::pair<int, std::string> post_update(const std::string& host, int port, const GantryUpdate& u,
                                        bool include_triggered, bool include_time) {
  nlohmann::json j{{"gantry_id", u.gantry_id}, {"posted_speed", u.posted_speed_mph}};
  if (include_triggered) j["triggered"] = u.triggered;
  if (include_time) j["effective_at"] = u.effective_at;
  httplib::Client cli(host, port);
  auto res = cli.Post(kUpdatePath, j.dump(), "application/json");
  if (!res) return {0, httplib::to_string(res.error())};
  return {res->status, res->body};
}

}  // namespace vslcav
