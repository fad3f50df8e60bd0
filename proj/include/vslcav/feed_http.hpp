#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "vslcav/feed.hpp"

namespace vslcav {

inline constexpr const char* kSnapshotPath = "/vsl";
inline constexpr const char* kUpdatePath = "/updates";

using Clock = std::function<double()>;

/// Seconds since the Unix epoch.
double wall_clock_seconds();

/// Socket front-end for a FeedService.
///
///   GET  /vsl      200 snapshot JSON, 503 before the first build
///   POST /updates  body {"gantry_id", "posted_speed", "triggered"?, "effective_at"?}
///                  200 stored, 400 invalid, 404 unknown gantry, 409 out of order
///
/// `effective_at` defaults to clock(); `triggered` defaults to posted < default.
class FeedHttpServer {
 public:
  FeedHttpServer(FeedService& service, Clock clock);
  ~FeedHttpServer();
  FeedHttpServer(const FeedHttpServer&) = delete;
  FeedHttpServer& operator=(const FeedHttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks an ephemeral
  /// port. Throws std::runtime_error if the port cannot be bound.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

/// Rebuilds the service snapshot on its cadence against a wall clock.
class SnapshotScheduler {
 public:
  SnapshotScheduler(FeedService& service, Clock clock);
  ~SnapshotScheduler();
  void start();
  void stop();

 private:
  FeedService& service_;
  Clock clock_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

/// GET http://host:port/vsl.
class HttpTransport : public SnapshotTransport {
 public:
  HttpTransport(std::string host, int port, double timeout_s = 2.0);
  std::string get() override;

 private:
  std::string host_;
  int port_;
  double timeout_s_;
};

/// POSTs one update; returns the HTTP status and response body.
std::pair<int, std::string> post_update(const std::string& host, int port, const GantryUpdate& u,
                                        bool include_triggered = true, bool include_time = true);

}  // namespace vslcav
