#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vslcav/corridor.hpp"

namespace vslcav {

enum class FeedErrorKind { OutOfOrder, UnknownGantry, InvalidUpdate, Unavailable, Parse, Timeout };

const char* to_string(FeedErrorKind kind);

class FeedError : public std::runtime_error {
 public:
  FeedError(FeedErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FeedErrorKind kind() const { return kind_; }

 private:
  FeedErrorKind kind_;
};

/// A change pushed by traffic operations to one gantry.
struct GantryUpdate {
  std::string gantry_id;
  double posted_speed_mph = kMaxPostedMph;
  bool triggered = false;  // posting below the gantry's default limit
  double effective_at = 0.0;

  bool operator==(const GantryUpdate&) const = default;
};

struct VslRow {
  std::string gantry_id;
  double mile_marker = 0.0;
  double default_speed_mph = kMaxPostedMph;
  bool triggered = false;
  double posted_speed_mph = kMaxPostedMph;
  std::optional<double> last_update;  // empty when the default applies

  bool operator==(const VslRow&) const = default;
};

struct VslSnapshot {
  double generated_at = 0.0;
  std::vector<VslRow> rows;

  const VslRow* find(std::string_view gantry_id) const;
  bool operator==(const VslSnapshot&) const = default;
};

struct FeedConfig {
  double cadence_s = 15.0;
  double window_s = 86400.0;
};

/// Database mirror of every gantry update. Appends are serialized; updates
/// must arrive in non-decreasing `effective_at` order per gantry.
class UpdateStore {
 public:
  explicit UpdateStore(std::vector<Gantry> gantries);

  /// Throws FeedError(UnknownGantry | OutOfOrder | InvalidUpdate).
  void mirror(const GantryUpdate& update);

  /// Most recent update with effective_at in (now - window, now].
  std::optional<GantryUpdate> latest_in_window(const std::string& gantry_id, double now,
                                               double window_s) const;

  const std::vector<Gantry>& gantries() const { return gantries_; }
  std::size_t size() const;

 private:
  std::vector<Gantry> gantries_;
  std::map<std::string, std::vector<GantryUpdate>> history_;
  mutable std::mutex mutex_;
};

/// Periodic join of defaults and recent updates. Requires window_s > 0.
VslSnapshot build_snapshot(const UpdateStore& store, std::span<const Gantry> gantries, double now,
                           double window_s);

std::string serialize_snapshot(const VslSnapshot& snapshot);
/// All-or-nothing; throws FeedError(Parse) on any malformed field.
VslSnapshot parse_snapshot(std::string_view payload);

/// Server side of the feed: mirrors updates, rebuilds a cached snapshot on a
/// fixed cadence and serves the cached bytes without querying the store.
/// Readers always see one complete snapshot (old or new).
class FeedService {
 public:
  FeedService(std::vector<Gantry> gantries, FeedConfig config = {});

  void mirror(const GantryUpdate& update) { store_.mirror(update); }

  /// Rebuilds when no snapshot exists yet or a cadence boundary has passed.
  /// generated_at is aligned down to a multiple of the cadence.
  /// Returns true if a rebuild happened.
  bool tick(double now);

  /// Unconditional rebuild stamped at `now`.
  void rebuild(double now);

  /// Cached serialization; throws FeedError(Unavailable) before the first build.
  std::shared_ptr<const std::string> serve() const;
  std::shared_ptr<const VslSnapshot> snapshot() const;

  const FeedConfig& config() const { return config_; }
  const UpdateStore& store() const { return store_; }
  std::uint64_t build_count() const;

 private:
  struct Cached {
    std::shared_ptr<const VslSnapshot> snapshot;
    std::shared_ptr<const std::string> payload;
  };

  FeedConfig config_;
  UpdateStore store_;
  mutable std::mutex cache_mutex_;
  Cached cached_;
  std::uint64_t builds_ = 0;
};

/// Raw byte fetch of the single snapshot URL.
class SnapshotTransport {
 public:
  virtual ~SnapshotTransport() = default;
  /// Throws FeedError(Unavailable) when the server has nothing to serve.
  virtual std::string get() = 0;
};

class InProcessTransport : public SnapshotTransport {
 public:
  explicit InProcessTransport(const FeedService& service) : service_(service) {}
  std::string get() override { return *service_.serve(); }

 private:
  const FeedService& service_;
};

/// Interval of total connectivity loss.
struct Outage {
  double start = 0.0;
  double end = 0.0;
};

struct FaultProfile {
  double latency_s = 0.0;
  double jitter_s = 0.0;  // uniform extra latency in [0, jitter_s]
  double loss_probability = 0.0;
  double timeout_s = 2.0;
  std::vector<Outage> outages;

  void validate() const;
  bool in_outage(double t) const;
};

struct FetchResult {
  double requested_at = 0.0;
  double completed_at = 0.0;
  std::shared_ptr<const VslSnapshot> snapshot;  // null on failure
  std::optional<FeedErrorKind> failure;

  bool ok() const { return snapshot != nullptr; }
};

/// What gps2vsl polls for posted speeds. Never blocks.
class SnapshotSource {
 public:
  virtual ~SnapshotSource() = default;
  virtual void request(double now) = 0;
  /// Results whose completion time is <= now, in completion order.
  virtual std::vector<FetchResult> poll(double now) = 0;
  virtual bool in_flight() const = 0;
};

/// Vehicle-side polling client. The transport is read when a request is
/// issued; the outcome is delivered after the profile's latency (or its
/// timeout when the request is lost).
class FeedClient : public SnapshotSource {
 public:
  FeedClient(std::shared_ptr<SnapshotTransport> transport, FaultProfile profile,
             std::uint64_t seed = 0);

  void request(double now) override;
  std::vector<FetchResult> poll(double now) override;
  bool in_flight() const override { return !pending_.empty(); }

  /// Synchronous fetch: issues a request at `now` and returns its outcome
  /// together with the completion time.
  FetchResult fetch_snapshot(double now);

  const FaultProfile& profile() const { return profile_; }

 private:
  FetchResult perform(double now);

  std::shared_ptr<SnapshotTransport> transport_;
  FaultProfile profile_;
  std::mt19937_64 rng_;
  std::vector<FetchResult> pending_;
};

}  // namespace vslcav
