#include "vslcav/feed.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace vslcav {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kTimeEps = 1e-9;

double unit_uniform(std::mt19937_64& rng) {
  // 53 random mantissa bits; stable across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const char* to_string(FeedErrorKind kind) {
  switch (kind) {
    case FeedErrorKind::OutOfOrder: return "out_of_order";
    case FeedErrorKind::UnknownGantry: return "unknown_gantry";
    case FeedErrorKind::InvalidUpdate: return "invalid_update";
    case FeedErrorKind::Unavailable: return "unavailable";
    case FeedErrorKind::Parse: return "parse_error";
    case FeedErrorKind::Timeout: return "timeout";
  }
  return "unknown";
}

const VslRow* VslSnapshot::find(std::string_view gantry_id) const {
  for (const auto& row : rows) {
    if (row.gantry_id == gantry_id) return &row;
  }
  return nullptr;
}

UpdateStore::UpdateStore(std::vector<Gantry> gantries) : gantries_(std::move(gantries)) {
  for (const auto& g : gantries_) history_[g.id];
}

void UpdateStore::mirror(const GantryUpdate& u) {
  std::lock_guard lock(mutex_);
  auto it = history_.find(u.gantry_id);
  if (it == history_.end())
    throw FeedError(FeedErrorKind::UnknownGantry, "unknown gantry '" + u.gantry_id + "'");
  const auto g = std::find_if(gantries_.begin(), gantries_.end(),
                              [&](const Gantry& x) { return x.id == u.gantry_id; });
  if (!std::isfinite(u.posted_speed_mph) || !std::isfinite(u.effective_at) ||
      u.posted_speed_mph < kMinPostedMph || u.posted_speed_mph > kMaxPostedMph)
    throw FeedError(FeedErrorKind::InvalidUpdate, "posted speed outside [30, 70] mph");
  if (u.triggered && !(u.posted_speed_mph < g->default_limit_mph))
    throw FeedError(FeedErrorKind::InvalidUpdate,
                    "triggered update must post below the default limit of " + u.gantry_id);
  if (!u.triggered && u.posted_speed_mph != g->default_limit_mph)
    throw FeedError(FeedErrorKind::InvalidUpdate,
                    "untriggered update must post the default limit of " + u.gantry_id);
  auto& hist = it->second;
  if (!hist.empty() && u.effective_at < hist.back().effective_at)
    throw FeedError(FeedErrorKind::OutOfOrder, "update for " + u.gantry_id + " at t=" +
                                                   std::to_string(u.effective_at) +
                                                   " precedes the stored t=" +
                                                   std::to_string(hist.back().effective_at));
  hist.push_back(u);
}

std::optional<GantryUpdate> UpdateStore::latest_in_window(const std::string& gantry_id, double now,
                                                          double window_s) const {
  std::lock_guard lock(mutex_);
  auto it = history_.find(gantry_id);
  if (it == history_.end()) return std::nullopt;
  const auto& hist = it->second;
  for (auto r = hist.rbegin(); r != hist.rend(); ++r) {
    if (r->effective_at > now) continue;
    if (r->effective_at > now - window_s) return *r;
    break;
  }
  return std::nullopt;
}

std::size_t UpdateStore::size() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, hist] : history_) n += hist.size();
  return n;
}

VslSnapshot build_snapshot(const UpdateStore& store, std::span<const Gantry> gantries, double now,
                           double window_s) {
  if (!(window_s > 0)) throw PreconditionError("build_snapshot: window must be positive");
  VslSnapshot snap;
  snap.generated_at = now;
  snap.rows.reserve(gantries.size());
  for (const auto& g : gantries) {
    VslRow row{g.id, g.mile_marker, g.default_limit_mph, false, g.default_limit_mph, std::nullopt};
    if (auto u = store.latest_in_window(g.id, now, window_s)) {
      row.triggered = u->triggered;
      row.posted_speed_mph = u->posted_speed_mph;
      row.last_update = u->effective_at;
    }
    snap.rows.push_back(std::move(row));
  }
  return snap;
}

std::string serialize_snapshot(const VslSnapshot& s) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : s.rows) {
    ordered_json j;
    j["gantry_id"] = r.gantry_id;
    j["mile_marker"] = r.mile_marker;
    j["default_speed"] = r.default_speed_mph;
    j["triggered"] = r.triggered;
    j["posted_speed"] = r.posted_speed_mph;
    j["last_update"] = r.last_update ? ordered_json(*r.last_update) : ordered_json(nullptr);
    j["generated_at"] = s.generated_at;
    rows.push_back(std::move(j));
  }
  ordered_json doc;
  doc["format"] = "vsl-snapshot/1";
  doc["units"] = {{"speed", "mph"}, {"mile_marker", "mi"}, {"time", "s"}};
  doc["generated_at"] = s.generated_at;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

VslSnapshot parse_snapshot(std::string_view payload) {
  try {
    const auto doc = nlohmann::json::parse(payload);
    if (doc.at("format").get<std::string>() != "vsl-snapshot/1")
      throw FeedError(FeedErrorKind::Parse, "unsupported snapshot format");
    VslSnapshot s;
    s.generated_at = doc.at("generated_at").get<double>();
    for (const auto& j : doc.at("rows")) {
      VslRow r;
      r.gantry_id = j.at("gantry_id").get<std::string>();
      r.mile_marker = j.at("mile_marker").get<double>();
      r.default_speed_mph = j.at("default_speed").get<double>();
      r.triggered = j.at("triggered").get<bool>();
      r.posted_speed_mph = j.at("posted_speed").get<double>();
      const auto& lu = j.at("last_update");
      if (!lu.is_null()) r.last_update = lu.get<double>();
      if (j.at("generated_at").get<double>() != s.generated_at)
        throw FeedError(FeedErrorKind::Parse, "row generated_at disagrees with snapshot");
      s.rows.push_back(std::move(r));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FeedError(FeedErrorKind::Parse, std::string("snapshot parse error: ") + e.what());
  }
}

FeedService::FeedService(std::vector<Gantry> gantries, FeedConfig config)
    : config_(config), store_(std::move(gantries)) {
  if (!(config_.cadence_s > 0) || !(config_.window_s > 0))
    throw ConfigError("feed cadence and window must be positive");
}

bool FeedService::tick(double now) {
  const double aligned = std::floor(now / config_.cadence_s + kTimeEps) * config_.cadence_s;
  {
    std::lock_guard lock(cache_mutex_);
    if (cached_.snapshot && aligned <= cached_.snapshot->generated_at + kTimeEps) return false;
  }
  rebuild(aligned);
  return true;
}

void FeedService::rebuild(double now) {
  auto snap = std::make_shared<const VslSnapshot>(
      build_snapshot(store_, store_.gantries(), now, config_.window_s));
  auto payload = std::make_shared<const std::string>(serialize_snapshot(*snap));
  std::lock_guard lock(cache_mutex_);
  cached_ = Cached{std::move(snap), std::move(payload)};
  ++builds_;
}

std::shared_ptr<const std::string> FeedService::serve() const {
  std::lock_guard lock(cache_mutex_);
  if (!cached_.payload) throw FeedError(FeedErrorKind::Unavailable, "no snapshot built yet");
  return cached_.payload;
}

std::shared_ptr<const VslSnapshot> FeedService::snapshot() const {
  std::lock_guard lock(cache_mutex_);
  return cached_.snapshot;
}

std::uint64_t FeedService::build_count() const {
  std::lock_guard lock(cache_mutex_);
  return builds_;
}

void FaultProfile::validate() const {
  if (!(latency_s >= 0) || !(jitter_s >= 0) || !(timeout_s > 0))
    throw ConfigError("fault profile: latency/jitter must be >= 0 and timeout > 0");
  if (!(loss_probability >= 0 && loss_probability <= 1))
    throw ConfigError("fault profile: loss probability must lie in [0, 1]");
  for (const auto& o : outages) {
    if (!(o.end > o.start)) throw ConfigError("fault profile: outage end must follow start");
  }
}

bool FaultProfile::in_outage(double t) const {
  return std::any_of(outages.begin(), outages.end(),
                     [t](const Outage& o) { return t >= o.start && t < o.end; });
}

FeedClient::FeedClient(std::shared_ptr<SnapshotTransport> transport, FaultProfile profile,
                       std::uint64_t seed)
    : transport_(std::move(transport)), profile_(std::move(profile)), rng_(seed) {
  profile_.validate();
}

FetchResult FeedClient::perform(double now) {
  // Both draws happen on every request so the stream does not depend on outcomes.
  const bool lost = unit_uniform(rng_) < profile_.loss_probability;
  const double latency = profile_.latency_s + profile_.jitter_s * unit_uniform(rng_);

  FetchResult r;
  r.requested_at = now;
  if (lost || profile_.in_outage(now)) {
    r.completed_at = now + profile_.timeout_s;
    r.failure = FeedErrorKind::Timeout;
    return r;
  }
  r.completed_at = now + latency;
  try {
    const std::string bytes = transport_->get();
    r.snapshot = std::make_shared<const VslSnapshot>(parse_snapshot(bytes));
  } catch (const FeedError& e) {
    r.failure = e.kind();
  }
  return r;
}

void FeedClient::request(double now) { pending_.push_back(perform(now)); }

std::vector<FetchResult> FeedClient::poll(double now) {
  std::vector<FetchResult> done;
  std::vector<FetchResult> still;
  for (auto& r : pending_) {
    (r.completed_at <= now + kTimeEps ? done : still).push_back(std::move(r));
  }
  pending_ = std::move(still);
  std::stable_sort(done.begin(), done.end(), [](const FetchResult& a, const FetchResult& b) {
    return a.completed_at < b.completed_at;
  });
  return done;
}

FetchResult FeedClient::fetch_snapshot(double now) { return perform(now); }

}  // namespace vslcav
