#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "vslcav/feed.hpp"

using namespace vslcav;

namespace {

std::vector<Gantry> three_gantries() {
  return {{"A", 60.0, 70}, {"B", 59.5, 65}, {"C", 59.0, 70}};
}

FeedErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const FeedError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no FeedError thrown";
  return FeedErrorKind::Parse;
}

// Replay oracle: latest update per gantry with effective_at in (now - window, now].
VslSnapshot oracle_snapshot(const std::vector<Gantry>& gantries, const std::vector<GantryUpdate>& updates,
                            double now, double window) {
  VslSnapshot s;
  s.generated_at = now;
  for (const auto& g : gantries) {
    VslRow row{g.id, g.mile_marker, g.default_limit_mph, false, g.default_limit_mph, std::nullopt};
    const GantryUpdate* best = nullptr;
    for (const auto& u : updates) {
      if (u.gantry_id != g.id || u.effective_at > now || u.effective_at <= now - window) continue;
      if (!best || u.effective_at >= best->effective_at) best = &u;
    }
    if (best) {
      row.triggered = best->triggered;
      row.posted_speed_mph = best->posted_speed_mph;
      row.last_update = best->effective_at;
    }
    s.rows.push_back(row);
  }
  return s;
}

class FixedTransport : public SnapshotTransport {
 public:
  explicit FixedTransport(std::string bytes) : bytes_(std::move(bytes)) {}
  std::string get() override {
    ++calls;
    return bytes_;
  }
  int calls = 0;

 private:
  std::string bytes_;
};

std::shared_ptr<SnapshotTransport> fixed_snapshot(double generated_at = 0.0) {
  VslSnapshot s;
  s.generated_at = generated_at;
  s.rows.push_back({"A", 60.0, 70, true, 30, 1.0});
  return std::make_shared<FixedTransport>(serialize_snapshot(s));
}

}  // namespace

TEST(UpdateStore, MirrorAcceptsInOrderAndRejectsOutOfOrder) {
  UpdateStore store(three_gantries());
  store.mirror({"A", 30, true, 100});
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(kind_of([&] { store.mirror({"A", 40, true, 90}); }), FeedErrorKind::OutOfOrder);
  store.mirror({"A", 40, true, 100});
  EXPECT_EQ(store.size(), 2u);
}

TEST(UpdateStore, MirrorValidatesUpdates) {
  UpdateStore store(three_gantries());
  EXPECT_EQ(kind_of([&] { store.mirror({"Z", 30, true, 0}); }), FeedErrorKind::UnknownGantry);
  EXPECT_EQ(kind_of([&] { store.mirror({"A", 25, true, 0}); }), FeedErrorKind::InvalidUpdate);
  EXPECT_EQ(kind_of([&] { store.mirror({"A", 75, false, 0}); }), FeedErrorKind::InvalidUpdate);
  EXPECT_EQ(kind_of([&] { store.mirror({"B", 65, true, 0}); }), FeedErrorKind::InvalidUpdate);
  EXPECT_EQ(kind_of([&] { store.mirror({"B", 50, false, 0}); }), FeedErrorKind::InvalidUpdate);
  EXPECT_EQ(kind_of([&] { store.mirror({"A", NAN, true, 0}); }), FeedErrorKind::InvalidUpdate);
  EXPECT_NO_THROW(store.mirror({"B", 65, false, 0}));
  EXPECT_EQ(store.size(), 1u);
}

TEST(UpdateStore, DayOfMinuteUpdatesLatestWins) {
  UpdateStore store(three_gantries());
  for (int i = 0; i < 1440; ++i) store.mirror({"A", 30.0 + (i % 8) * 5.0, true, 60.0 * i});
  EXPECT_EQ(store.size(), 1440u);
  const auto snap = build_snapshot(store, store.gantries(), 86400.0, 86400.0);
  EXPECT_DOUBLE_EQ(snap.find("A")->posted_speed_mph, 30.0 + (1439 % 8) * 5.0);
  EXPECT_DOUBLE_EQ(*snap.find("A")->last_update, 60.0 * 1439);
}

TEST(BuildSnapshot, DefaultsAndWindow) {
  const auto gantries = three_gantries();
  UpdateStore store(gantries);
  auto snap = build_snapshot(store, gantries, 0.0, 86400.0);
  ASSERT_EQ(snap.rows.size(), 3u);
  for (const auto& r : snap.rows) {
    EXPECT_FALSE(r.triggered);
    EXPECT_EQ(r.posted_speed_mph, r.default_speed_mph);
    EXPECT_FALSE(r.last_update);
  }
  store.mirror({"A", 30, true, 0.0});
  snap = build_snapshot(store, gantries, 3600.0, 86400.0);
  EXPECT_DOUBLE_EQ(snap.find("A")->posted_speed_mph, 30.0);
  EXPECT_TRUE(snap.find("A")->triggered);
  snap = build_snapshot(store, gantries, 25 * 3600.0, 24 * 3600.0);
  EXPECT_DOUBLE_EQ(snap.find("A")->posted_speed_mph, 70.0);
  EXPECT_FALSE(snap.find("A")->last_update);
  EXPECT_THROW(build_snapshot(store, gantries, 0.0, 0.0), PreconditionError);
}

TEST(BuildSnapshot, WindowBoundaryIsHalfOpen) {
  const auto gantries = three_gantries();
  UpdateStore store(gantries);
  store.mirror({"A", 30, true, 100.0});
  EXPECT_TRUE(build_snapshot(store, gantries, 100.0, 50.0).find("A")->last_update);
  EXPECT_TRUE(build_snapshot(store, gantries, 149.999, 50.0).find("A")->last_update);
  EXPECT_FALSE(build_snapshot(store, gantries, 150.0, 50.0).find("A")->last_update);
  EXPECT_FALSE(build_snapshot(store, gantries, 99.999, 50.0).find("A")->last_update);
}

TEST(BuildSnapshot, MatchesReplayOracleOnRandomSequences) {
  const auto gantries = three_gantries();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    UpdateStore store(gantries);
    std::vector<GantryUpdate> updates;
    std::map<std::string, double> last;
    for (int i = 0; i < 40; ++i) {
      const auto& g = gantries[static_cast<std::size_t>(U(rng) * 3)];
      const double t = last[g.id] + std::floor(U(rng) * 3) * 10.0;
      last[g.id] = t;
      const double mph = 30.0 + 5.0 * std::floor(U(rng) * 9);
      GantryUpdate u{g.id, mph, mph < g.default_limit_mph, t};
      if (!u.triggered) u.posted_speed_mph = g.default_limit_mph;
      store.mirror(u);
      updates.push_back(u);
    }
    for (int q = 0; q < 10; ++q) {
      const double now = std::floor(U(rng) * 900) + (q % 2 ? 0.5 : 0.0);
      const double window = 10.0 + std::floor(U(rng) * 200);
      ASSERT_EQ(build_snapshot(store, gantries, now, window), oracle_snapshot(gantries, updates, now, window))
          << "trial " << trial << " now " << now << " window " << window;
    }
  }
}

TEST(BuildSnapshot, IdempotentAtSameTime) {
  const auto gantries = three_gantries();
  UpdateStore store(gantries);
  store.mirror({"B", 40, true, 5});
  EXPECT_EQ(build_snapshot(store, gantries, 10, 100), build_snapshot(store, gantries, 10, 100));
}

TEST(Snapshot, SerializeParseRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    VslSnapshot s;
    s.generated_at = std::floor(U(rng) * 1e6) * 0.25;
    const int n = 1 + static_cast<int>(U(rng) * 20);
    for (int i = 0; i < n; ++i) {
      VslRow r;
      r.gantry_id = "G" + std::to_string(i);
      r.mile_marker = 60.0 - 0.5 * i + U(rng) * 1e-3;
      r.default_speed_mph = 70;
      r.triggered = U(rng) < 0.5;
      r.posted_speed_mph = r.triggered ? 30 + 5 * std::floor(U(rng) * 8) : 70;
      if (r.triggered) r.last_update = s.generated_at - U(rng) * 1000.0;
      s.rows.push_back(r);
    }
    ASSERT_EQ(parse_snapshot(serialize_snapshot(s)), s);
  }
}

TEST(Snapshot, ParseRejectsMalformedPayloads) {
  VslSnapshot s;
  s.generated_at = 15;
  s.rows.push_back({"A", 60.0, 70, false, 70, std::nullopt});
  const std::string good = serialize_snapshot(s);
  auto bad = [](std::string text) { return kind_of([&] { parse_snapshot(text); }); };
  EXPECT_EQ(bad("{"), FeedErrorKind::Parse);
  EXPECT_EQ(bad("[]"), FeedErrorKind::Parse);
  std::string wrong_format = good;
  wrong_format.replace(wrong_format.find("vsl-snapshot/1"), 14, "vsl-snapshot/9");
  EXPECT_EQ(bad(wrong_format), FeedErrorKind::Parse);
  std::string missing = good;
  missing.replace(missing.find("\"posted_speed\""), 14, "\"posted_sped\"");
  EXPECT_EQ(bad(missing), FeedErrorKind::Parse);
  std::string mismatch = good;
  mismatch.replace(mismatch.rfind("\"generated_at\": 15.0"), 20, "\"generated_at\": 16.0");
  EXPECT_EQ(bad(mismatch), FeedErrorKind::Parse);
  std::string wrong_type = good;
  wrong_type.replace(wrong_type.find("false"), 5, "\"no\" ");
  EXPECT_EQ(bad(wrong_type), FeedErrorKind::Parse);
}

TEST(Snapshot, PayloadSizeForFullCorridor) {
  const auto gantries = evenly_spaced_gantries(87.5, 60.0, 0.5);
  ASSERT_EQ(gantries.size(), 56u);
  UpdateStore store(gantries);
  const auto bytes = serialize_snapshot(build_snapshot(store, gantries, 1.7e9, 86400)).size();
  EXPECT_GT(bytes, 5000u);
  EXPECT_LT(bytes, 50000u);
}

TEST(FeedService, UnavailableBeforeFirstBuild) {
  FeedService svc(three_gantries());
  EXPECT_EQ(kind_of([&] { svc.serve(); }), FeedErrorKind::Unavailable);
  EXPECT_EQ(svc.snapshot(), nullptr);
}

TEST(FeedService, RebuildsOnCadenceAlignedTimes) {
  FeedService svc(three_gantries(), {15.0, 86400.0});
  EXPECT_TRUE(svc.tick(0.0));
  EXPECT_FALSE(svc.tick(14.95));
  const auto first = svc.serve();
  EXPECT_EQ(svc.serve(), first);
  EXPECT_EQ(*svc.serve(), *first);
  EXPECT_TRUE(svc.tick(15.0));
  EXPECT_DOUBLE_EQ(svc.snapshot()->generated_at, 15.0);
  EXPECT_TRUE(svc.tick(31.0));
  EXPECT_DOUBLE_EQ(svc.snapshot()->generated_at, 30.0);
  EXPECT_FALSE(svc.tick(44.0));
  EXPECT_EQ(svc.build_count(), 3u);
  EXPECT_THROW(FeedService(three_gantries(), {0.0, 1.0}), ConfigError);
}

TEST(FeedService, UpdateVisibleAfterNextBuild) {
  FeedService svc(three_gantries(), {15.0, 86400.0});
  svc.tick(0.0);
  svc.mirror({"A", 30, true, 3.0});
  EXPECT_DOUBLE_EQ(svc.snapshot()->find("A")->posted_speed_mph, 70.0);
  svc.tick(15.0);
  EXPECT_DOUBLE_EQ(svc.snapshot()->find("A")->posted_speed_mph, 30.0);
  EXPECT_DOUBLE_EQ(parse_snapshot(*svc.serve()).generated_at, 15.0);
}

TEST(FeedClient, ZeroFaultMatchesService) {
  FeedService svc(three_gantries());
  svc.mirror({"B", 40, true, 0.0});
  svc.tick(0.0);
  FeedClient client(std::make_shared<InProcessTransport>(svc), {});
  const auto r = client.fetch_snapshot(1.0);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(*r.snapshot, *svc.snapshot());
  EXPECT_DOUBLE_EQ(r.completed_at, 1.0);
}

TEST(FeedClient, TotalLossTimesOut) {
  auto transport = fixed_snapshot();
  FaultProfile p;
  p.loss_probability = 1.0;
  p.timeout_s = 2.0;
  FeedClient client(transport, p, 1);
  client.request(10.0);
  EXPECT_TRUE(client.in_flight());
  EXPECT_TRUE(client.poll(11.95).empty());
  const auto done = client.poll(12.0);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_FALSE(done[0].ok());
  EXPECT_EQ(done[0].failure, FeedErrorKind::Timeout);
  EXPECT_FALSE(client.in_flight());
  EXPECT_EQ(static_cast<FixedTransport&>(*transport).calls, 0);
}

TEST(FeedClient, OutageTimesOutOnlyInsideInterval) {
  FaultProfile p;
  p.outages = {{5.0, 10.0}};
  FeedClient client(fixed_snapshot(), p);
  EXPECT_TRUE(client.fetch_snapshot(4.99).ok());
  EXPECT_EQ(client.fetch_snapshot(5.0).failure, FeedErrorKind::Timeout);
  EXPECT_EQ(client.fetch_snapshot(9.99).failure, FeedErrorKind::Timeout);
  EXPECT_TRUE(client.fetch_snapshot(10.0).ok());
}

TEST(FeedClient, LatencyOfTwoHundredMsIsFourTicksAtTwentyHertz) {
  FaultProfile p;
  p.latency_s = 0.2;
  FeedClient client(fixed_snapshot(), p);
  const double dt = 0.05;
  const int request_tick = 37;
  client.request(request_tick * dt);
  int arrival = -1;
  for (int k = request_tick; k < request_tick + 20 && arrival < 0; ++k) {
    if (!client.poll(k * dt).empty()) arrival = k;
  }
  EXPECT_EQ(arrival - request_tick, 4);
}

TEST(FeedClient, SameSeedSameOutcomes) {
  FaultProfile p;
  p.latency_s = 0.1;
  p.jitter_s = 0.5;
  p.loss_probability = 0.3;
  FeedClient a(fixed_snapshot(), p, 42);
  FeedClient b(fixed_snapshot(), p, 42);
  FeedClient c(fixed_snapshot(), p, 43);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto ra = a.fetch_snapshot(i);
    const auto rb = b.fetch_snapshot(i);
    const auto rc = c.fetch_snapshot(i);
    ASSERT_EQ(ra.completed_at, rb.completed_at);
    ASSERT_EQ(ra.ok(), rb.ok());
    differs = differs || ra.completed_at != rc.completed_at;
  }
  EXPECT_TRUE(differs);
}

TEST(FeedClient, UnavailableServerIsAFailedFetch) {
  FeedService svc(three_gantries());
  FeedClient client(std::make_shared<InProcessTransport>(svc), {});
  const auto r = client.fetch_snapshot(0.0);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.failure, FeedErrorKind::Unavailable);
}

TEST(FeedClient, HeldDataIsNeverOlderThanLatencyPlusCadence) {
  FeedService svc(three_gantries(), {15.0, 86400.0});
  FaultProfile p;
  p.latency_s = 0.3;
  p.jitter_s = 0.7;
  FeedClient client(std::make_shared<InProcessTransport>(svc), p, 5);
  const double dt = 0.05;
  for (int k = 0; k < 4000; ++k) {
    const double t = k * dt;
    svc.tick(t);
    if (k % 100 == 0) client.request(t);
    for (const auto& r : client.poll(t)) {
      ASSERT_TRUE(r.ok());
      EXPECT_GE(r.snapshot->generated_at, r.completed_at - (p.latency_s + p.jitter_s + 15.0) - 1e-9);
    }
  }
}

TEST(FaultProfile, Validation) {
  FaultProfile p;
  EXPECT_NO_THROW(p.validate());
  p.loss_probability = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.timeout_s = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.outages = {{5, 5}};
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(FeedClient(fixed_snapshot(), p), ConfigError);
}
