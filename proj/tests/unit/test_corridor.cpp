#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "vslcav/corridor.hpp"

using namespace vslcav;

namespace {

// Independent winding-number classifier; points on an edge count as inside.
bool winding_inside(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    const bool within = std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
                        std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
    if (cross == 0.0 && within) return true;
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross > 0) ++wn;
    } else if (b.y() <= p.y() && cross < 0) {
      --wn;
    }
  }
  return wn != 0;
}

std::vector<Eigen::Vector2d> random_star(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> r(0.3, 1.0);
  std::vector<double> angles(n);
  std::uniform_real_distribution<double> a(0.0, 2 * std::numbers::pi);
  for (auto& x : angles) x = a(rng);
  std::sort(angles.begin(), angles.end());
  std::vector<Eigen::Vector2d> poly;
  for (double t : angles) {
    const double rad = r(rng);
    poly.emplace_back(rad * std::cos(t), rad * std::sin(t));
  }
  return poly;
}

std::vector<Gantry> sample_gantries() {
  return {{"G64.4", 64.4, 70}, {"G63.85", 63.85, 70}, {"G63.2", 63.2, 70}};
}

}  // namespace

TEST(PointInPolygon, SquareInteriorExteriorAndEdge) {
  const std::vector<Eigen::Vector2d> sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  EXPECT_TRUE(point_in_polygon({2, 2}, sq));
  EXPECT_FALSE(point_in_polygon({1000, 1000}, sq));
  EXPECT_TRUE(point_in_polygon({4, 1}, sq));
  EXPECT_TRUE(point_in_polygon({2, 0}, sq));
  EXPECT_TRUE(point_in_polygon({0, 0}, sq));
  EXPECT_FALSE(point_in_polygon({4.5, 1}, sq));
}

TEST(PointInPolygon, EdgePointsOfRationalPolygonAgreeWithOracle) {
  const std::vector<Eigen::Vector2d> poly{{0, 0}, {8, 0}, {8, 4}, {4, 8}, {0, 4}};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d mid = 0.5 * (poly[i] + poly[(i + 1) % poly.size()]);
    EXPECT_TRUE(winding_inside(mid, poly));
    EXPECT_TRUE(point_in_polygon(mid, poly)) << mid.transpose();
  }
}

TEST(PointInPolygon, AgreesWithWindingNumberOnRandomStars) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 20; ++k) {
    const auto poly = random_star(rng, 5 + k % 12);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector2d p(u(rng), u(rng));
      ASSERT_EQ(point_in_polygon(p, poly), winding_inside(p, poly)) << "polygon " << k << " point " << i;
    }
  }
}

TEST(PointInPolygon, NeedsThreeVertices) {
  EXPECT_THROW(point_in_polygon({0, 0}, {{0, 0}, {1, 1}}), ConfigError);
}

TEST(PolygonIsSimple, DetectsBowtie) {
  EXPECT_TRUE(polygon_is_simple({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  EXPECT_FALSE(polygon_is_simple({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
}

TEST(HeadingInterval, Examples) {
  EXPECT_TRUE((HeadingInterval{225, 315}.contains(270)));
  EXPECT_FALSE((HeadingInterval{225, 315}.contains(90)));
  EXPECT_TRUE((HeadingInterval{315, 45}.contains(350)));
  EXPECT_TRUE((HeadingInterval{315, 45}.contains(0)));
  EXPECT_FALSE((HeadingInterval{315, 45}.contains(180)));
}

TEST(HeadingInterval, ExhaustiveIntegerDegrees) {
  for (int from = 0; from < 360; from += 15) {
    for (int to = 0; to < 360; to += 15) {
      const HeadingInterval iv{double(from), double(to)};
      for (int h = 0; h < 360; ++h) {
        const int span = ((to - from) % 360 + 360) % 360;
        const int off = ((h - from) % 360 + 360) % 360;
        ASSERT_EQ(iv.contains(h), off <= span) << from << ".." << to << " h=" << h;
      }
    }
  }
}

TEST(NormalizeHeading, WrapsIntoRange) {
  EXPECT_DOUBLE_EQ(normalize_heading(-90), 270);
  EXPECT_DOUBLE_EQ(normalize_heading(360), 0);
  EXPECT_DOUBLE_EQ(normalize_heading(725), 5);
}

TEST(Corridor, NextGantryAheadExamples) {
  const auto geom = CorridorGeometry::synthetic(sample_gantries(), 65.0, 62.0);
  const auto a = geom.next_gantry_ahead(64.50);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->gantry.id, "G64.4");
  EXPECT_NEAR(a->distance_mi, 0.10, 1e-12);
  EXPECT_FALSE(geom.next_gantry_ahead(63.0));
  const auto at = geom.next_gantry_ahead(63.85);
  ASSERT_TRUE(at);
  EXPECT_EQ(at->gantry.id, "G63.2");
}

TEST(Corridor, NextGantryAheadMatchesBruteForce) {
  const auto gantries = evenly_spaced_gantries(65.9, 59.1, 0.4);
  const auto geom = CorridorGeometry::synthetic(gantries, 66.0, 59.0);
  for (double m = 66.0; m >= 59.0; m -= 0.0137) {
    std::optional<std::pair<std::string, double>> want;
    for (const auto& g : gantries) {
      if (g.mile_marker < m && (!want || m - g.mile_marker < want->second)) want = {{g.id, m - g.mile_marker}};
    }
    const auto got = geom.next_gantry_ahead(m);
    ASSERT_EQ(got.has_value(), want.has_value()) << m;
    if (got) {
      EXPECT_EQ(got->gantry.id, want->first);
      EXPECT_NEAR(got->distance_mi, want->second, 1e-12);
    }
  }
}

TEST(Corridor, MileMarkerRoundTrip) {
  const auto geom = CorridorGeometry::synthetic(sample_gantries(), 66.0, 58.0, {36.05, -86.6}, 50.0, 1.0);
  for (double m = 66.0; m >= 58.0; m -= 0.0311) {
    EXPECT_NEAR(geom.mile_marker_at(geom.position_at(m)), m, 1e-6);
    EXPECT_TRUE(geom.contains(geom.position_at(m)));
  }
}

TEST(Corridor, CenterlineIsWestboundAndInsideControlDirection) {
  const auto geom = CorridorGeometry::synthetic(sample_gantries(), 66.0, 58.0);
  for (double m = 65.9; m > 58.1; m -= 0.25) {
    EXPECT_TRUE(geom.direction_of_control().contains(geom.heading_at(m))) << m;
  }
}

TEST(Corridor, FixOutsideIsAPreconditionError) {
  const auto geom = CorridorGeometry::synthetic(sample_gantries(), 65.0, 62.0);
  GeoPoint p = geom.position_at(64.0);
  GpsFix fix{p.lat + 0.05, p.lon, 270, 20, 0};
  EXPECT_FALSE(point_in_corridor(fix, geom));
  EXPECT_THROW(next_gantry_ahead(fix, geom), PreconditionError);
  fix.lat = p.lat;
  EXPECT_TRUE(point_in_corridor(fix, geom));
  EXPECT_EQ(next_gantry_ahead(fix, geom)->gantry.id, "G63.85");
}

TEST(Corridor, ConstructorRejectsBadInput) {
  const auto ok = CorridorGeometry::synthetic(sample_gantries(), 65.0, 62.0);
  auto gantries = sample_gantries();
  std::swap(gantries[0], gantries[2]);
  // Input order is irrelevant; duplicates and coincident mile markers are not.
  EXPECT_NO_THROW(CorridorGeometry::synthetic(gantries, 65.0, 62.0));
  EXPECT_THROW(CorridorGeometry::synthetic({{"A", 64, 70}, {"A", 63, 70}}, 65.0, 62.0), ConfigError);
  EXPECT_THROW(CorridorGeometry::synthetic({{"A", 64, 70}, {"B", 64, 70}}, 65.0, 62.0), ConfigError);
  EXPECT_THROW(CorridorGeometry::synthetic({{"A", 64, 80}}, 65.0, 62.0), ConfigError);
  EXPECT_THROW(CorridorGeometry::synthetic({{"A", 70, 70}}, 65.0, 62.0), ConfigError);
  EXPECT_THROW(CorridorGeometry::synthetic(sample_gantries(), 62.0, 65.0), ConfigError);
  EXPECT_THROW(CorridorGeometry(ok.polygon(), sample_gantries(), {}, {ok.centerline().front()}), ConfigError);
  EXPECT_THROW(CorridorGeometry({{0, 0}, {0, 1}}, sample_gantries(), {}, ok.centerline()), ConfigError);
}

TEST(EvenlySpacedGantries, IdsAndCount) {
  const auto g = evenly_spaced_gantries(65.9, 59.1, 0.5);
  ASSERT_EQ(g.size(), 14u);
  EXPECT_EQ(g.front().id, "G065.90");
  EXPECT_EQ(g.back().id, "G059.40");
  EXPECT_DOUBLE_EQ(g[3].mile_marker, 64.4);
  EXPECT_THROW(evenly_spaced_gantries(65, 60, 0), ConfigError);
  // A 28 mi corridor at 0.5 mi spacing has 56 gantries.
  EXPECT_EQ(evenly_spaced_gantries(87.5, 60.0, 0.5).size(), 56u);
}
