#include "vslcav/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace vslcav {
namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMetersPerDegLat = kEarthRadiusM * std::numbers::pi / 180.0;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ap = p - a;
  const double c = cross2(ab, ap);
  if (std::abs(c) > 1e-12 * ab.norm() * ap.norm()) return false;
  return p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
         p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y());
}

int orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double v = cross2(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool segments_touch(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                    const Eigen::Vector2d& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

double bearing_deg(const Eigen::Vector2d& d) {
  return normalize_heading(std::atan2(d.x(), d.y()) * 180.0 / std::numbers::pi);
}

}  // namespace

double normalize_heading(double heading_deg) {
  double h = std::fmod(heading_deg, 360.0);
  if (h < 0) h += 360.0;
  if (h >= 360.0) h = 0.0;
  return h;
}

bool HeadingInterval::contains(double heading_deg) const {
  const double h = normalize_heading(heading_deg);
  const double lo = normalize_heading(from_deg);
  const double hi = normalize_heading(to_deg);
  if (lo <= hi) return h >= lo && h <= hi;
  return h >= lo || h <= hi;
}

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) throw ConfigError("corridor polygon needs at least 3 vertices");
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = polygon[j];
    const Eigen::Vector2d& b = polygon[i];
    if (on_segment(p, a, b)) return true;
    if ((b.y() > p.y()) != (a.y() > p.y())) {
      const double x_cross = b.x() + (p.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polygon_is_simple(const std::vector<Eigen::Vector2d>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice_area += cross2(polygon[i], polygon[(i + 1) % n]);
  if (twice_area == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

CorridorGeometry::CorridorGeometry(std::vector<GeoPoint> polygon, std::vector<Gantry> gantries,
                                   HeadingInterval direction_of_control,
                                   std::vector<CenterlineKnot> centerline)
    : polygon_(std::move(polygon)),
      gantries_(std::move(gantries)),
      direction_(direction_of_control),
      centerline_(std::move(centerline)) {
  if (polygon_.size() < 3) throw ConfigError("corridor polygon needs at least 3 vertices");
  if (centerline_.size() < 2) throw ConfigError("corridor centerline needs at least 2 knots");
  for (std::size_t i = 1; i < centerline_.size(); ++i) {
    if (!(centerline_[i].mile_marker < centerline_[i - 1].mile_marker))
      throw ConfigError("centerline mile markers must strictly decrease in travel order");
  }
  if (gantries_.empty()) throw ConfigError("corridor needs at least one gantry");

  origin_ = centerline_.front().position;
  meters_per_deg_lon_ = kMetersPerDegLat * std::cos(origin_.lat * std::numbers::pi / 180.0);

  polygon_local_.reserve(polygon_.size());
  for (const auto& v : polygon_) polygon_local_.push_back(to_local(v));
  if (!polygon_is_simple(polygon_local_)) throw ConfigError("corridor polygon is not simple");

  centerline_local_.reserve(centerline_.size());
  for (const auto& k : centerline_) centerline_local_.push_back(to_local(k.position));

  std::sort(gantries_.begin(), gantries_.end(),
            [](const Gantry& a, const Gantry& b) { return a.mile_marker > b.mile_marker; });
  for (std::size_t i = 0; i < gantries_.size(); ++i) {
    const Gantry& g = gantries_[i];
    if (g.id.empty()) throw ConfigError("gantry with empty id");
    if (g.default_limit_mph < kMinPostedMph || g.default_limit_mph > kMaxPostedMph)
      throw ConfigError("gantry " + g.id + ": default limit outside [30, 70] mph");
    if (i > 0 && !(g.mile_marker < gantries_[i - 1].mile_marker))
      throw ConfigError("gantry " + g.id + ": mile markers must be strictly monotone");
    for (std::size_t j = 0; j < i; ++j) {
      if (gantries_[j].id == g.id) throw ConfigError("duplicate gantry id " + g.id);
    }
    if (g.mile_marker > upstream_mile_marker() || g.mile_marker < downstream_mile_marker())
      throw ConfigError("gantry " + g.id + ": outside the centerline mile-marker range");
    if (!contains(position_at(g.mile_marker)))
      throw ConfigError("gantry " + g.id + ": position lies outside the corridor polygon");
  }
}

CorridorGeometry CorridorGeometry::synthetic(std::vector<Gantry> gantries, double start_mm,
                                             double end_mm, GeoPoint origin, double half_width_m,
                                             double knot_spacing_mi, HeadingInterval direction) {
  if (!(start_mm > end_mm)) throw ConfigError("synthetic corridor: start_mm must exceed end_mm");
  if (!(half_width_m > 0) || !(knot_spacing_mi > 0))
    throw ConfigError("synthetic corridor: half width and knot spacing must be positive");

  std::vector<double> mms{start_mm};
  while (mms.back() - knot_spacing_mi > end_mm + 1e-9) mms.push_back(mms.back() - knot_spacing_mi);
  mms.push_back(end_mm);

  // Alternating +-3 degree bends off due west keep the mapping piecewise.
  constexpr double kBend = 3.0 * std::numbers::pi / 180.0;
  std::vector<Eigen::Vector2d> local{Eigen::Vector2d::Zero()};
  for (std::size_t i = 1; i < mms.size(); ++i) {
    const double theta = (i % 2 == 1) ? kBend : -kBend;
    const Eigen::Vector2d dir(-std::cos(theta), std::sin(theta));
    local.push_back(local.back() + miles_to_meters(mms[i - 1] - mms[i]) * dir);
  }

  const double m_per_deg_lon = kMetersPerDegLat * std::cos(origin.lat * std::numbers::pi / 180.0);
  auto geo = [&](const Eigen::Vector2d& p) {
    return GeoPoint{origin.lat + p.y() / kMetersPerDegLat, origin.lon + p.x() / m_per_deg_lon};
  };

  std::vector<CenterlineKnot> knots;
  for (std::size_t i = 0; i < mms.size(); ++i) knots.push_back({mms[i], geo(local[i])});

  // Miter offsets: left side walks forward, right side walks back.
  const std::size_t n = local.size();
  std::vector<Eigen::Vector2d> left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d normal = Eigen::Vector2d::Zero();
    if (i > 0) {
      const Eigen::Vector2d d = (local[i] - local[i - 1]).normalized();
      normal += Eigen::Vector2d(-d.y(), d.x());
    }
    if (i + 1 < n) {
      const Eigen::Vector2d d = (local[i + 1] - local[i]).normalized();
      normal += Eigen::Vector2d(-d.y(), d.x());
    }
    normal.normalize();
    left[i] = local[i] + half_width_m * normal;
    right[i] = local[i] - half_width_m * normal;
  }
  std::vector<GeoPoint> polygon;
  for (std::size_t i = 0; i < n; ++i) polygon.push_back(geo(left[i]));
  for (std::size_t i = n; i-- > 0;) polygon.push_back(geo(right[i]));

  return CorridorGeometry(std::move(polygon), std::move(gantries), direction, std::move(knots));
}

const Gantry* CorridorGeometry::find_gantry(const std::string& id) const {
  for (const auto& g : gantries_) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

Eigen::Vector2d CorridorGeometry::to_local(const GeoPoint& p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_, (p.lat - origin_.lat) * kMetersPerDegLat};
}

GeoPoint CorridorGeometry::to_geo(const Eigen::Vector2d& local) const {
  return {origin_.lat + local.y() / kMetersPerDegLat, origin_.lon + local.x() / meters_per_deg_lon_};
}

bool CorridorGeometry::contains(const GeoPoint& p) const {
  return point_in_polygon(to_local(p), polygon_local_);
}

double CorridorGeometry::mile_marker_at(const GeoPoint& p) const {
  const Eigen::Vector2d q = to_local(p);
  double best_dist = std::numeric_limits<double>::infinity();
  double best_mm = centerline_.front().mile_marker;
  for (std::size_t i = 0; i + 1 < centerline_local_.size(); ++i) {
    const Eigen::Vector2d& a = centerline_local_[i];
    const Eigen::Vector2d ab = centerline_local_[i + 1] - a;
    const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const double dist = (a + t * ab - q).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best_mm = centerline_[i].mile_marker +
                t * (centerline_[i + 1].mile_marker - centerline_[i].mile_marker);
    }
  }
  return best_mm;
}

GeoPoint CorridorGeometry::position_at(double mile_marker) const {
  const double mm = std::clamp(mile_marker, downstream_mile_marker(), upstream_mile_marker());
  for (std::size_t i = 0; i + 1 < centerline_.size(); ++i) {
    const double hi = centerline_[i].mile_marker;
    const double lo = centerline_[i + 1].mile_marker;
    if (mm <= hi && mm >= lo) {
      const double t = (hi - mm) / (hi - lo);
      return to_geo(centerline_local_[i] + t * (centerline_local_[i + 1] - centerline_local_[i]));
    }
  }
  return centerline_.back().position;
}

double CorridorGeometry::heading_at(double mile_marker) const {
  std::size_t seg = centerline_.size() - 2;
  for (std::size_t i = 0; i + 1 < centerline_.size(); ++i) {
    if (mile_marker >= centerline_[i + 1].mile_marker) {
      seg = i;
      break;
    }
  }
  return bearing_deg(centerline_local_[seg + 1] - centerline_local_[seg]);
}

std::optional<GantryAhead> CorridorGeometry::next_gantry_ahead(double mile_marker) const {
  // gantries_ is sorted by decreasing mile marker.
  for (const auto& g : gantries_) {
    if (g.mile_marker < mile_marker) return GantryAhead{g, mile_marker - g.mile_marker};
  }
  return std::nullopt;
}

bool point_in_corridor(const GpsFix& fix, const CorridorGeometry& geom) {
  return geom.contains({fix.lat, fix.lon});
}

bool heading_matches(const GpsFix& fix, const CorridorGeometry& geom) {
  return geom.direction_of_control().contains(fix.heading_deg);
}

std::optional<GantryAhead> next_gantry_ahead(const GpsFix& fix, const CorridorGeometry& geom) {
  if (!point_in_corridor(fix, geom)) throw PreconditionError("next_gantry_ahead: fix outside corridor");
  return geom.next_gantry_ahead(geom.mile_marker_at({fix.lat, fix.lon}));
}

std::vector<Gantry> evenly_spaced_gantries(double first_mm, double last_mm, double spacing_mi,
                                           double default_limit_mph) {
  if (!(spacing_mi > 0)) throw ConfigError("gantry spacing must be positive");
  std::vector<Gantry> out;
  const auto count = static_cast<long>(std::floor((first_mm - last_mm) / spacing_mi + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    const double mm = std::round((first_mm - static_cast<double>(i) * spacing_mi) * 1e6) / 1e6;
    char id[32];
    std::snprintf(id, sizeof id, "G%06.2f", mm);
    out.push_back({id, mm, default_limit_mph});
  }
  return out;
}

}  // namespace vslcav
