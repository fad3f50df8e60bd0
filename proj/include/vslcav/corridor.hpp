#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vslcav/units.hpp"

namespace vslcav {

/// Overhead VSL gantry. Mile markers decrease in the direction of control.
struct Gantry {
  std::string id;
  double mile_marker = 0.0;
  double default_limit_mph = kMaxPostedMph;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct GpsFix {
  double lat = 0.0;
  double lon = 0.0;
  double heading_deg = 0.0;  // clockwise from north, [0, 360)
  double speed_mps = 0.0;
  double timestamp = 0.0;
};

/// Closed angular interval swept clockwise from `from_deg` to `to_deg`;
/// `from_deg > to_deg` wraps through north.
struct HeadingInterval {
  double from_deg = 225.0;
  double to_deg = 315.0;

  bool contains(double heading_deg) const;
};

/// One vertex of the corridor centerline with its roadway coordinate.
struct CenterlineKnot {
  double mile_marker = 0.0;
  GeoPoint position;
};

struct GantryAhead {
  Gantry gantry;
  double distance_mi = 0.0;
};

double normalize_heading(double heading_deg);

/// Instrumented freeway: polygon geofence, ordered gantries and a
/// piecewise-linear mile-marker mapping along the centerline.
///
/// The polygon and centerline are stored in a local equirectangular frame
/// (metres east/north of the first centerline knot). That projection is
/// affine in (lon, lat), so inside/outside and interpolation fractions are
/// the same as in degree space.
class CorridorGeometry {
 public:
  /// Throws ConfigError if the polygon has fewer than 3 vertices or
  /// self-intersects, gantry mile markers are not strictly monotone, a
  /// default limit is outside [30, 70] mph, the centerline mapping is not
  /// monotone, or a gantry lies outside the polygon.
  CorridorGeometry(std::vector<GeoPoint> polygon, std::vector<Gantry> gantries,
                   HeadingInterval direction_of_control,
                   std::vector<CenterlineKnot> centerline);

  /// Westbound corridor whose centerline runs from `start_mm` down to
  /// `end_mm`, starting at `origin`, with gentle alternating bends every
  /// `knot_spacing_mi`. The polygon is the centerline buffered by
  /// `half_width_m` on each side.
  static CorridorGeometry synthetic(std::vector<Gantry> gantries, double start_mm,
                                    double end_mm, GeoPoint origin = {36.05, -86.60},
                                    double half_width_m = 50.0,
                                    double knot_spacing_mi = 2.0,
                                    HeadingInterval direction = {});

  const std::vector<GeoPoint>& polygon() const { return polygon_; }
  /// Sorted by decreasing mile marker (travel order).
  const std::vector<Gantry>& gantries() const { return gantries_; }
  const HeadingInterval& direction_of_control() const { return direction_; }
  const std::vector<CenterlineKnot>& centerline() const { return centerline_; }

  const Gantry* find_gantry(const std::string& id) const;

  /// Mile-marker range covered by the centerline mapping.
  double upstream_mile_marker() const { return centerline_.front().mile_marker; }
  double downstream_mile_marker() const { return centerline_.back().mile_marker; }

  bool contains(const GeoPoint& p) const;

  /// Projects onto the nearest centerline segment and interpolates.
  double mile_marker_at(const GeoPoint& p) const;
  /// Clamped to the centerline's mile-marker range.
  GeoPoint position_at(double mile_marker) const;
  /// Direction of travel (towards decreasing mile marker) at `mile_marker`.
  double heading_at(double mile_marker) const;

  /// Nearest gantry with mile marker strictly below `mile_marker`.
  std::optional<GantryAhead> next_gantry_ahead(double mile_marker) const;

  Eigen::Vector2d to_local(const GeoPoint& p) const;
  GeoPoint to_geo(const Eigen::Vector2d& local) const;

 private:
  std::vector<GeoPoint> polygon_;
  std::vector<Gantry> gantries_;
  HeadingInterval direction_;
  std::vector<CenterlineKnot> centerline_;

  GeoPoint origin_;
  double meters_per_deg_lon_ = 0.0;
  std::vector<Eigen::Vector2d> polygon_local_;
  std::vector<Eigen::Vector2d> centerline_local_;
};

/// Boundary points count as inside. Throws ConfigError on < 3 vertices.
bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon);

/// True if no two non-adjacent edges touch.
bool polygon_is_simple(const std::vector<Eigen::Vector2d>& polygon);

bool point_in_corridor(const GpsFix& fix, const CorridorGeometry& geom);
bool heading_matches(const GpsFix& fix, const CorridorGeometry& geom);

/// Throws PreconditionError when the fix is outside the corridor, which is
/// distinct from the empty result for "past the last gantry".
std::optional<GantryAhead> next_gantry_ahead(const GpsFix& fix, const CorridorGeometry& geom);

/// Gantries `first_mm, first_mm - spacing, ...` down to `last_mm`, ids "G<mm>".
std::vector<Gantry> evenly_spaced_gantries(double first_mm, double last_mm, double spacing_mi,
                                           double default_limit_mph = kMaxPostedMph);

}  // namespace vslcav
