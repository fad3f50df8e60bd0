#include "vslcav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Core>

namespace vslcav {
namespace {

constexpr double kEps = 1e-9;

std::optional<double> tracked_reference(const Sample& s) {
  if (!s.cav || s.cav->source != SetpointSource::Vsl) return std::nullopt;
  return s.cav->v_gr;
}

std::string segment_name(const Segment& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%.2f, %.2f]", s.lo, s.hi);
  return buf;
}

RiseFallEvent follow_event(const std::vector<Sample>& samples, std::size_t start, double from, double to,
                           const RiseFallConfig& cfg) {
  RiseFallEvent ev;
  ev.kind = to > from ? StepKind::Rise : StepKind::Fall;
  ev.t_start = samples[start].t;
  ev.from = from;
  ev.to = to;
  ev.delta_v = to - from;
  ev.incomplete_reason = "trace_end";

  std::optional<std::size_t> candidate;
  for (std::size_t m = start; m < samples.size(); ++m) {
    const Sample& s = samples[m];
    const auto ref = tracked_reference(s);
    if (!ref) {
      ev.incomplete_reason = "vsl_lost";
      return ev;
    }
    if (std::abs(*ref - to) >= cfg.min_step) {
      ev.incomplete_reason = "superseded";
      return ev;
    }
    if (s.cav->active == ActiveController::SafetyFilter) {
      ev.incomplete_reason = "safety_filter";
      return ev;
    }
    if (std::abs(s.v - to) <= cfg.band) {
      if (!candidate) candidate = m;
      if (s.t - samples[*candidate].t >= cfg.hold_s - kEps) {
        ev.t_end = samples[*candidate].t;
        ev.complete = true;
        ev.incomplete_reason.clear();
        return ev;
      }
    } else {
      candidate.reset();
    }
  }
  return ev;
}

}  // namespace

const char* to_string(StepKind kind) { return kind == StepKind::Rise ? "rise" : "fall"; }

std::vector<RiseFallEvent> extract_rise_fall(const VehicleTrace& vehicle, const RiseFallConfig& config) {
  std::vector<RiseFallEvent> events;
  const auto& samples = vehicle.samples;
  bool have_last = false;
  double last = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto ref = tracked_reference(samples[k]);
    if (!ref) {
      have_last = false;
      continue;
    }
    if (have_last && std::abs(*ref - last) >= config.min_step) {
      events.push_back(follow_event(samples, k, last, *ref, config));
    }
    have_last = true;
    last = *ref;
  }
  return events;
}

EventSummary summarize_events(const std::vector<RiseFallEvent>& events, StepKind kind) {
  EventSummary out;
  double total = 0.0;
  for (const auto& e : events) {
    if (e.kind != kind) continue;
    ++out.count;
    const double dv = std::abs(e.delta_v);
    out.min_delta = out.min_delta ? std::min(*out.min_delta, dv) : dv;
    out.max_delta = out.max_delta ? std::max(*out.max_delta, dv) : dv;
    if (!e.complete) continue;
    ++out.complete;
    const double d = *e.duration();
    out.min = out.min ? std::min(*out.min, d) : d;
    out.max = out.max ? std::max(*out.max, d) : d;
    total += d;
  }
  if (out.complete > 0) out.mean = total / static_cast<double>(out.complete);
  return out;
}

std::vector<SegmentStats> segment_stats(std::span<const double> mile_markers, std::span<const double> speeds,
                                        const std::vector<Segment>& segments, double spacing_m) {
  if (mile_markers.size() != speeds.size()) throw MetricsError("segment_stats: length mismatch");
  if (!(spacing_m > 0)) throw MetricsError("segment_stats: spacing must be positive");
  std::vector<SegmentStats> out;
  for (const auto& seg : segments) {
    if (!(seg.lo < seg.hi)) throw MetricsError("segment " + segment_name(seg) + ": need lo < hi");
    if (mile_markers.size() < 2 || mile_markers.front() < seg.hi - kEps || mile_markers.back() > seg.lo + kEps)
      throw MetricsError("segment " + segment_name(seg) + " is not fully traversed by the trace");

    const double length_m = miles_to_meters(seg.hi - seg.lo);
    const auto count = static_cast<Eigen::Index>(std::max(2.0, std::ceil(length_m / spacing_m)));
    const double step_mi = (seg.hi - seg.lo) / static_cast<double>(count);
    Eigen::ArrayXd v(count);

    // Travel order: the first sample at or past each resample point brackets it.
    std::size_t j = 1;
    for (Eigen::Index i = 0; i < count; ++i) {
      const double target = seg.hi - (static_cast<double>(i) + 0.5) * step_mi;
      while (j + 1 < mile_markers.size() && mile_markers[j] > target) ++j;
      const double m0 = mile_markers[j - 1];
      const double m1 = mile_markers[j];
      const double f = m0 > m1 ? std::clamp((m0 - target) / (m0 - m1), 0.0, 1.0) : 1.0;
      v(i) = speeds[j - 1] + f * (speeds[j] - speeds[j - 1]);
    }

    SegmentStats st;
    st.segment = seg;
    st.samples = static_cast<std::size_t>(count);
    st.mean = v.mean();
    st.std = std::sqrt((v - st.mean).square().sum() / static_cast<double>(count - 1));
    st.nmse = st.std;
    st.cv = st.mean > 0 ? st.std / st.mean : 0.0;
    out.push_back(st);
  }
  return out;
}

std::vector<SegmentStats> segment_stats(const VehicleTrace& vehicle, const std::vector<Segment>& segments,
                                        double spacing_m) {
  std::vector<double> mm;
  std::vector<double> v;
  mm.reserve(vehicle.samples.size());
  v.reserve(vehicle.samples.size());
  for (const auto& s : vehicle.samples) {
    mm.push_back(s.mile_marker);
    v.push_back(s.v);
  }
  try {
    return segment_stats(mm, v, segments, spacing_m);
  } catch (const MetricsError& e) {
    throw MetricsError(vehicle.name + ": " + e.what());
  }
}

std::optional<double> variance_reduction(const SegmentStats& ego, const SegmentStats& pilot) {
  if (pilot.std == 0.0) return std::nullopt;
  return 100.0 * (1.0 - ego.std / pilot.std);
}

std::optional<double> cv_reduction(const SegmentStats& ego, const SegmentStats& pilot) {
  if (pilot.cv == 0.0) return std::nullopt;
  return 100.0 * (1.0 - ego.cv / pilot.cv);
}

std::vector<std::optional<double>> variance_reduction(const std::vector<SegmentStats>& ego,
                                                      const std::vector<SegmentStats>& pilot) {
  if (ego.size() != pilot.size()) throw MetricsError("ego and pilot have different segment counts");
  std::vector<std::optional<double>> out;
  for (std::size_t i = 0; i < ego.size(); ++i) {
    if (!(ego[i].segment == pilot[i].segment))
      throw MetricsError("segment mismatch: " + segment_name(ego[i].segment) + " vs " +
                         segment_name(pilot[i].segment));
    out.push_back(variance_reduction(ego[i], pilot[i]));
  }
  return out;
}

}  // namespace vslcav
