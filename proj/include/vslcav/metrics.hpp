#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vslcav/simulation.hpp"

namespace vslcav {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StepKind { Rise, Fall };

const char* to_string(StepKind kind);

/// Response to one step in the posted speed v_gr.
struct RiseFallEvent {
  StepKind kind = StepKind::Rise;
  double t_start = 0.0;  // new v_gr ingested
  std::optional<double> t_end;  // first time the speed entered the band for good
  double from = 0.0;
  double to = 0.0;
  double delta_v = 0.0;
  bool complete = false;
  std::string incomplete_reason;  // safety_filter | superseded | vsl_lost | trace_end

  std::optional<double> duration() const {
    if (!t_end) return std::nullopt;
    return *t_end - t_start;
  }
};

struct RiseFallConfig {
  double min_step = 0.5;  // m/s
  double band = 0.25;     // m/s
  double hold_s = 1.0;
};

/// One event per consecutive change of the present v_gr by at least
/// `min_step`. The first acquisition of a v_gr is not a step. Events the
/// safety filter interrupts, or that a newer step or loss of v_gr cuts short,
/// are kept but flagged incomplete.
std::vector<RiseFallEvent> extract_rise_fall(const VehicleTrace& vehicle, const RiseFallConfig& config = {});

struct EventSummary {
  std::size_t count = 0;
  std::size_t complete = 0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> mean;
  std::optional<double> min_delta;
  std::optional<double> max_delta;
};

/// Duration statistics over complete events of one kind.
EventSummary summarize_events(const std::vector<RiseFallEvent>& events, StepKind kind);

struct SegmentStats {
  Segment segment;
  double mean = 0.0;
  double std = 0.0;   // sample standard deviation
  double nmse = 0.0;  // reported under the published label; equal to std
  double cv = 0.0;    // std / mean, 0 when the mean is 0
  std::size_t samples = 0;
};

/// Speed statistics over position-uniform resamples. `mile_markers` must be
/// non-increasing (travel order). Throws MetricsError naming any segment the
/// trajectory does not fully cover.
std::vector<SegmentStats> segment_stats(std::span<const double> mile_markers, std::span<const double> speeds,
                                        const std::vector<Segment>& segments, double spacing_m = 1.0);
std::vector<SegmentStats> segment_stats(const VehicleTrace& vehicle, const std::vector<Segment>& segments,
                                        double spacing_m = 1.0);

/// 100 (1 - ego.std / pilot.std); empty when the pilot std is zero.
std::optional<double> variance_reduction(const SegmentStats& ego, const SegmentStats& pilot);
/// Same on the coefficient of variation.
std::optional<double> cv_reduction(const SegmentStats& ego, const SegmentStats& pilot);

/// Per-segment reductions; throws MetricsError if the segment lists differ.
std::vector<std::optional<double>> variance_reduction(const std::vector<SegmentStats>& ego,
                                                      const std::vector<SegmentStats>& pilot);

}  // namespace vslcav
