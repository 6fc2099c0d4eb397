#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roadatlas/atlas.hpp"
#include "roadatlas/localization.hpp"
#include "roadatlas/traversability.hpp"

namespace roadatlas {

/// End-to-end parameters; defaults follow the mapping configuration
/// (0.1 m cells, 20 m radius, 8 vertical segments over -1..7 m around the
/// sensor). Localization runs typically widen to 0.2 m / 40 m.
struct RunConfig {
  double resolution = 0.1;
  double radius = 20.0;
  TraversabilityConfig traversability;
  SegmentConfig segments;
  LayerParams layer;
  SigmaModel sigma_model;
  OccupancyParams occupancy;
  double p_hit = 0.7;
  double p_miss = 0.3;
  int scan_bins = 720;
  double overhead_clearance = 2.0;  // meters above ground
  double sensor_height = 1.8;
  double max_step = 0.3;
  int threads = 1;

  void validate() const;  // throws std::invalid_argument

  Atlas::Config atlas_config() const;
  LocalizeParams localize_params() const;
  double overhead_cutoff() const { return overhead_clearance - sensor_height; }
};

/// Label + local-map stage for one frame.
std::shared_ptr<KeyframeData> build_keyframe(const PointCloudFrame& frame,
                                             const RunConfig& config,
                                             LabeledFrame* labeled_out = nullptr);

struct BuildProgress {
  std::int64_t frame_id;
  UpdateSummary summary;
  double detection_ms;
  double local_map_ms;
};

/// Integrates every frame in order. `progress` fires after each keyframe.
Atlas build_atlas(std::span<const PointCloudFrame> frames, std::span<const Pose> poses,
                  const RunConfig& config,
                  const std::function<void(const BuildProgress&)>& progress = {});

}  // namespace roadatlas
