#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "roadatlas/atlas.hpp"
#include "roadatlas/traversability.hpp"
#include "roadatlas/vertical_codec.hpp"

namespace roadatlas {

class UnlocalizableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IcpParams {
  int max_iterations = 50;
  double max_corr_dist = 0.4;  // 2 x map resolution
  double eps_translation = 1e-4;
  double eps_rotation = 1e-4;
  int min_points = 10;
};

struct LocalizationResult {
  Pose pose;
  double translation_residual = 0.0;  // RMS of matched pairs
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // accepted iterations only
  double segmentation_ms = 0.0;
  double icp_ms = 0.0;
};

/// Point-to-point ICP with nearest-neighbor correspondences capped at
/// max_corr_dist, seeded at `init`. Non-converged when the residual grows
/// three iterations in a row or correspondences vanish. Throws on clouds
/// smaller than min_points.
LocalizationResult icp_register(std::span<const Point3> source,
                                std::span<const Point3> target,
                                const Pose& init, const IcpParams& params);

struct LocalizeParams {
  TraversabilityConfig traversability;
  SegmentConfig segments;         // band relative to the sensor
  double map_radius = 40.0;       // decode window around the seed pose
  IcpParams icp;
  double p_hit = 0.7;
  double p_miss = 0.3;
};

/// Segments the frame, encodes its obstacles into a probabilistic grid and
/// decodes them back so the sparsity matches a decoded map. With a lattice
/// pose the encoding lives on the world-aligned grid (`resolution`, origin 0)
/// and the cloud comes back in world coordinates; otherwise everything stays
/// in the sensor frame. Throws UnlocalizableError when nothing survives.
std::vector<Point3> prepare_frame_cloud(const PointCloudFrame& frame,
                                        const LocalizeParams& params,
                                        double resolution,
                                        const std::optional<Pose>& lattice_pose = std::nullopt);

/// Registers a frame against the obstacle cloud decoded from the atlas within
/// map_radius of prev_pose, seeded at prev_pose.
LocalizationResult localize_frame(const Atlas& atlas, const PointCloudFrame& frame,
                                  const Pose& prev_pose, const LocalizeParams& params);

}  // namespace roadatlas
