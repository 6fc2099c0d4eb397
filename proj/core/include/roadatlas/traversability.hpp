#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roadatlas/frame.hpp"
#include "roadatlas/range_image.hpp"

namespace roadatlas {

enum class PointLabel : std::uint8_t { Ground = 0, Obstacle = 1 };

/// Plane n.p = offset with |n| = 1.
struct PlaneModel {
  Eigen::Vector3d normal{0, 0, 1};
  double offset = 0.0;
  std::vector<std::int32_t> inliers;

  double distance_to(const Point3& p) const { return std::abs(normal.dot(p) - offset); }
};

struct LabeledFrame {
  PointCloudFrame frame;
  std::vector<PointLabel> labels;

  std::size_t count(PointLabel l) const;
};

/// Best plane over sampled triples (deterministic seeded sampler), refined by
/// a least-squares refit when that does not lose inliers. Returns nullopt for
/// fewer than 3 points or all-degenerate samples.
std::optional<PlaneModel> fit_plane_ransac(std::span<const Point3> points,
                                           double inlier_threshold,
                                           int max_iterations,
                                           std::uint64_t seed = 0x10d4);

/// True iff the plane is near-horizontal: angle(normal, z) < max_angle, with
/// the normal oriented so its z component is nonnegative.
bool check_normal(const PlaneModel& plane, double max_angle);

struct TraversabilityConfig {
  int image_rows = 16;
  int image_cols = 1800;

  // Horizontal tiling shared by both passes.
  int sector_cols = 50;
  int sector_col_step = 25;
  // Coarse pass covers all rows in one band.
  int coarse_rows = 16;
  int coarse_row_step = 16;
  // Fine bands slide vertically inside the tiling.
  int fine_rows = 3;
  int fine_row_step = 1;

  bool two_pass = true;   // false: fine bands only
  bool overlap = true;    // false: steps equal window extents (no shared cells)

  double ransac_threshold = 0.05;
  int ransac_iterations = 200;
  double max_plane_angle = 0.4;
  int min_sector_points = 10;
  std::uint64_t seed = 0x10d4;
  int threads = 1;
};

struct DetectionDiagnostics {
  std::vector<PlaneModel> accepted_planes;
  std::size_t sectors_total = 0;
  std::size_t sectors_accepted = 0;
};

/// Per-sector RANSAC labeling: a sector's inliers become Ground when they
/// cover at least half the sector and the plane is near-horizontal; a point is
/// Ground if any accepting sector claims it, everything else is Obstacle.
LabeledFrame detect_traversable(const PointCloudFrame& frame,
                                const TraversabilityConfig& config,
                                DetectionDiagnostics* diagnostics = nullptr);

}  // namespace roadatlas
