#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "roadatlas/gaussian.hpp"
#include "roadatlas/geometry.hpp"
#include "roadatlas/traversability.hpp"

namespace roadatlas {

enum class ScanHit : std::uint8_t { Empty = 0, ObstacleHit = 1, FrontierFree = 2 };

/// Virtual 2D scan over projected labeled points. ObstacleHit carries the
/// nearest obstacle projection of its bin, FrontierFree the farthest ground
/// projection.
struct VirtualScan {
  struct Bin {
    ScanHit kind = ScanHit::Empty;
    Eigen::Vector2d endpoint{0, 0};  // sensor frame, meters
  };
  std::vector<Bin> bins;
};

struct OccupancyParams {
  double l_occ = std::log(0.7 / 0.3);
  double l_free = std::log(0.3 / 0.7);
  double l_max = std::log(0.97 / 0.03);
};

struct SigmaModel {
  double slope = std::tan(deg2rad(5.0));
  double base = 0.1;

  double sigma(double d) const { return slope * d + base; }
};

/// Per-keyframe occupancy grid with an altitude Gaussian layer. The grid is
/// sensor-centered: the sensor sits on the corner between cells
/// (extent/2 - 1, extent/2) in both axes.
class LocalOgm {
 public:
  LocalOgm() = default;
  LocalOgm(double resolution, double radius);

  double resolution() const { return resolution_; }
  double radius() const { return radius_; }
  int extent() const { return extent_; }

  int cell_row(double y) const { return static_cast<int>(std::floor(y / resolution_)) + extent_ / 2; }
  int cell_col(double x) const { return static_cast<int>(std::floor(x / resolution_)) + extent_ / 2; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < extent_ && col >= 0 && col < extent_;
  }
  Eigen::Vector2d cell_center(int row, int col) const {
    return {(col - extent_ / 2 + 0.5) * resolution_, (row - extent_ / 2 + 0.5) * resolution_};
  }

  float log_odds(int row, int col) const { return log_odds_[row * extent_ + col]; }
  void add_log_odds(int row, int col, double delta, double clamp);

  /// Altitude statistics of the ground points that fell in one cell.
  /// `mean_sensor` is kept in the sensor frame so a pose change re-derives the
  /// world altitude exactly.
  struct HeightCell {
    Eigen::Vector3d mean_sensor{0, 0, 0};
    float sigma = 0.1f;
    std::uint32_t count = 0;
  };

  /// Sparse height layer, sorted by flat cell index for deterministic iteration.
  const std::vector<std::pair<std::int32_t, HeightCell>>& heights() const { return heights_; }
  void set_heights(std::vector<std::pair<std::int32_t, HeightCell>> h) { heights_ = std::move(h); }

  std::int32_t flat_index(int row, int col) const { return row * extent_ + col; }
  std::pair<int, int> row_col(std::int32_t flat) const { return {flat / extent_, flat % extent_}; }

  std::int64_t frame_id = 0;

 private:
  double resolution_ = 0.1;
  double radius_ = 20.0;
  int extent_ = 400;
  std::vector<float> log_odds_;
  std::vector<std::pair<std::int32_t, HeightCell>> heights_;
};

/// Ray-traces the projected labeled points into azimuth bins. Points whose
/// sensor-frame z exceeds `overhead_cutoff` are dropped first (overhanging
/// structure must not become a 2D obstacle).
VirtualScan build_virtual_scan(const LabeledFrame& labeled, int bins, double radius,
                               double overhead_cutoff);

/// Standard log-odds rasterization of a virtual scan: free updates along each
/// ray, an occupied update on ObstacleHit endpoints only.
LocalOgm rasterize_ogm(const VirtualScan& scan, double resolution, double radius,
                       const OccupancyParams& params = {});

/// Fills the altitude layer: per cell holding ground points, the sensor-frame
/// mean point plus sigma = slope * d + base with d the horizontal distance to
/// the cell center.
void attach_height_gaussians(LocalOgm& ogm, const LabeledFrame& labeled,
                             const SigmaModel& model = {});

}  // namespace roadatlas
