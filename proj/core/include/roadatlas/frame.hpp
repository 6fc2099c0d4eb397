#pragma once

#include <cstdint>
#include <vector>

#include "roadatlas/geometry.hpp"

namespace roadatlas {

/// One LiDAR sweep. Points live in the sensor frame; `ring` is the channel
/// index into an ascending-elevation channel table, `azimuth` the beam yaw
/// in [0, 2*pi).
struct PointCloudFrame {
  std::vector<Point3> points;
  std::vector<std::uint16_t> ring;
  std::vector<double> azimuth;
  double timestamp = 0.0;
  std::int64_t frame_id = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void push(const Point3& p, std::uint16_t r, double az) {
    points.push_back(p);
    ring.push_back(r);
    azimuth.push_back(wrap_azimuth(az));
  }
};

/// Beam geometry of a spinning multi-channel sensor.
struct LidarModel {
  std::vector<double> elevation_rad;  // strictly ascending, one entry per ring
  int width = 1800;                   // azimuth bins per revolution
  double max_range = 100.0;

  int rings() const { return static_cast<int>(elevation_rad.size()); }

  /// Nearest channel for a measured elevation angle.
  int ring_for_elevation(double elev) const;

  /// VLP-16: +-15 deg in 2 deg steps.
  static LidarModel vlp16(int width = 1800, double max_range = 100.0);

  /// Evenly spaced channels between two elevations (degrees, inclusive).
  static LidarModel uniform(int channels, double lo_deg, double hi_deg,
                            int width, double max_range = 100.0);

  /// Keeps every `step`-th channel starting at `offset`, e.g. 64 -> 16.
  LidarModel subsample(int step, int offset = 0) const;
};

}  // namespace roadatlas
