#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadatlas/frame.hpp"
#include "roadatlas/local_ogm.hpp"
#include "roadatlas/sim.hpp"

namespace roadatlas {

class FileParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// KITTI-style binary frame: records of four little-endian f32 (x, y, z,
/// intensity); intensity discarded, ring inferred from the elevation angle
/// against the model's channel table. Non-finite points are dropped and
/// counted. Throws FileParseError when the length is not a multiple of 16.
PointCloudFrame read_frame_bin(const std::string& path, const LidarModel& model,
                               std::size_t* dropped = nullptr);

void write_frame_bin(const std::string& path, const PointCloudFrame& frame);

/// One pose per line: 12 whitespace-separated numbers, row-major 3x4 rigid
/// transform. Rotations are re-orthonormalized when drift exceeds 1e-6 and
/// rejected beyond 1e-3. Parse errors carry the line number.
std::vector<Pose> read_poses(const std::string& path);

void write_poses(const std::string& path, std::span<const Pose> poses);

/// Per-point surface class, one byte per point, frame order.
std::vector<SurfaceClass> read_labels(const std::string& path);
void write_labels(const std::string& path, std::span<const SurfaceClass> labels);

/// Debug exports of a local map: occupancy as a portable graymap, heights as
/// CSV rows "row,col,x,y,mu_z_sensor,sigma,count".
void save_local_ogm_pgm(const LocalOgm& ogm, const std::string& path);
void save_local_ogm_csv(const LocalOgm& ogm, const std::string& path);

/// ASCII point cloud exports.
void export_cloud_pcd(const std::string& path, std::span<const Point3> points);
void export_cloud_ply(const std::string& path, std::span<const Point3> points);

}  // namespace roadatlas
