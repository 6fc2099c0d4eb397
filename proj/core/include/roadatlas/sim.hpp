#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "roadatlas/frame.hpp"
#include "roadatlas/geometry.hpp"
#include "roadatlas/traversability.hpp"

namespace roadatlas {

enum class SurfaceClass : std::uint8_t { Road = 0, Curb = 1, Irrelevant = 2 };

/// Upward-facing horizontal rectangle at fixed altitude.
struct PlanePatch {
  double z = 0.0;
  double x0 = -1e9, x1 = 1e9;
  double y0 = -1e9, y1 = 1e9;
  SurfaceClass cls = SurfaceClass::Road;
};

/// Axis-aligned box; every face is hittable.
struct BoxPrim {
  Eigen::Vector3d min{0, 0, 0};
  Eigen::Vector3d max{1, 1, 1};
  SurfaceClass cls = SurfaceClass::Irrelevant;
};

/// Upward-facing inclined rectangle: z(x, y) = z0 + gx (x - x0) + gy (y - y0).
struct RampPrim {
  double x0 = 0, x1 = 1;
  double y0 = 0, y1 = 1;
  double z0 = 0;
  double gx = 0, gy = 0;
  SurfaceClass cls = SurfaceClass::Road;
};

/// Vertical rectangle on a plane of constant x or y (curb faces).
struct VerticalQuad {
  enum Axis : std::uint8_t { X = 0, Y = 1 } axis = Y;
  double at = 0.0;          // plane coordinate
  double r0 = -1, r1 = 1;   // extent along the other horizontal axis
  double z0 = 0, z1 = 0.15;
  SurfaceClass cls = SurfaceClass::Curb;
};

using Primitive = std::variant<PlanePatch, BoxPrim, RampPrim, VerticalQuad>;

/// Box present over [appear, vanish) frames; optional per-frame drift.
struct Actor {
  BoxPrim box;
  int appear = 0;
  int vanish = 1 << 30;
  Eigen::Vector3d velocity{0, 0, 0};  // meters per frame

  bool present(int frame) const { return frame >= appear && frame < vanish; }
};

struct SceneSpec {
  std::vector<Primitive> statics;
  std::vector<Actor> actors;
  LidarModel lidar = LidarModel::vlp16();
  double range_noise_sigma = 0.0;  // isotropic, off by default
  std::uint64_t noise_seed = 1;
};

struct GroundTruth {
  std::vector<SurfaceClass> point_class;  // parallel to the frame's points
  Pose pose;
};

/// Casts the sensor's H x W rays analytically against the scene (dynamic
/// actors at their frame_index placement). Nearest hit per ray; missed rays
/// are omitted. Deterministic for identical inputs.
std::pair<PointCloudFrame, GroundTruth> simulate_scan(const SceneSpec& scene, const Pose& pose,
                                                      int frame_index);

struct DetectionRates {
  double rate_missed = 0.0;  // curb cells labeled traversable / curb cells
  double rate_false = 0.0;   // road cells labeled obstacle / road cells
  std::size_t n_curb_cells = 0;
  std::size_t n_road_cells = 0;
  std::size_t n_missed = 0;
  std::size_t n_false = 0;
};

/// Bins points into square cells (cell truth precedence: curb > irrelevant >
/// road); a cell counts as obstacle when any of its points is labeled
/// Obstacle. Curb cells flagged obstacle count as correct either way.
DetectionRates eval_detection(const LabeledFrame& labeled, const GroundTruth& truth,
                              double resolution = 0.1);

/// Built-in scenes: "curb-road", "overpass", "garage-2f", "parking-dynamic".
/// Throws std::invalid_argument on unknown names.
SceneSpec scene_library(const std::string& name);

/// Canonical mapping trajectory for a built-in scene.
std::vector<Pose> scene_trajectory(const std::string& name, int frames);

SceneSpec load_scene_json(const std::string& path);
void save_scene_json(const SceneSpec& scene, const std::string& path);

}  // namespace roadatlas
