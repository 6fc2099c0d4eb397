#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "roadatlas/gaussian.hpp"
#include "roadatlas/geometry.hpp"
#include "roadatlas/grid.hpp"
#include "roadatlas/local_ogm.hpp"
#include "roadatlas/vertical_codec.hpp"

namespace roadatlas {

/// One fused traversable surface at a cell.
struct SurfaceLayer {
  double mu = 0.0;
  double sigma = 1.0;
  std::uint32_t n_obs = 0;
  std::uint8_t label = 1;
  bool traversable = true;  // fused 2D occupancy of this layer is free
};

struct LayerParams {
  double epsilon = 0.6;
  std::optional<double> absolute_gap;  // optional pre-filter before the overlap rule
};

/// Labels representatives sorted ascending by mean: the lowest gets 1, each
/// next keeps the previous label while the overlap rate stays above epsilon.
/// Returns dense labels 1..Z.
std::vector<int> assign_layer_labels(std::span<const Gaussian1D> reps_sorted_by_mu,
                                     const LayerParams& params);

struct RepStamp {
  double t_star;
  double mu_star;
};

/// Routes one observation to a representative index (0-based) by time bracket
/// and mean closeness; ties go to the earlier representative.
int assign_observation_index(double t, double mu, std::span<const RepStamp> reps_by_time);

/// Eq.-style pairwise fusion of a layer with one observation.
SurfaceLayer fuse_layer(const SurfaceLayer& layer, const Gaussian1D& obs);

/// One ground reading of a cell by one keyframe.
struct Observation {
  double time = 0.0;
  std::int64_t frame_id = 0;
  double mu = 0.0;
  double sigma = 1.0;
  double distance = 0.0;  // horizontal sensor-to-cell distance
  double occ = 0.0;       // local occupancy log-odds carried into the layer
};

/// Closed visibility segment distilled to its representative observation plus
/// the running fusion of everything routed to it.
struct Representative {
  double t_star = 0.0;
  double mu_star = 0.0;
  double sigma_star = 1.0;

  double mu = 0.0;      // running fusion state, valid when n > 0
  double var = 0.0;
  std::uint32_t n = 0;
  double occ = 0.0;
};

struct OpenSegment {
  std::vector<Observation> buffer;
  std::int64_t last_frame = -1;
};

struct CellColumn {
  std::vector<Representative> reps;   // creation (= time) order
  std::vector<Observation> pending;   // t >= last rep's t*, awaiting the next rep
  std::optional<OpenSegment> open;
  std::vector<SurfaceLayer> frozen;   // set on loaded (read-only) maps
};

struct KeyframeData {
  std::int64_t frame_id = 0;
  double time = 0.0;
  LocalOgm ogm;
  std::vector<Point3> obstacles;  // sensor frame, already labeled O
};

struct KeyframeRecord {
  std::shared_ptr<const KeyframeData> data;
  Pose pose;
  std::unordered_set<CellKey> contributed;  // ground + descriptor cells
};

struct UpdateSummary {
  std::size_t cells_touched = 0;
  std::size_t layers_created = 0;
  std::size_t layers_merged = 0;
  std::size_t descriptor_cells = 0;
  double elapsed_ms = 0.0;
};

/// Sparse global map: per-cell multi-layer surface Gaussians plus packed
/// vertical descriptors, with keyframe bookkeeping for re-fusion.
class Atlas {
 public:
  struct Config {
    double resolution = 0.1;
    Eigen::Vector2d origin{0.0, 0.0};
    SegmentConfig segments;
    LayerParams layer;
    double p_hit = 0.7;
    double p_miss = 0.3;
    OccupancyParams occupancy;
    std::size_t segment_buffer_cap = 512;
  };

  Atlas() : Atlas(Config{}) {}
  explicit Atlas(const Config& config);

  const Config& config() const { return config_; }
  const Grid2D& grid() const { return descriptors_.grid; }
  const UpdateLut& lut() const { return lut_; }

  /// Transforms the keyframe's cells into world cells, registers ground
  /// observations, closes expired visibility segments, and folds obstacle
  /// rays into the descriptors. Keyframes must arrive in time order.
  UpdateSummary integrate_keyframe(std::shared_ptr<const KeyframeData> data, const Pose& pose);

  /// Re-poses one keyframe: exactly the cells in its old and new footprints
  /// are rebuilt by replaying every keyframe over them; everything else is
  /// untouched. Throws on unknown frame id.
  void reintegrate_on_pose_update(std::int64_t frame_id, const Pose& new_pose);

  /// Materialized layer view of one column (virtually closes open segments;
  /// pure). Layers come back sorted ascending by mu with dense labels.
  std::vector<SurfaceLayer> layers(CellKey key) const;

  const std::unordered_map<CellKey, CellColumn>& columns() const { return columns_; }
  const DescriptorGrid& descriptors() const { return descriptors_; }
  const std::unordered_map<std::int64_t, KeyframeRecord>& keyframes() const { return keyframes_; }
  std::span<const std::int64_t> keyframe_order() const { return keyframe_order_; }

  bool band_anchored() const { return band_anchored_; }
  double band_low_world() const { return descriptors_.band_low; }
  double band_high_world() const { return descriptors_.band_high; }

  /// Decoded obstacle cloud, optionally restricted to a disk.
  std::vector<Point3> decode_obstacles(std::uint8_t threshold = kOccupiedCode,
                                       const Eigen::Vector2d* center = nullptr,
                                       double radius = 0.0) const;

  std::size_t column_count() const { return columns_.size(); }
  std::size_t layer_count() const;

  // Used by the map store.
  void insert_frozen_column(CellIndex cell, std::vector<SurfaceLayer> layers);
  void insert_descriptor(CellIndex cell, const Descriptor& desc);
  void set_band_world(double low, double high);

 private:
  struct CloseCounts {
    std::size_t created = 0;
    std::size_t merged = 0;
  };

  void register_observation(CellColumn& col, const Observation& obs);
  CloseCounts close_segment(CellColumn& col);
  void route_between(const Observation& obs, Representative* prev, Representative* next) const;
  static void fuse_into_rep(Representative& rep, const Observation& obs);

  struct ApplyResult {
    std::size_t cells = 0;
    std::size_t desc_cells = 0;
    CloseCounts closes;
  };
  /// Shared by live integration and replay. When `filter` is non-null only
  /// cells it contains are touched; `touched` collects the keyframe's
  /// contribution set when non-null.
  ApplyResult apply_keyframe(const KeyframeData& data, const Pose& pose,
                             const std::unordered_set<CellKey>* filter,
                             std::unordered_set<CellKey>* touched);
  void close_expired(const KeyframeData& data, const Pose& pose,
                     const std::unordered_set<CellKey>* filter, CloseCounts* counts);

  Config config_;
  UpdateLut lut_;
  std::unordered_map<CellKey, CellColumn> columns_;
  DescriptorGrid descriptors_;
  std::unordered_map<std::int64_t, KeyframeRecord> keyframes_;
  std::vector<std::int64_t> keyframe_order_;
  std::unordered_set<CellKey> open_cells_;
  bool band_anchored_ = false;
};

/// Layer view of a raw column under given parameters; exposed for tests.
std::vector<SurfaceLayer> materialize_layers(const CellColumn& col, const LayerParams& params);

}  // namespace roadatlas
