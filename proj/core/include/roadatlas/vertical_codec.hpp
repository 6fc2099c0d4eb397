#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "roadatlas/geometry.hpp"
#include "roadatlas/grid.hpp"

namespace roadatlas {

/// Vertical slab split into equal segments. z_low/z_high are relative to the
/// sensor; the band becomes world-anchored when the map fixes its reference.
struct SegmentConfig {
  double z_low = -1.0;
  double z_high = 7.0;
  int n_segments = 8;
  int bits_per_segment = 4;

  void validate() const;
  double segment_height() const { return (z_high - z_low) / n_segments; }
  int descriptor_bytes() const { return (n_segments * 4 + 7) / 8; }
};

inline constexpr std::uint8_t kNeverObserved = 0;   // distinct from observed-unknown (8)
inline constexpr std::uint8_t kUnknownCode = 8;
inline constexpr std::uint8_t kOccupiedCode = 9;    // default decode threshold

/// code = 1 + round(14 p), round half up; 0.5 maps to 8 exactly.
std::uint8_t quantize_prob(double p);

/// p = (code - 1) / 14 for codes 1..15. Code 0 is the never-observed
/// sentinel and is rejected here; callers treat it as unknown without
/// asserting an observation.
double decode_prob(std::uint8_t code);

/// 16 x {miss, hit} transition table. Each entry is the quantized odds update
/// of the decoded probability (clamped half a quantization step inside (0,1)
/// so no state is absorbing); code 0 updates from 0.5.
struct UpdateLut {
  std::array<std::array<std::uint8_t, 2>, 16> next{};

  std::uint8_t apply(std::uint8_t code, bool hit) const { return next[code][hit ? 1 : 0]; }
};

UpdateLut build_update_lut(double p_hit, double p_miss);

/// Packed 4-bit segment codes, low nibble = lowest segment.
struct Descriptor {
  std::array<std::uint8_t, 16> bytes{};  // caps n_segments at 32

  std::uint8_t code(int seg) const {
    const std::uint8_t b = bytes[seg / 2];
    return (seg % 2 == 0) ? (b & 0x0f) : (b >> 4);
  }
  void set_code(int seg, std::uint8_t c) {
    std::uint8_t& b = bytes[seg / 2];
    b = (seg % 2 == 0) ? static_cast<std::uint8_t>((b & 0xf0) | (c & 0x0f))
                       : static_cast<std::uint8_t>((b & 0x0f) | ((c & 0x0f) << 4));
  }
  bool operator==(const Descriptor&) const = default;
};

/// Sparse grid of packed descriptors over (cell, segment). `band_low/high`
/// are absolute altitudes in whatever z reference the owner uses (world for
/// the atlas, sensor for a standalone frame).
struct DescriptorGrid {
  Grid2D grid;
  double band_low = 0.0;
  double band_high = 8.0;
  int n_segments = 8;
  std::unordered_map<CellKey, Descriptor> cells;

  double segment_height() const { return (band_high - band_low) / n_segments; }
  double segment_center_z(int seg) const { return band_low + (seg + 0.5) * segment_height(); }
  bool compatible(const DescriptorGrid& o) const;
};

/// One frame's evidence: ordered hit/miss events per cell plus the codes they
/// produce from a blank grid.
struct PGMFrame {
  struct Event {
    std::uint8_t segment;
    bool hit;
  };
  DescriptorGrid grid;
  std::unordered_map<CellKey, std::vector<Event>> events;
};

/// Traverses the 3D grid (x, y, vertical segment) from `origin` to each
/// obstacle point, recording a miss on every crossed segment and a hit on the
/// terminal one. Rays are clipped to the descriptor band; points below the
/// band are ignored as ground noise.
void integrate_frame_obstacles(PGMFrame& pgm, const Point3& origin,
                               std::span<const Point3> obstacle_points,
                               const UpdateLut& lut,
                               double max_radius = 0.0);

/// Replays a frame's recorded events into the global descriptors; equivalent
/// to applying the frame's ray updates directly to the global grid. Throws on
/// band/resolution mismatch.
void fuse_into_atlas(DescriptorGrid& global, const PGMFrame& frame, const UpdateLut& lut);

/// One point per occupied segment (code >= threshold) at the segment center.
std::vector<Point3> decode_cloud(const DescriptorGrid& grid,
                                 std::uint8_t occupied_threshold = kOccupiedCode);

}  // namespace roadatlas
