#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "roadatlas/atlas.hpp"

namespace roadatlas {

/// Structured failure while reading a map file; `byte_offset` points at the
/// first byte that could not be honored.
class MapParseError : public std::runtime_error {
 public:
  MapParseError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset(byte_offset) {}
  std::uint64_t byte_offset;
};

/// .lra layout, all little-endian:
///   magic "LRA1" | version u16 | resolution f64 | origin 2xf64 |
///   n_segments u8 | bits_per_segment u8 | z_low f32 | z_high f32 |
///   cell_count u64 | keyframe_count u64
/// then cells sorted by (ix, iy):
///   ix i32 | iy i32 | layer_count u8 |
///   per layer: mu f32 | sigma f32 | n_obs u32 | label u8 |
///   descriptor bytes (ceil(n_segments/2))
/// Bit 7 of the label byte flags a non-traversable layer.
inline constexpr std::uint16_t kMapFormatVersion = 1;
inline constexpr std::size_t kMapHeaderBytes = 56;

/// Deterministic serialization; same atlas -> identical bytes. Returns bytes
/// written. Keyframe bookkeeping is not persisted (count only).
std::uint64_t save_atlas(const Atlas& atlas, const std::string& path);

/// Reconstructs a read-only atlas (frozen layers + descriptors). Throws
/// MapParseError on bad magic/version/truncation without producing a partial
/// atlas.
Atlas load_atlas(const std::string& path);

struct StorageStats {
  std::uint64_t cells = 0;
  std::uint64_t layers = 0;
  std::uint64_t descriptor_bytes = 0;        // packed 4-bit probability storage
  std::uint64_t serialized_bytes = 0;        // exact .lra size from the layout
  std::uint64_t dense_prob_bytes = 0;        // one f32 probability per segment, observed cells
  std::uint64_t dense_grid_dump_bytes = 0;   // f32 probs + f32 mu/sigma over the bounding box
  double prob_compaction_ratio = 0.0;        // descriptor_bytes / dense_prob_bytes
};

StorageStats stats(const Atlas& atlas);

/// Exact file size for a given shape; the layout makes it a pure function of
/// cell count, total layer count and segment count.
std::uint64_t serialized_size(std::uint64_t cells, std::uint64_t total_layers, int n_segments);

}  // namespace roadatlas
