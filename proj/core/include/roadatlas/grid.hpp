#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace roadatlas {

/// 2D map cell index; may be negative (world-anchored grids).
struct CellIndex {
  std::int32_t ix = 0;
  std::int32_t iy = 0;

  bool operator==(const CellIndex&) const = default;
};

/// Packed key usable in hash maps.
using CellKey = std::int64_t;

inline CellKey cell_key(CellIndex c) {
  return (static_cast<std::int64_t>(static_cast<std::uint32_t>(c.ix)) << 32) |
         static_cast<std::uint32_t>(c.iy);
}

inline CellIndex cell_from_key(CellKey k) {
  return CellIndex{static_cast<std::int32_t>(static_cast<std::uint64_t>(k) >> 32),
                   static_cast<std::int32_t>(static_cast<std::uint32_t>(k & 0xffffffffu))};
}

/// World <-> cell conversion for a grid anchored at `origin` with square cells.
struct Grid2D {
  double resolution = 0.1;
  Eigen::Vector2d origin{0.0, 0.0};

  CellIndex cell_at(double x, double y) const {
    return CellIndex{static_cast<std::int32_t>(std::floor((x - origin.x()) / resolution)),
                     static_cast<std::int32_t>(std::floor((y - origin.y()) / resolution))};
  }
  Eigen::Vector2d center(CellIndex c) const {
    return {origin.x() + (c.ix + 0.5) * resolution,
            origin.y() + (c.iy + 0.5) * resolution};
  }
};

}  // namespace roadatlas

template <>
struct std::hash<roadatlas::CellIndex> {
  std::size_t operator()(const roadatlas::CellIndex& c) const noexcept {
    return std::hash<std::int64_t>{}(roadatlas::cell_key(c));
  }
};
