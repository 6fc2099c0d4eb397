#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "roadatlas/frame.hpp"

namespace roadatlas {

/// Spherical range grid over one frame. At most one point per cell, nearest
/// range wins on collisions.
struct RangeImage {
  int height = 0;  // rings
  int width = 0;   // azimuth columns

  struct Cell {
    float range = std::numeric_limits<float>::infinity();
    std::int32_t point_index = -1;
  };
  std::vector<Cell> cells;

  const Cell& at(int row, int col) const { return cells[row * width + col]; }
  bool filled(int row, int col) const { return at(row, col).point_index >= 0; }
  std::size_t filled_count() const;
};

/// Window into a range image. Column arithmetic is modulo the image width so
/// sectors wrap across the azimuth seam.
struct SectorWindow {
  int row_start = 0;
  int row_extent = 1;
  int col_start = 0;
  int col_extent = 1;
};

RangeImage build_range_image(const PointCloudFrame& frame, int height, int width);

/// Tiles (rows x cols) with overlapping windows. Column windows wrap modulo
/// `width`; consecutive windows overlap by (extent - step). Throws on window
/// extents larger than the image or non-positive steps.
std::vector<SectorWindow> enumerate_sectors(int height, int width,
                                            int win_rows, int win_cols,
                                            int row_step, int col_step);

}  // namespace roadatlas
