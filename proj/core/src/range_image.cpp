#include "roadatlas/range_image.hpp"

#include <algorithm>
#include <stdexcept>

namespace roadatlas {

std::size_t RangeImage::filled_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.point_index >= 0; }));
}

RangeImage build_range_image(const PointCloudFrame& frame, int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("range image dimensions must be >= 1");

  RangeImage img;
  img.height = height;
  img.width = width;
  img.cells.assign(static_cast<std::size_t>(height) * width, RangeImage::Cell{});

  for (std::size_t i = 0; i < frame.size(); ++i) {
    const int row = frame.ring[i];
    if (row >= height)
      throw std::invalid_argument("malformed frame: ring " + std::to_string(row) +
                                  " out of range for " + std::to_string(height) + " channels");
    int col = static_cast<int>(frame.azimuth[i] / kTwoPi * width);
    col = std::clamp(col, 0, width - 1);

    RangeImage::Cell& cell = img.cells[static_cast<std::size_t>(row) * width + col];
    const float range = static_cast<float>(frame.points[i].norm());
    if (cell.point_index < 0 || range < cell.range) {
      cell.range = range;
      cell.point_index = static_cast<std::int32_t>(i);
    }
  }
  return img;
}

std::vector<SectorWindow> enumerate_sectors(int height, int width,
                                            int win_rows, int win_cols,
                                            int row_step, int col_step) {
  if (win_rows < 1 || win_cols < 1) throw std::invalid_argument("window extents must be >= 1");
  if (row_step < 1 || col_step < 1) throw std::invalid_argument("steps must be >= 1");
  if (win_rows > height || win_cols > width)
    throw std::invalid_argument("window extent exceeds image dimension");

  std::vector<int> row_starts;
  for (int r = 0;; r += row_step) {
    r = std::min(r, height - win_rows);  // keep the last band flush with the image
    row_starts.push_back(r);
    if (r >= height - win_rows) break;
  }

  std::vector<SectorWindow> out;
  for (int r : row_starts) {
    for (int c = 0; c < width; c += col_step) {
      out.push_back(SectorWindow{r, win_rows, c, win_cols});
    }
  }
  return out;
}

}  // namespace roadatlas
