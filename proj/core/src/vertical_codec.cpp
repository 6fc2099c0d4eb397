#include "roadatlas/vertical_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roadatlas {

void SegmentConfig::validate() const {
  if (!(z_high > z_low)) throw std::invalid_argument("segment band requires z_high > z_low");
  if (n_segments < 1 || n_segments > 32)
    throw std::invalid_argument("n_segments must be in 1..32");
  if (bits_per_segment != 4) throw std::invalid_argument("only 4-bit segments are supported");
}

std::uint8_t quantize_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  // round half up, deterministic across platforms
  return static_cast<std::uint8_t>(1.0 + std::floor(14.0 * p + 0.5));
}

double decode_prob(std::uint8_t code) {
  if (code < 1 || code > 15)
    throw std::invalid_argument("code " + std::to_string(code) + " outside 1..15");
  return (code - 1) / 14.0;
}

UpdateLut build_update_lut(double p_hit, double p_miss) {
  if (!(p_hit > 0.5) || !(p_hit < 1.0) || !(p_miss < 0.5) || !(p_miss > 0.0))
    throw std::invalid_argument("sensor model requires p_miss < 0.5 < p_hit, both in (0,1)");

  // Clamp half a quantization step inside (0,1) so the odds form has no
  // absorbing endpoint and dynamic evidence can always revise a cell.
  constexpr double kClampLo = 1.0 / 28.0;
  constexpr double kClampHi = 27.0 / 28.0;
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };

  UpdateLut lut;
  for (int code = 0; code < 16; ++code) {
    const double p = code == kNeverObserved ? 0.5 : decode_prob(static_cast<std::uint8_t>(code));
    const double l = logit(std::clamp(p, kClampLo, kClampHi));
    for (int event = 0; event < 2; ++event) {
      const double updated = l + (event ? logit(p_hit) : logit(p_miss));
      const double p_new = 1.0 / (1.0 + std::exp(-updated));
      lut.next[code][event] = quantize_prob(std::clamp(p_new, 0.0, 1.0));
    }
  }
  return lut;
}

bool DescriptorGrid::compatible(const DescriptorGrid& o) const {
  return std::abs(grid.resolution - o.grid.resolution) < 1e-12 &&
         (grid.origin - o.grid.origin).norm() < 1e-12 &&
         std::abs(band_low - o.band_low) < 1e-9 &&
         std::abs(band_high - o.band_high) < 1e-9 && n_segments == o.n_segments;
}

namespace {

// 3D stepping over (x, y, vertical segment): square lateral cells, coarse
// z slabs. Visits every cell the clipped ray crosses, terminal cell last.
template <typename Visit>
void walk_ray_3d(const DescriptorGrid& g, const Point3& origin, const Point3& target,
                 Visit&& visit) {
  const double h = g.segment_height();
  const Eigen::Vector3d delta = target - origin;
  const double len = delta.norm();
  if (len < 1e-12) return;
  const Eigen::Vector3d dir = delta / len;

  // Clip to the vertical band.
  double t0 = 0.0, t1 = 1.0;
  if (std::abs(dir.z()) > 1e-15) {
    double ta = (g.band_low - origin.z()) / delta.z();
    double tb = (g.band_high - origin.z()) / delta.z();
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  } else if (origin.z() < g.band_low || origin.z() >= g.band_high) {
    return;
  }
  if (t0 >= t1) return;

  const double tiny = 1e-9 / std::max(len, 1.0);
  const Eigen::Vector3d start = origin + delta * std::min(t0 + tiny, 1.0);
  const Eigen::Vector3d stop = origin + delta * std::max(t1 - tiny, 0.0);

  auto seg_of = [&](double z) {
    return std::clamp(static_cast<int>(std::floor((z - g.band_low) / h)), 0, g.n_segments - 1);
  };
  CellIndex cell = g.grid.cell_at(start.x(), start.y());
  int seg = seg_of(start.z());
  const CellIndex end_cell = g.grid.cell_at(stop.x(), stop.y());
  const int end_seg = seg_of(stop.z());

  const int sx = dir.x() > 0 ? 1 : -1;
  const int sy = dir.y() > 0 ? 1 : -1;
  const int sz = dir.z() > 0 ? 1 : -1;
  const double res = g.grid.resolution;

  auto t_boundary = [&](double coord, double org, double d) {
    return d != 0.0 ? (coord - org) / d : std::numeric_limits<double>::infinity();
  };
  double tx = t_boundary(g.grid.origin.x() + (cell.ix + (sx > 0 ? 1 : 0)) * res, origin.x(),
                         delta.x());
  double ty = t_boundary(g.grid.origin.y() + (cell.iy + (sy > 0 ? 1 : 0)) * res, origin.y(),
                         delta.y());
  double tz = t_boundary(g.band_low + (seg + (sz > 0 ? 1 : 0)) * h, origin.z(), delta.z());
  const double dtx = delta.x() != 0.0 ? res / std::abs(delta.x())
                                      : std::numeric_limits<double>::infinity();
  const double dty = delta.y() != 0.0 ? res / std::abs(delta.y())
                                      : std::numeric_limits<double>::infinity();
  const double dtz = delta.z() != 0.0 ? h / std::abs(delta.z())
                                      : std::numeric_limits<double>::infinity();

  const int max_steps = 8 * (static_cast<int>(len / res) + static_cast<int>(len / h) + 4);
  for (int n = 0; n < max_steps; ++n) {
    const bool last = cell == end_cell && seg == end_seg;
    visit(cell, seg, last);
    if (last) break;
    if (tx <= ty && tx <= tz) {
      cell.ix += sx;
      tx += dtx;
    } else if (ty <= tz) {
      cell.iy += sy;
      ty += dty;
    } else {
      seg += sz;
      tz += dtz;
      if (seg < 0 || seg >= g.n_segments) break;
    }
  }
}

void apply_event(DescriptorGrid& g, std::unordered_map<CellKey, std::vector<PGMFrame::Event>>* events,
                 const UpdateLut& lut, CellIndex cell, int seg, bool hit) {
  const CellKey key = cell_key(cell);
  Descriptor& desc = g.cells[key];
  desc.set_code(seg, lut.apply(desc.code(seg), hit));
  if (events)
    (*events)[key].push_back(PGMFrame::Event{static_cast<std::uint8_t>(seg), hit});
}

}  // namespace

void integrate_frame_obstacles(PGMFrame& pgm, const Point3& origin,
                               std::span<const Point3> obstacle_points,
                               const UpdateLut& lut, double max_radius) {
  DescriptorGrid& g = pgm.grid;
  for (const Point3& p : obstacle_points) {
    if (p.z() < g.band_low) continue;  // ground-level noise stays out of the grid
    if (max_radius > 0.0 &&
        std::hypot(p.x() - origin.x(), p.y() - origin.y()) > max_radius)
      continue;
    const bool hit_in_band = p.z() < g.band_high;
    walk_ray_3d(g, origin, p, [&](CellIndex cell, int seg, bool last) {
      if (last && hit_in_band)
        apply_event(g, &pgm.events, lut, cell, seg, true);
      else
        apply_event(g, &pgm.events, lut, cell, seg, false);
    });
  }
}

void fuse_into_atlas(DescriptorGrid& global, const PGMFrame& frame, const UpdateLut& lut) {
  if (!global.compatible(frame.grid))
    throw std::invalid_argument("descriptor grid configuration mismatch");
  for (const auto& [key, events] : frame.events) {
    Descriptor& desc = global.cells[key];
    for (const PGMFrame::Event& e : events)
      desc.set_code(e.segment, lut.apply(desc.code(e.segment), e.hit));
  }
}

std::vector<Point3> decode_cloud(const DescriptorGrid& grid, std::uint8_t occupied_threshold) {
  std::vector<Point3> out;
  for (const auto& [key, desc] : grid.cells) {
    const CellIndex cell = cell_from_key(key);
    const Eigen::Vector2d c = grid.grid.center(cell);
    for (int s = 0; s < grid.n_segments; ++s) {
      const std::uint8_t code = desc.code(s);
      if (code != kNeverObserved && code >= occupied_threshold)
        out.emplace_back(c.x(), c.y(), grid.segment_center_z(s));
    }
  }
  return out;
}

}  // namespace roadatlas
