#include "roadatlas/local_ogm.hpp"

#include <algorithm>
#include <unordered_map>

namespace roadatlas {

LocalOgm::LocalOgm(double resolution, double radius)
    : resolution_(resolution), radius_(radius) {
  extent_ = 2 * static_cast<int>(std::ceil(radius / resolution));
  log_odds_.assign(static_cast<std::size_t>(extent_) * extent_, 0.0f);
}

void LocalOgm::add_log_odds(int row, int col, double delta, double clamp) {
  float& v = log_odds_[static_cast<std::size_t>(row) * extent_ + col];
  v = static_cast<float>(std::clamp(static_cast<double>(v) + delta, -clamp, clamp));
}

VirtualScan build_virtual_scan(const LabeledFrame& labeled, int bins, double radius,
                               double overhead_cutoff) {
  VirtualScan scan;
  scan.bins.assign(bins, VirtualScan::Bin{});

  std::vector<double> hit_range(bins, std::numeric_limits<double>::infinity());
  std::vector<double> frontier_range(bins, -1.0);

  for (std::size_t i = 0; i < labeled.frame.size(); ++i) {
    const Point3& p = labeled.frame.points[i];
    if (p.z() > overhead_cutoff) continue;
    const double range = horizontal_distance(p);
    if (range > radius || range < 1e-6) continue;
    const int bin = std::min(static_cast<int>(wrap_azimuth(std::atan2(p.y(), p.x())) /
                                              kTwoPi * bins),
                             bins - 1);
    if (labeled.labels[i] == PointLabel::Obstacle) {
      if (range < hit_range[bin]) {
        hit_range[bin] = range;
        scan.bins[bin].kind = ScanHit::ObstacleHit;
        scan.bins[bin].endpoint = {p.x(), p.y()};
      }
    } else if (scan.bins[bin].kind != ScanHit::ObstacleHit) {
      if (range > frontier_range[bin]) {
        frontier_range[bin] = range;
        scan.bins[bin].kind = ScanHit::FrontierFree;
        scan.bins[bin].endpoint = {p.x(), p.y()};
      }
    }
  }

  return scan;
}

namespace {

// 2D grid walk from the origin to just short of the endpoint; visits the
// start cell first, stops inside the cell containing the endpoint.
template <typename Visit>
void walk_ray(const LocalOgm& ogm, const Eigen::Vector2d& endpoint, Visit&& visit) {
  const double res = ogm.resolution();
  const double len = endpoint.norm();
  if (len < 1e-9) return;
  const Eigen::Vector2d dir = endpoint / len;

  // Pull the terminal point a hair inside so an endpoint exactly on a cell
  // boundary lands in the nearer cell.
  const double tiny = 1e-9;
  const Eigen::Vector2d tip = endpoint - dir * std::min(tiny * std::max(len, 1.0), len);

  int col = ogm.cell_col(0.0), row = ogm.cell_row(0.0);
  const int end_col = ogm.cell_col(tip.x()), end_row = ogm.cell_row(tip.y());

  const int step_x = dir.x() > 0 ? 1 : -1;
  const int step_y = dir.y() > 0 ? 1 : -1;

  auto boundary = [&](int cell, int step) {
    const int edge = cell - ogm.extent() / 2 + (step > 0 ? 1 : 0);
    return edge * res;
  };
  auto t_to = [&](double coord, double d) {
    return d != 0.0 ? coord / d : std::numeric_limits<double>::infinity();
  };

  double t_max_x = t_to(boundary(col, step_x), dir.x());
  double t_max_y = t_to(boundary(row, step_y), dir.y());
  const double t_delta_x = dir.x() != 0.0 ? res / std::abs(dir.x())
                                          : std::numeric_limits<double>::infinity();
  const double t_delta_y = dir.y() != 0.0 ? res / std::abs(dir.y())
                                          : std::numeric_limits<double>::infinity();

  const int max_cells = 4 * ogm.extent();
  for (int n = 0; n < max_cells; ++n) {
    if (!ogm.in_bounds(row, col)) break;
    const bool last = (col == end_col && row == end_row);
    visit(row, col, last);
    if (last) break;
    if (t_max_x < t_max_y) {
      col += step_x;
      t_max_x += t_delta_x;
    } else {
      row += step_y;
      t_max_y += t_delta_y;
    }
  }
}

}  // namespace

LocalOgm rasterize_ogm(const VirtualScan& scan, double resolution, double radius,
                       const OccupancyParams& params) {
  LocalOgm ogm(resolution, radius);
  for (const VirtualScan::Bin& bin : scan.bins) {
    if (bin.kind == ScanHit::Empty) continue;
    const bool occupied_end = bin.kind == ScanHit::ObstacleHit;
    walk_ray(ogm, bin.endpoint, [&](int row, int col, bool last) {
      if (last && occupied_end)
        ogm.add_log_odds(row, col, params.l_occ, params.l_max);
      else
        ogm.add_log_odds(row, col, params.l_free, params.l_max);
    });
  }
  return ogm;
}

void attach_height_gaussians(LocalOgm& ogm, const LabeledFrame& labeled,
                             const SigmaModel& model) {
  struct Acc {
    Eigen::Vector3d sum{0, 0, 0};
    std::uint32_t count = 0;
  };
  std::unordered_map<std::int32_t, Acc> acc;

  for (std::size_t i = 0; i < labeled.frame.size(); ++i) {
    if (labeled.labels[i] != PointLabel::Ground) continue;
    const Point3& p = labeled.frame.points[i];
    const int row = ogm.cell_row(p.y());
    const int col = ogm.cell_col(p.x());
    if (!ogm.in_bounds(row, col)) continue;
    Acc& a = acc[ogm.flat_index(row, col)];
    a.sum += p;
    a.count += 1;
  }

  std::vector<std::pair<std::int32_t, LocalOgm::HeightCell>> heights;
  heights.reserve(acc.size());
  for (const auto& [flat, a] : acc) {
    const auto [row, col] = ogm.row_col(flat);
    const double d = ogm.cell_center(row, col).norm();
    LocalOgm::HeightCell cell;
    cell.mean_sensor = a.sum / static_cast<double>(a.count);
    cell.sigma = static_cast<float>(model.sigma(d));
    cell.count = a.count;
    heights.emplace_back(flat, cell);
  }
  std::sort(heights.begin(), heights.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  ogm.set_heights(std::move(heights));
}

}  // namespace roadatlas
