#include "roadatlas/traversability.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

namespace roadatlas {
namespace {

// Plane through three points; false when near-collinear.
bool plane_from_triple(const Point3& a, const Point3& b, const Point3& c,
                       Eigen::Vector3d* normal, double* offset) {
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double norm = n.norm();
  const double scale = std::max({(b - a).norm(), (c - a).norm(), 1e-12});
  if (norm < 1e-9 * scale * scale) return false;
  *normal = n / norm;
  *offset = normal->dot(a);
  return true;
}

int count_inliers(std::span<const Point3> pts, const Eigen::Vector3d& n, double off,
                  double threshold) {
  int count = 0;
  const double nx = n.x(), ny = n.y(), nz = n.z();
  for (const Point3& p : pts) {
    const double d = nx * p.x() + ny * p.y() + nz * p.z() - off;
    if (std::abs(d) <= threshold) ++count;
  }
  return count;
}

// Least-squares plane (centroid + smallest covariance eigenvector).
bool plane_least_squares(std::span<const Point3> pts, std::span<const std::int32_t> idx,
                         Eigen::Vector3d* normal, double* offset) {
  if (idx.size() < 3) return false;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (std::int32_t i : idx) centroid += pts[i];
  centroid /= static_cast<double>(idx.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::int32_t i : idx) {
    const Eigen::Vector3d d = pts[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success) return false;
  const Eigen::Vector3d n = eig.eigenvectors().col(0);
  if (n.norm() < 0.5) return false;
  *normal = n.normalized();
  *offset = normal->dot(centroid);
  return true;
}

}  // namespace

std::size_t LabeledFrame::count(PointLabel l) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

std::optional<PlaneModel> fit_plane_ransac(std::span<const Point3> points,
                                           double inlier_threshold,
                                           int max_iterations,
                                           std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (n < 3) return std::nullopt;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Eigen::Vector3d best_normal;
  double best_offset = 0.0;
  int best_count = 0;
  const int early_exit = static_cast<int>(0.95 * n);

  for (int it = 0; it < max_iterations; ++it) {
    const int i = pick(rng);
    int j = pick(rng);
    int k = pick(rng);
    if (i == j || j == k || i == k) continue;

    Eigen::Vector3d normal;
    double offset;
    if (!plane_from_triple(points[i], points[j], points[k], &normal, &offset)) continue;

    const int count = count_inliers(points, normal, offset, inlier_threshold);
    if (count > best_count) {
      best_count = count;
      best_normal = normal;
      best_offset = offset;
      if (best_count >= early_exit) break;
    }
  }
  if (best_count < 3) return std::nullopt;

  auto collect = [&](const Eigen::Vector3d& nrm, double off) {
    std::vector<std::int32_t> idx;
    idx.reserve(best_count);
    for (int i = 0; i < n; ++i) {
      if (std::abs(nrm.dot(points[i]) - off) <= inlier_threshold)
        idx.push_back(i);
    }
    return idx;
  };

  std::vector<std::int32_t> inliers = collect(best_normal, best_offset);

  // Refit on the consensus set; keep it only when no inliers are lost.
  Eigen::Vector3d refit_normal;
  double refit_offset;
  if (plane_least_squares(points, inliers, &refit_normal, &refit_offset)) {
    const int refit_count = count_inliers(points, refit_normal, refit_offset, inlier_threshold);
    if (refit_count >= static_cast<int>(inliers.size())) {
      best_normal = refit_normal;
      best_offset = refit_offset;
      inliers = collect(best_normal, best_offset);
    }
  }

  if (best_normal.z() < 0.0) {
    best_normal = -best_normal;
    best_offset = -best_offset;
  }
  PlaneModel model;
  model.normal = best_normal;
  model.offset = best_offset;
  model.inliers = std::move(inliers);
  return model;
}

bool check_normal(const PlaneModel& plane, double max_angle) {
  Eigen::Vector3d n = plane.normal;
  if (n.z() < 0.0) n = -n;
  const double angle = std::atan2(std::hypot(n.x(), n.y()), n.z());
  return angle < max_angle;
}

namespace {

struct SectorTask {
  SectorWindow window;
  std::uint64_t seed;
};

void gather_window_points(const RangeImage& img, const SectorWindow& w,
                          const PointCloudFrame& frame,
                          std::vector<Point3>* pts, std::vector<std::int32_t>* idx) {
  pts->clear();
  idx->clear();
  for (int r = 0; r < w.row_extent; ++r) {
    const int row = w.row_start + r;
    for (int c = 0; c < w.col_extent; ++c) {
      const int col = (w.col_start + c) % img.width;
      const RangeImage::Cell& cell = img.at(row, col);
      if (cell.point_index < 0) continue;
      pts->push_back(frame.points[cell.point_index]);
      idx->push_back(cell.point_index);
    }
  }
}

}  // namespace

LabeledFrame detect_traversable(const PointCloudFrame& frame,
                                const TraversabilityConfig& config,
                                DetectionDiagnostics* diagnostics) {
  LabeledFrame out;
  out.frame = frame;
  out.labels.assign(frame.size(), PointLabel::Obstacle);
  if (frame.empty()) return out;

  const RangeImage img = build_range_image(frame, config.image_rows, config.image_cols);

  const int col_step = config.overlap ? config.sector_col_step : config.sector_cols;
  const int fine_row_step = config.overlap ? config.fine_row_step : config.fine_rows;

  std::vector<SectorTask> tasks;
  auto add_pass = [&](int rows, int row_step, std::uint64_t tag) {
    if (rows > config.image_rows) rows = config.image_rows;
    for (const SectorWindow& w :
         enumerate_sectors(config.image_rows, config.image_cols, rows, config.sector_cols,
                           std::min(row_step, config.image_rows), col_step)) {
      const std::uint64_t seed =
          config.seed ^ (tag * 0x9e3779b97f4a7c15ull) ^
          (static_cast<std::uint64_t>(w.row_start) << 32) ^ static_cast<std::uint64_t>(w.col_start);
      tasks.push_back(SectorTask{w, seed});
    }
  };
  if (config.two_pass) add_pass(config.coarse_rows, config.coarse_row_step, 1);
  add_pass(config.fine_rows, fine_row_step, 2);

  const int n_threads = std::max(1, config.threads);
  std::vector<std::uint8_t> ground(frame.size(), 0);
  std::vector<std::vector<std::uint8_t>> ground_parts;
  std::vector<std::vector<PlaneModel>> plane_parts(n_threads);
  std::vector<std::size_t> accepted_parts(n_threads, 0);

  auto worker = [&](int tid, std::vector<std::uint8_t>* ground_bits) {
    std::vector<Point3> pts;
    std::vector<std::int32_t> idx;
    for (std::size_t t = tid; t < tasks.size(); t += n_threads) {
      gather_window_points(img, tasks[t].window, frame, &pts, &idx);
      if (static_cast<int>(pts.size()) < config.min_sector_points) continue;

      auto plane = fit_plane_ransac(pts, config.ransac_threshold, config.ransac_iterations,
                                    tasks[t].seed);
      if (!plane) continue;
      if (2 * plane->inliers.size() < pts.size()) continue;
      if (!check_normal(*plane, config.max_plane_angle)) continue;

      for (std::int32_t local : plane->inliers) (*ground_bits)[idx[local]] = 1;
      ++accepted_parts[tid];
      if (diagnostics) {
        PlaneModel global = *plane;
        global.inliers.clear();
        for (std::int32_t local : plane->inliers) global.inliers.push_back(idx[local]);
        plane_parts[tid].push_back(std::move(global));
      }
    }
  };

  if (n_threads == 1) {
    worker(0, &ground);
  } else {
    ground_parts.assign(n_threads, std::vector<std::uint8_t>(frame.size(), 0));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t, &ground_parts[t]);
    for (auto& th : pool) th.join();
    for (const auto& part : ground_parts)
      for (std::size_t i = 0; i < ground.size(); ++i) ground[i] |= part[i];
  }

  for (std::size_t i = 0; i < ground.size(); ++i)
    if (ground[i]) out.labels[i] = PointLabel::Ground;

  if (diagnostics) {
    diagnostics->sectors_total = tasks.size();
    diagnostics->sectors_accepted = 0;
    for (int t = 0; t < n_threads; ++t) {
      diagnostics->sectors_accepted += accepted_parts[t];
      for (auto& p : plane_parts[t]) diagnostics->accepted_planes.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace roadatlas
