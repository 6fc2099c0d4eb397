#include "roadatlas/atlas.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace roadatlas {

std::vector<int> assign_layer_labels(std::span<const Gaussian1D> reps_sorted_by_mu,
                                     const LayerParams& params) {
  std::vector<int> labels;
  labels.reserve(reps_sorted_by_mu.size());
  if (reps_sorted_by_mu.empty()) return labels;

  int label = 1;
  labels.push_back(label);
  for (std::size_t i = 1; i < reps_sorted_by_mu.size(); ++i) {
    const Gaussian1D& prev = reps_sorted_by_mu[i - 1];
    const Gaussian1D& cur = reps_sorted_by_mu[i];
    bool same = true;
    if (params.absolute_gap && cur.mu - prev.mu > *params.absolute_gap)
      same = false;
    else
      same = overlap_rate(prev, cur) > params.epsilon;
    if (!same) ++label;
    labels.push_back(label);
  }
  return labels;
}

int assign_observation_index(double t, double mu, std::span<const RepStamp> reps_by_time) {
  if (reps_by_time.empty()) throw std::invalid_argument("no representatives");
  if (t < reps_by_time.front().t_star) return 0;
  const int last = static_cast<int>(reps_by_time.size()) - 1;
  if (t >= reps_by_time[last].t_star) return last;
  for (int j = 0; j < last; ++j) {
    if (t >= reps_by_time[j].t_star && t < reps_by_time[j + 1].t_star) {
      const double d_prev = std::abs(reps_by_time[j].mu_star - mu);
      const double d_next = std::abs(reps_by_time[j + 1].mu_star - mu);
      return d_prev <= d_next ? j : j + 1;  // tie goes to the earlier one
    }
  }
  return last;
}

SurfaceLayer fuse_layer(const SurfaceLayer& layer, const Gaussian1D& obs) {
  const Gaussian1D fused = fuse_gaussians(Gaussian1D{layer.mu, layer.sigma}, obs);
  SurfaceLayer out = layer;
  out.mu = fused.mu;
  out.sigma = fused.sigma;
  out.n_obs = layer.n_obs + 1;
  return out;
}

namespace {

void fuse_obs_into(double* mu, double* var, std::uint32_t* n, double* occ,
                   const Observation& obs) {
  if (!(obs.sigma > 0.0)) throw std::invalid_argument("observation sigma must be > 0");
  const double vo = obs.sigma * obs.sigma;
  if (*n == 0) {
    *mu = obs.mu;
    *var = vo;
  } else {
    const double v = *var;
    *mu = (vo * *mu + v * obs.mu) / (v + vo);
    *var = v * vo / (v + vo);
  }
  *n += 1;
  *occ += obs.occ;
}

struct VirtualRep {
  double t_star = 0.0;
  double mu_star = 0.0;
  double sigma_star = 1.0;
  double mu = 0.0;
  double var = 0.0;
  std::uint32_t n = 0;
  double occ = 0.0;
};

void route_virtual(const Observation& obs, VirtualRep* prev, VirtualRep* next) {
  VirtualRep* target = next;
  if (prev) {
    const double d_prev = std::abs(prev->mu_star - obs.mu);
    const double d_next = std::abs(next->mu_star - obs.mu);
    target = d_prev <= d_next ? prev : next;
  }
  fuse_obs_into(&target->mu, &target->var, &target->n, &target->occ, obs);
}

std::vector<Observation> time_sorted(std::vector<Observation> obs) {
  std::stable_sort(obs.begin(), obs.end(),
                   [](const Observation& a, const Observation& b) { return a.time < b.time; });
  return obs;
}

const Observation& representative_of(std::span<const Observation> buffer) {
  const Observation* best = &buffer.front();
  for (const Observation& o : buffer)
    if (o.distance < best->distance) best = &o;
  return *best;
}

std::vector<SurfaceLayer> layers_from_reps(std::vector<VirtualRep> reps,
                                           const LayerParams& params) {
  std::vector<SurfaceLayer> out;
  if (reps.empty()) return out;

  std::stable_sort(reps.begin(), reps.end(), [](const VirtualRep& a, const VirtualRep& b) {
    return a.mu_star < b.mu_star || (a.mu_star == b.mu_star && a.t_star < b.t_star);
  });
  std::vector<Gaussian1D> gs;
  gs.reserve(reps.size());
  for (const VirtualRep& r : reps) gs.push_back(Gaussian1D{r.mu_star, r.sigma_star});
  const std::vector<int> labels = assign_layer_labels(gs, params);

  const int z = labels.empty() ? 0 : labels.back();
  for (int group = 1; group <= z; ++group) {
    double mu = 0.0, var = 0.0, occ = 0.0;
    std::uint32_t n = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (labels[i] != group || reps[i].n == 0) continue;
      if (n == 0) {
        mu = reps[i].mu;
        var = reps[i].var;
      } else {
        const double vo = reps[i].var;
        mu = (vo * mu + var * reps[i].mu) / (var + vo);
        var = var * vo / (var + vo);
      }
      n += reps[i].n;
      occ += reps[i].occ;
    }
    if (n == 0) continue;
    SurfaceLayer layer;
    layer.mu = mu;
    layer.sigma = std::sqrt(var);
    layer.n_obs = n;
    layer.traversable = occ < 0.0;
    out.push_back(layer);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SurfaceLayer& a, const SurfaceLayer& b) { return a.mu < b.mu; });
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].label = static_cast<std::uint8_t>(i + 1);
  return out;
}

}  // namespace

std::vector<SurfaceLayer> materialize_layers(const CellColumn& col, const LayerParams& params) {
  if (!col.frozen.empty()) return col.frozen;

  std::vector<VirtualRep> reps;
  reps.reserve(col.reps.size() + 1);
  for (const Representative& r : col.reps)
    reps.push_back(VirtualRep{r.t_star, r.mu_star, r.sigma_star, r.mu, r.var, r.n, r.occ});

  const bool has_open = col.open.has_value() && !col.open->buffer.empty();
  if (has_open) {
    const std::vector<Observation> buffer = time_sorted(col.open->buffer);
    const Observation& rep_obs = representative_of(buffer);
    VirtualRep vr{rep_obs.time, rep_obs.mu, rep_obs.sigma, 0.0, 0.0, 0, 0.0};

    VirtualRep* prev = reps.empty() ? nullptr : &reps.back();
    for (const Observation& o : col.pending) route_virtual(o, prev, &vr);
    for (const Observation& o : buffer) {
      if (o.time < vr.t_star)
        route_virtual(o, prev, &vr);
      else
        fuse_obs_into(&vr.mu, &vr.var, &vr.n, &vr.occ, o);  // nothing later exists yet
    }
    reps.push_back(vr);
  } else if (!reps.empty()) {
    for (const Observation& o : col.pending)
      fuse_obs_into(&reps.back().mu, &reps.back().var, &reps.back().n, &reps.back().occ, o);
  }

  return layers_from_reps(std::move(reps), params);
}

Atlas::Atlas(const Config& config) : config_(config) {
  config_.segments.validate();
  lut_ = build_update_lut(config_.p_hit, config_.p_miss);
  descriptors_.grid.resolution = config_.resolution;
  descriptors_.grid.origin = config_.origin;
  descriptors_.n_segments = config_.segments.n_segments;
  descriptors_.band_low = config_.segments.z_low;
  descriptors_.band_high = config_.segments.z_high;
}

void Atlas::fuse_into_rep(Representative& rep, const Observation& obs) {
  fuse_obs_into(&rep.mu, &rep.var, &rep.n, &rep.occ, obs);
}

void Atlas::register_observation(CellColumn& col, const Observation& obs) {
  if (!col.open) col.open.emplace();
  OpenSegment& seg = *col.open;
  if (seg.buffer.size() >= config_.segment_buffer_cap) {
    // Keep the closest observations: the representative is always among them.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < seg.buffer.size(); ++i)
      if (seg.buffer[i].distance > seg.buffer[worst].distance) worst = i;
    if (obs.distance < seg.buffer[worst].distance) seg.buffer[worst] = obs;
  } else {
    seg.buffer.push_back(obs);
  }
  seg.last_frame = obs.frame_id;
}

Atlas::CloseCounts Atlas::close_segment(CellColumn& col) {
  CloseCounts counts;
  if (!col.open || col.open->buffer.empty()) {
    col.open.reset();
    return counts;
  }
  const std::vector<Observation> buffer = time_sorted(std::move(col.open->buffer));
  col.open.reset();

  auto group_count = [&](const std::vector<Representative>& reps) {
    if (reps.empty()) return 0;
    std::vector<Gaussian1D> gs;
    gs.reserve(reps.size());
    for (const Representative& r : reps) gs.push_back(Gaussian1D{r.mu_star, r.sigma_star});
    std::sort(gs.begin(), gs.end(),
              [](const Gaussian1D& a, const Gaussian1D& b) { return a.mu < b.mu; });
    const auto labels = assign_layer_labels(gs, config_.layer);
    return labels.back();
  };
  const int z_old = group_count(col.reps);

  const Observation& rep_obs = representative_of(buffer);
  Representative next;
  next.t_star = rep_obs.time;
  next.mu_star = rep_obs.mu;
  next.sigma_star = rep_obs.sigma;

  Representative* prev = col.reps.empty() ? nullptr : &col.reps.back();
  auto route = [&](const Observation& obs) {
    Representative* target = &next;
    if (prev) {
      const double d_prev = std::abs(prev->mu_star - obs.mu);
      const double d_next = std::abs(next.mu_star - obs.mu);
      target = d_prev <= d_next ? prev : target;
    }
    fuse_into_rep(*target, obs);
  };

  for (const Observation& o : col.pending) route(o);
  col.pending.clear();
  for (const Observation& o : buffer) {
    if (o.time < next.t_star)
      route(o);
    else
      col.pending.push_back(o);  // waits for the following representative
  }
  col.reps.push_back(next);

  const int z_new = group_count(col.reps);
  counts.created = static_cast<std::size_t>(std::max(0, z_new - z_old));
  counts.merged = static_cast<std::size_t>(std::max(0, z_old + 1 - z_new));
  return counts;
}

void Atlas::close_expired(const KeyframeData& data, const Pose& pose,
                          const std::unordered_set<CellKey>* filter, CloseCounts* counts) {
  const double radius = data.ogm.radius();
  std::vector<CellKey> to_close;
  for (CellKey key : open_cells_) {
    if (filter && !filter->contains(key)) continue;
    auto it = columns_.find(key);
    if (it == columns_.end() || !it->second.open) {
      to_close.push_back(key);
      continue;
    }
    if (it->second.open->last_frame == data.frame_id) continue;  // still observed
    const Eigen::Vector2d c = descriptors_.grid.center(cell_from_key(key));
    const double d = std::hypot(c.x() - pose.translation.x(), c.y() - pose.translation.y());
    if (d > radius) to_close.push_back(key);
  }
  for (CellKey key : to_close) {
    auto it = columns_.find(key);
    if (it != columns_.end() && it->second.open) {
      const CloseCounts cc = close_segment(it->second);
      if (counts) {
        counts->created += cc.created;
        counts->merged += cc.merged;
      }
    }
    open_cells_.erase(key);
  }
}

Atlas::ApplyResult Atlas::apply_keyframe(const KeyframeData& data, const Pose& pose,
                                         const std::unordered_set<CellKey>* filter,
                                         std::unordered_set<CellKey>* touched) {
  ApplyResult result;
  const Eigen::Matrix3d rot = pose.rotation.toRotationMatrix();

  for (const auto& [flat, hcell] : data.ogm.heights()) {
    const auto [row, col_idx] = data.ogm.row_col(flat);
    const Eigen::Vector2d local = data.ogm.cell_center(row, col_idx);
    const Eigen::Vector3d world =
        rot * Eigen::Vector3d(local.x(), local.y(), 0.0) + pose.translation;
    const CellKey key = cell_key(descriptors_.grid.cell_at(world.x(), world.y()));
    if (filter && !filter->contains(key)) continue;

    Observation obs;
    obs.time = data.time;
    obs.frame_id = data.frame_id;
    obs.mu = (rot * hcell.mean_sensor + pose.translation).z();
    obs.sigma = hcell.sigma;
    obs.distance = local.norm();
    obs.occ = data.ogm.log_odds(row, col_idx);
    register_observation(columns_[key], obs);
    open_cells_.insert(key);
    if (touched) touched->insert(key);
    ++result.cells;
  }

  close_expired(data, pose, filter, &result.closes);

  if (!data.obstacles.empty()) {
    PGMFrame pgm;
    pgm.grid.grid = descriptors_.grid;
    pgm.grid.band_low = descriptors_.band_low;
    pgm.grid.band_high = descriptors_.band_high;
    pgm.grid.n_segments = descriptors_.n_segments;

    std::vector<Point3> world_obstacles;
    world_obstacles.reserve(data.obstacles.size());
    for (const Point3& p : data.obstacles) world_obstacles.push_back(rot * p + pose.translation);
    integrate_frame_obstacles(pgm, pose.translation, world_obstacles, lut_, data.ogm.radius());

    for (const auto& [key, events] : pgm.events) {
      if (filter && !filter->contains(key)) continue;
      Descriptor& desc = descriptors_.cells[key];
      for (const PGMFrame::Event& e : events)
        desc.set_code(e.segment, lut_.apply(desc.code(e.segment), e.hit));
      if (touched) touched->insert(key);
      ++result.desc_cells;
    }
  }
  return result;
}

UpdateSummary Atlas::integrate_keyframe(std::shared_ptr<const KeyframeData> data,
                                        const Pose& pose) {
  const auto start = std::chrono::steady_clock::now();
  if (!data) throw std::invalid_argument("null keyframe");
  if (std::abs(data->ogm.resolution() - config_.resolution) > 1e-12)
    throw std::invalid_argument("local map resolution does not match the atlas");
  if (keyframes_.contains(data->frame_id))
    throw std::invalid_argument("frame " + std::to_string(data->frame_id) +
                                " already integrated");
  if (!pose.valid()) throw std::invalid_argument("invalid pose");

  if (!band_anchored_) {
    descriptors_.band_low = pose.translation.z() + config_.segments.z_low;
    descriptors_.band_high = pose.translation.z() + config_.segments.z_high;
    band_anchored_ = true;
  }

  KeyframeRecord rec;
  rec.data = data;
  rec.pose = pose;
  const ApplyResult res = apply_keyframe(*data, pose, nullptr, &rec.contributed);
  keyframes_.emplace(data->frame_id, std::move(rec));
  keyframe_order_.push_back(data->frame_id);

  UpdateSummary summary;
  summary.cells_touched = res.cells;
  summary.descriptor_cells = res.desc_cells;
  summary.layers_created = res.closes.created;
  summary.layers_merged = res.closes.merged;
  summary.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

void Atlas::reintegrate_on_pose_update(std::int64_t frame_id, const Pose& new_pose) {
  auto it = keyframes_.find(frame_id);
  if (it == keyframes_.end())
    throw std::out_of_range("unknown keyframe " + std::to_string(frame_id));
  if (!new_pose.valid()) throw std::invalid_argument("invalid pose");
  KeyframeRecord& rec = it->second;

  // The descriptor band is anchored at the first keyframe's altitude; moving
  // that keyframe vertically re-anchors the whole grid.
  bool band_changed = false;
  if (!keyframe_order_.empty() && keyframe_order_.front() == frame_id) {
    const double new_low = new_pose.translation.z() + config_.segments.z_low;
    if (std::abs(new_low - descriptors_.band_low) > 1e-12) band_changed = true;
  }

  // Cells the keyframe will touch under the new pose.
  std::unordered_set<CellKey> affected = rec.contributed;
  {
    const Eigen::Matrix3d rot = new_pose.rotation.toRotationMatrix();
    for (const auto& [flat, hcell] : rec.data->ogm.heights()) {
      const auto [row, col_idx] = rec.data->ogm.row_col(flat);
      const Eigen::Vector2d local = rec.data->ogm.cell_center(row, col_idx);
      const Eigen::Vector3d world =
          rot * Eigen::Vector3d(local.x(), local.y(), 0.0) + new_pose.translation;
      affected.insert(cell_key(descriptors_.grid.cell_at(world.x(), world.y())));
    }
    if (!rec.data->obstacles.empty()) {
      PGMFrame probe;
      probe.grid.grid = descriptors_.grid;
      probe.grid.band_low = band_changed
                                ? new_pose.translation.z() + config_.segments.z_low
                                : descriptors_.band_low;
      probe.grid.band_high = band_changed
                                 ? new_pose.translation.z() + config_.segments.z_high
                                 : descriptors_.band_high;
      probe.grid.n_segments = descriptors_.n_segments;
      std::vector<Point3> world_obstacles;
      world_obstacles.reserve(rec.data->obstacles.size());
      for (const Point3& p : rec.data->obstacles)
        world_obstacles.push_back(rot * p + new_pose.translation);
      integrate_frame_obstacles(probe, new_pose.translation, world_obstacles, lut_,
                                rec.data->ogm.radius());
      for (const auto& [key, ev] : probe.events) affected.insert(key);
    }
  }
  if (band_changed) {
    for (const auto& [key, col] : columns_) affected.insert(key);
    for (const auto& [key, desc] : descriptors_.cells) affected.insert(key);
    descriptors_.band_low = new_pose.translation.z() + config_.segments.z_low;
    descriptors_.band_high = new_pose.translation.z() + config_.segments.z_high;
  }

  for (CellKey key : affected) {
    columns_.erase(key);
    descriptors_.cells.erase(key);
    open_cells_.erase(key);
  }

  rec.pose = new_pose;

  for (std::int64_t id : keyframe_order_) {
    KeyframeRecord& r = keyframes_.at(id);
    std::unordered_set<CellKey> touched;
    apply_keyframe(*r.data, r.pose, &affected, &touched);
    for (auto cit = r.contributed.begin(); cit != r.contributed.end();) {
      if (affected.contains(*cit))
        cit = r.contributed.erase(cit);
      else
        ++cit;
    }
    r.contributed.merge(touched);
  }
}

std::vector<SurfaceLayer> Atlas::layers(CellKey key) const {
  auto it = columns_.find(key);
  if (it == columns_.end()) return {};
  return materialize_layers(it->second, config_.layer);
}

std::size_t Atlas::layer_count() const {
  std::size_t n = 0;
  for (const auto& [key, col] : columns_) n += materialize_layers(col, config_.layer).size();
  return n;
}

std::vector<Point3> Atlas::decode_obstacles(std::uint8_t threshold,
                                            const Eigen::Vector2d* center,
                                            double radius) const {
  std::vector<Point3> out;
  for (const auto& [key, desc] : descriptors_.cells) {
    const CellIndex cell = cell_from_key(key);
    const Eigen::Vector2d c = descriptors_.grid.center(cell);
    if (center && (c - *center).norm() > radius) continue;
    for (int s = 0; s < descriptors_.n_segments; ++s) {
      const std::uint8_t code = desc.code(s);
      if (code != kNeverObserved && code >= threshold)
        out.emplace_back(c.x(), c.y(), descriptors_.segment_center_z(s));
    }
  }
  return out;
}

void Atlas::insert_frozen_column(CellIndex cell, std::vector<SurfaceLayer> layers) {
  columns_[cell_key(cell)].frozen = std::move(layers);
}

void Atlas::insert_descriptor(CellIndex cell, const Descriptor& desc) {
  descriptors_.cells[cell_key(cell)] = desc;
}

void Atlas::set_band_world(double low, double high) {
  descriptors_.band_low = low;
  descriptors_.band_high = high;
  band_anchored_ = true;
}

}  // namespace roadatlas
