#pragma once

#include <optional>
#include <vector>

#include "roadatlas/atlas.hpp"

namespace roadatlas {

/// One traversable surface at one cell.
struct NavNode {
  CellIndex cell;
  int layer = 0;

  bool operator==(const NavNode&) const = default;
};

struct NavPath {
  std::vector<NavNode> nodes;
  double cost = 0.0;  // meters, 3D
};

/// Implicit 8-connected adjacency over the atlas's traversable layers; two
/// neighboring layers connect when their altitude gap is at most max_step.
class NavGraph {
 public:
  NavGraph(const Atlas& atlas, double max_step);

  bool valid(const NavNode& node) const;
  Point3 position(const NavNode& node) const;
  std::vector<std::pair<NavNode, double>> neighbors(const NavNode& node) const;

  /// Nearest traversable layer within `max_alt_gap` of the query altitude.
  std::optional<NavNode> snap(const Point3& query, double max_alt_gap = 1.0) const;

  const Atlas& atlas() const { return *atlas_; }
  double max_step() const { return max_step_; }

 private:
  const std::vector<SurfaceLayer>& column(CellKey key) const;

  const Atlas* atlas_;
  double max_step_;
  // Materialized once; columns() layers are pure functions of the atlas.
  mutable std::unordered_map<CellKey, std::vector<SurfaceLayer>> cache_;
};

NavGraph build_nav_graph(const Atlas& atlas, double max_step);

/// Cost-minimal path under the 3D Euclidean heuristic, or nullopt when start
/// and goal are disconnected. Throws on invalid nodes.
std::optional<NavPath> astar(const NavGraph& graph, const NavNode& start, const NavNode& goal);

}  // namespace roadatlas
