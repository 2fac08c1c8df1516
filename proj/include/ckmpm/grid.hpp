#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "ckmpm/types.hpp"

namespace ckmpm {

/// Geometry of the background grid(s). `extent` counts nodes per axis on the
/// primary grid (grid -1, nodes at origin + j*h). When multiplicity is 2 a
/// staggered companion grid (grid +1) places nodes at origin + (j + 1/2)*h
/// per axis, one fewer node per axis.
struct GridConfig {
  Vec2 origin = Vec2::Zero();
  Vec2i extent = Vec2i::Zero();
  Real h = 0;
  int multiplicity = 1;

  int node_count(int grid_id, int axis) const {
    return grid_id < 0 ? extent[axis] : extent[axis] - 1;
  }
  Vec2 node_position(int grid_id, const Vec2i& c) const {
    const Real s = grid_id < 0 ? 0.0 : 0.5;
    return origin + (c.cast<Real>() + Vec2::Constant(s)) * h;
  }
};

enum class DirichletMode : std::uint8_t { Free = 0, FixedZero = 1, Prescribed = 2 };

struct Node {
  Vec2i coord = Vec2i::Zero();
  Real m = 0;
  Real aux = 0;                 // scratch accumulator (scalar tracer transfers)
  Vec2 mom = Vec2::Zero();      // momentum accumulated during P2G
  Vec2 v = Vec2::Zero();        // velocity (P2G average, then solved value)
  Vec2 f_ext = Vec2::Zero();
  DirichletMode bc = DirichletMode::Free;
  Vec2 bc_value = Vec2::Zero();
  std::int32_t dof = -1;        // DOF-node index, -1 when pinned or inactive
};

/// Sparse hashed node storage over one or two staggered grids. Nodes are kept
/// in first-touch order (deterministic given particle order); the lattice ->
/// slot map only resolves coordinates.
class DualGrid {
public:
  DualGrid() = default;
  explicit DualGrid(const GridConfig& cfg) : cfg_(cfg) {}

  const GridConfig& config() const { return cfg_; }
  int multiplicity() const { return cfg_.multiplicity; }

  /// Zero all nodal fields and clear the active sets. Idempotent.
  void reset();

  /// Get-or-create the accumulator node at lattice coordinate `c`.
  Node& touch(int grid_id, const Vec2i& c);

  Node* find(int grid_id, const Vec2i& c);
  const Node* find(int grid_id, const Vec2i& c) const;

  std::vector<Node>& nodes(int grid_id) { return nodes_[slot(grid_id)]; }
  const std::vector<Node>& nodes(int grid_id) const { return nodes_[slot(grid_id)]; }

  Vec2 node_position(int grid_id, const Vec2i& c) const { return cfg_.node_position(grid_id, c); }

  std::size_t active_count() const { return nodes_[0].size() + nodes_[1].size(); }

  /// Mark active nodes whose position satisfies `region`. During solves their
  /// velocity is pinned to `value` (zero for FixedZero) via DOF elimination.
  void apply_dirichlet(const std::function<bool(const Vec2&)>& region, DirichletMode mode,
                       const Vec2& value = Vec2::Zero());

  static int slot(int grid_id) { return grid_id < 0 ? 0 : 1; }
  static int grid_id_of_slot(int s) { return s == 0 ? -1 : +1; }

private:
  GridConfig cfg_;
  std::unordered_map<std::uint64_t, std::int32_t> index_[2];
  std::vector<Node> nodes_[2];

  static std::uint64_t key(const Vec2i& c) {
    return (std::uint64_t(std::uint32_t(c.x())) << 32) | std::uint64_t(std::uint32_t(c.y()));
  }
};

struct DofRef {
  std::int8_t grid_id;    // -1 or +1
  std::int32_t node_slot; // index into DualGrid::nodes(grid_id)
};

/// Bijection between active free nodes and contiguous solver DOF-node
/// indices, ordered grid -1 first (lexicographic lattice order), then grid +1.
struct DofMap {
  std::vector<DofRef> nodes;
  int count() const { return static_cast<int>(nodes.size()); }
};

/// Assign DOF indices to every active free node with mass above
/// `mass_threshold`; all other nodes get dof = -1.
/// Throws EmptySystemError when no active free node exists.
DofMap build_dof_map(DualGrid& grid, Real mass_threshold);

}  // namespace ckmpm
