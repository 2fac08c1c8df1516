#include "ckmpm/grid.hpp"

#include <algorithm>

namespace ckmpm {

void DualGrid::reset() {
  for (int s = 0; s < 2; ++s) {
    nodes_[s].clear();
    index_[s].clear();
  }
}

Node& DualGrid::touch(int grid_id, const Vec2i& c) {
  const int s = slot(grid_id);
  auto [it, inserted] = index_[s].try_emplace(key(c), std::int32_t(nodes_[s].size()));
  if (inserted) {
    Node n;
    n.coord = c;
    nodes_[s].push_back(n);
  }
  return nodes_[s][it->second];
}

Node* DualGrid::find(int grid_id, const Vec2i& c) {
  const int s = slot(grid_id);
  auto it = index_[s].find(key(c));
  return it == index_[s].end() ? nullptr : &nodes_[s][it->second];
}

const Node* DualGrid::find(int grid_id, const Vec2i& c) const {
  const int s = slot(grid_id);
  auto it = index_[s].find(key(c));
  return it == index_[s].end() ? nullptr : &nodes_[s][it->second];
}

void DualGrid::apply_dirichlet(const std::function<bool(const Vec2&)>& region, DirichletMode mode,
                               const Vec2& value) {
  for (int s = 0; s < 2; ++s) {
    const int g = grid_id_of_slot(s);
    for (Node& n : nodes_[s]) {
      if (region(node_position(g, n.coord))) {
        n.bc = mode;
        n.bc_value = mode == DirichletMode::Prescribed ? value : Vec2::Zero();
      }
    }
  }
}

DofMap build_dof_map(DualGrid& grid, Real mass_threshold) {
  DofMap map;
  for (int s = 0; s < 2; ++s) {
    const int g = DualGrid::grid_id_of_slot(s);
    std::vector<std::int32_t> order;
    auto& nodes = grid.nodes(g);
    order.reserve(nodes.size());
    for (std::int32_t i = 0; i < std::int32_t(nodes.size()); ++i) {
      Node& n = nodes[i];
      n.dof = -1;
      if (n.m > mass_threshold && n.bc == DirichletMode::Free) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&nodes](std::int32_t a, std::int32_t b) {
      const Vec2i& ca = nodes[a].coord;
      const Vec2i& cb = nodes[b].coord;
      return ca.x() != cb.x() ? ca.x() < cb.x() : ca.y() < cb.y();
    });
    for (std::int32_t i : order) {
      nodes[i].dof = map.count();
      map.nodes.push_back(DofRef{std::int8_t(g), i});
    }
  }
  if (map.nodes.empty()) throw EmptySystemError("no active free grid node (all empty or Dirichlet-fixed)");
  return map;
}

}  // namespace ckmpm
