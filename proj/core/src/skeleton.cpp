#include "canonpose/skeleton.hpp"

#include <algorithm>
#include <set>

namespace canonpose {

void Skeleton::validate() const {
  const std::size_t j = num_joints();
  if (j == 0) throw InvariantError("skeleton '" + name + "' has no joints");
  if (root_index >= j) throw InvariantError("skeleton '" + name + "': root index out of range");

  std::set<std::size_t> special{root_index};
  for (const auto& idx : {left_hip_index, right_hip_index, torso_index}) {
    if (!idx) continue;
    if (*idx >= j) throw InvariantError("skeleton '" + name + "': hip/torso index out of range");
    if (!special.insert(*idx).second) {
      throw InvariantError("skeleton '" + name + "': root, hips and torso must be distinct joints");
    }
  }

  if (edges.size() != j - 1) throw InvariantError("skeleton '" + name + "': a tree over J joints has J-1 edges");
  std::vector<int> parent_count(j, 0);
  for (const auto& [parent, child] : edges) {
    if (parent >= j || child >= j) throw InvariantError("skeleton '" + name + "': edge index out of range");
    if (child == root_index) throw InvariantError("skeleton '" + name + "': root cannot be a child");
    if (++parent_count[child] > 1) throw InvariantError("skeleton '" + name + "': joint with two parents");
  }
  // J-1 edges, one parent per non-root joint: a tree iff everything is reachable from the root.
  if (topological_edges().size() != edges.size()) {
    throw InvariantError("skeleton '" + name + "': edges do not form a tree rooted at the root joint");
  }
  if (!rest_offsets.empty() && rest_offsets.size() != j) {
    throw InvariantError("skeleton '" + name + "': rest_offsets must have one entry per joint");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> Skeleton::topological_edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> ordered;
  std::vector<bool> reached(num_joints(), false);
  if (root_index < reached.size()) reached[root_index] = true;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& edge : edges) {
      const auto [parent, child] = edge;
      if (parent < reached.size() && child < reached.size() && reached[parent] && !reached[child]) {
        reached[child] = true;
        ordered.push_back(edge);
        progress = true;
      }
    }
  }
  return ordered;
}

Skeleton Skeleton::h36m17() {
  Skeleton s;
  s.name = "h36m17";
  s.joint_names = {"pelvis",    "right_hip",  "right_knee",    "right_ankle", "left_hip",       "left_knee",
                   "left_ankle", "spine",     "thorax",        "neck",        "head",           "left_shoulder",
                   "left_elbow", "left_wrist", "right_shoulder", "right_elbow", "right_wrist"};
  s.root_index = 0;
  s.right_hip_index = 1;
  s.left_hip_index = 4;
  s.torso_index = 7;
  s.edges = {{0, 1}, {1, 2},  {2, 3},   {0, 4},   {4, 5},   {5, 6},   {0, 7},   {7, 8},
             {8, 9}, {9, 10}, {8, 11}, {11, 12}, {12, 13}, {8, 14}, {14, 15}, {15, 16}};
  s.rest_offsets = {
      {0.0, 0.0, 0.0},     // pelvis
      {-0.13, 0.0, 0.0},   // right_hip
      {0.0, 0.45, 0.0},    // right_knee
      {0.0, 0.44, 0.0},    // right_ankle
      {0.13, 0.0, 0.0},    // left_hip
      {0.0, 0.45, 0.0},    // left_knee
      {0.0, 0.44, 0.0},    // left_ankle
      {0.0, -0.23, 0.0},   // spine
      {0.0, -0.25, 0.0},   // thorax
      {0.0, -0.11, 0.0},   // neck
      {0.0, -0.12, 0.0},   // head
      {0.15, 0.02, 0.0},   // left_shoulder
      {0.0, 0.28, 0.0},    // left_elbow
      {0.0, 0.25, 0.0},    // left_wrist
      {-0.15, 0.02, 0.0},  // right_shoulder
      {0.0, 0.28, 0.0},    // right_elbow
      {0.0, 0.25, 0.0},    // right_wrist
  };
  return s;
}

Skeleton Skeleton::chain(std::size_t num_joints) {
  Skeleton s;
  s.name = "chain" + std::to_string(num_joints);
  for (std::size_t j = 0; j < num_joints; ++j) {
    s.joint_names.push_back("joint" + std::to_string(j));
    if (j > 0) s.edges.emplace_back(j - 1, j);
  }
  return s;
}

Skeleton skeleton_by_name(const std::string& name) {
  if (name == "h36m17") return Skeleton::h36m17();
  throw InvariantError("unknown skeleton '" + name + "' (available: h36m17)");
}

}  // namespace canonpose
