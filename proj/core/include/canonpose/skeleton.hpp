#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canonpose/types.hpp"

namespace canonpose {

/// Joint labels and topology of a skeleton.
///
/// Edges are (parent, child) pairs forming a tree rooted at `root_index`.
/// Hip and torso indices are only required by the orientation statistics;
/// skeletons without them can still be canonicalized.
struct Skeleton {
  std::string name;
  std::vector<std::string> joint_names;
  std::size_t root_index = 0;
  std::optional<std::size_t> left_hip_index;
  std::optional<std::size_t> right_hip_index;
  std::optional<std::size_t> torso_index;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  /// Child offset from its parent in a body frame (x = subject's left, y = down,
  /// z = away from the viewer), meters, for a 0.45 m thigh. Empty when unknown.
  std::vector<Vec3> rest_offsets;

  std::size_t num_joints() const noexcept { return joint_names.size(); }

  /// Throws InvariantError if indices are out of range, overlap, or the edges are not a tree.
  void validate() const;

  /// Edges ordered so that every parent appears before its children.
  std::vector<std::pair<std::size_t, std::size_t>> topological_edges() const;

  /// 17-joint Human3.6M layout (pelvis root, spine as torso joint).
  static Skeleton h36m17();
  /// Chain 0 -> 1 -> ... -> J-1 rooted at joint 0 with no hip/torso metadata.
  static Skeleton chain(std::size_t num_joints);
};

/// Looks up a built-in skeleton ("h36m17"). Throws InvariantError for unknown names.
Skeleton skeleton_by_name(const std::string& name);

}  // namespace canonpose
