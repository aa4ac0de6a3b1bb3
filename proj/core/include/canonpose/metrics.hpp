#pragma once

#include <span>
#include <vector>

#include "canonpose/types.hpp"

namespace canonpose {

/// x -> scale * R x + t
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Joints3 apply(const Joints3& points) const;
};

/// Mean over frames and joints of the Euclidean joint distance (meters).
/// Throws DimensionError on frame- or joint-count mismatch or empty input.
double mpjpe(std::span<const Pose3D> pred, std::span<const Pose3D> gt);

/// Mean joint distance of a single frame.
double mean_joint_error(const Pose3D& pred, const Pose3D& gt);

struct ProcrustesResult {
  Pose3D aligned;
  SimilarityTransform transform;
};

/// Least-squares similarity alignment of `pred` onto `gt` (Umeyama, reflections excluded).
/// Throws DegenerateShapeError when either joint set has rank < 2 or J < 3.
ProcrustesResult procrustes_align(const Pose3D& pred, const Pose3D& gt);

/// MPJPE after per-frame Procrustes alignment.
double p_mpjpe(std::span<const Pose3D> pred, std::span<const Pose3D> gt);

/// Pairwise (cascade) summation; the result does not depend on how callers chunk the work.
double pairwise_sum(std::span<const double> values);

}  // namespace canonpose
