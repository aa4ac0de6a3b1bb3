#pragma once

#include "canonpose/camera.hpp"
#include "canonpose/skeleton.hpp"
#include "canonpose/types.hpp"

namespace canonpose {

/// Proper rotation that takes `source_vector`'s direction onto the principal axis (0, 0, 1)
/// (or onto whichever target it was aligned to by rodrigues_align).
class CanonicalRotation {
 public:
  CanonicalRotation(Mat3 matrix, Vec3 source_vector) : matrix_(std::move(matrix)), source_(std::move(source_vector)) {}

  static CanonicalRotation identity() { return {Mat3::Identity(), Vec3::UnitZ()}; }
  /// Rebuilds a stored canonical rotation; the source direction is R^T (0, 0, 1).
  static CanonicalRotation from_matrix(const Mat3& matrix);

  const Mat3& matrix() const noexcept { return matrix_; }
  const Vec3& source_vector() const noexcept { return source_; }
  Mat3 inverse() const { return matrix_.transpose(); }

 private:
  Mat3 matrix_;
  Vec3 source_;
};

/// Rodrigues rotation mapping direction(a) onto direction(b).
///
/// Throws DegenerateVectorError when either vector is shorter than kVectorEpsilon and
/// AntiparallelError when cos(angle) < -1 + kAntiparallelEpsilon.
CanonicalRotation rodrigues_align(const Vec3& a, const Vec3& b);

/// Camera-frame pose rotated so its root lies on the principal axis.
struct Canonical3D {
  Pose3D pose;  ///< canonical-camera frame; root at (0, 0, root_depth)
  CanonicalRotation rotation;
  double root_depth;  ///< |P_C^root|, carried through unchanged
};

Canonical3D canonicalize_3d(const Pose3D& pose, const Skeleton& skeleton);

/// Projects a canonical pose with the principal point replaced by the image center,
/// so the root lands on (W/2, H/2).
Pose2D project_canonical_centered(const Pose3D& canonical_pose, const CameraIntrinsics& k);

/// Subtracts the root joint from every joint; the frame tag is kept.
Pose3D root_relative(const Pose3D& pose, const Skeleton& skeleton);

struct Canonical2D {
  Pose2D pose;  ///< image space, root at (W/2, H/2)
  CanonicalRotation rotation;
};

/// Test-time canonicalization of an image-space pose: K R K^-1 applied in homogeneous
/// coordinates, then a translation that puts the root on the image center.
Canonical2D canonicalize_2d(const Pose2D& pose, const CameraIntrinsics& k, const Skeleton& skeleton);

/// Undoes the canonical rotation of a root-relative canonical-frame prediction.
/// Returns a root-relative camera-frame pose.
Pose3D back_transform(const Pose3D& prediction, const CanonicalRotation& rotation, double root_depth,
                      const Skeleton& skeleton);

/// Image-plane shift (fx X/Z, fy Y/Z) that an off-axis lateral offset (X, Y) adds at depth Z.
Vec2 residual_offset(const Vec3& root, const CameraIntrinsics& k);

/// A fully canonicalized 2D-3D training pair with everything needed to invert it.
struct CanonicalRecord {
  Pose3D canonical_3d;
  Pose2D canonical_2d;
  CanonicalRotation rotation;
  double root_depth;
  std::string skeleton_id;
};

/// 3D path: canonicalize_3d followed by project_canonical_centered.
CanonicalRecord make_canonical_record(const Pose3D& camera_pose, const CameraIntrinsics& k,
                                      const Skeleton& skeleton);

}  // namespace canonpose
