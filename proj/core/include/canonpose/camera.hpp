#pragma once

#include <filesystem>
#include <optional>

#include "canonpose/types.hpp"

namespace canonpose {

/// Pinhole intrinsics plus the image size they were calibrated for.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  /// Throws InvariantError unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;

  Mat3 matrix() const;
  Mat3 inverse_matrix() const;
};

struct CameraExtrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  /// Throws InvariantError unless rotation is orthonormal with det +1 (1e-9).
  void validate() const;
};

/// Contents of a camera JSON file. No extrinsics means poses are already camera-frame.
struct Camera {
  CameraIntrinsics intrinsics;
  std::optional<CameraExtrinsics> extrinsics;
};

/// P_C = R * P_G + t for every joint.
Pose3D world_to_camera(const Pose3D& pose, const CameraExtrinsics& ext);

/// Perspective projection (fx X/Z + cx, fy Y/Z + cy). Throws BehindCameraError for Z <= kDepthEpsilon.
Pose2D project(const Pose3D& pose, const CameraIntrinsics& k);

/// Pixel coordinates to the depth-1 plane: ((u - cx)/fx, (v - cy)/fy).
Pose2D to_normalized_plane(const Pose2D& pose, const CameraIntrinsics& k);

/// Inverse of to_normalized_plane.
Pose2D from_normalized_plane(const Pose2D& pose, const CameraIntrinsics& k);

/// ((2u - W)/W, (2v - H)/W). Both axes divide by W so the aspect ratio survives.
Pose2D screen_normalize(const Pose2D& pose, const CameraIntrinsics& k);

Camera load_camera(const std::filesystem::path& path);
Camera parse_camera_json(std::string_view text);

}  // namespace canonpose
