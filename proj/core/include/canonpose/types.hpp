#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "canonpose/errors.hpp"

namespace canonpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// J x 3 joint array, one joint per row.
using Joints3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// J x 2 joint array, one joint per row.
using Joints2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Smallest camera depth (meters) that may be divided by.
inline constexpr double kDepthEpsilon = 1e-6;
/// Shortest vector (meters) that still defines a direction.
inline constexpr double kVectorEpsilon = 1e-9;
/// Slack on cos(theta) = -1 below which two directions count as antiparallel.
inline constexpr double kAntiparallelEpsilon = 1e-8;

enum class Frame { Global, Camera, CanonicalCamera };

enum class Space { Image, NormalizedPlane, ScreenNormalized };

std::string_view to_string(Frame frame);
std::string_view to_string(Space space);

/// 3D skeleton pose in meters, tagged with the frame its coordinates live in.
class Pose3D {
 public:
  Pose3D(Joints3 joints, Frame frame);

  const Joints3& joints() const noexcept { return joints_; }
  Frame frame() const noexcept { return frame_; }
  Eigen::Index num_joints() const noexcept { return joints_.rows(); }
  Vec3 joint(Eigen::Index j) const { return joints_.row(j).transpose(); }

 private:
  Joints3 joints_;
  Frame frame_;
};

/// 2D skeleton pose, pixels in image space, unitless otherwise.
class Pose2D {
 public:
  Pose2D(Joints2 joints, Space space);

  const Joints2& joints() const noexcept { return joints_; }
  Space space() const noexcept { return space_; }
  Eigen::Index num_joints() const noexcept { return joints_.rows(); }
  Vec2 joint(Eigen::Index j) const { return joints_.row(j).transpose(); }

 private:
  Joints2 joints_;
  Space space_;
};

void require_frame(const Pose3D& pose, Frame expected, std::string_view op);
void require_space(const Pose2D& pose, Space expected, std::string_view op);

}  // namespace canonpose
