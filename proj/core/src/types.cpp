#include "canonpose/types.hpp"

#include <string>

namespace canonpose {

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::Global:
      return "global";
    case Frame::Camera:
      return "camera";
    case Frame::CanonicalCamera:
      return "canonical-camera";
  }
  return "unknown";
}

std::string_view to_string(Space space) {
  switch (space) {
    case Space::Image:
      return "image";
    case Space::NormalizedPlane:
      return "normalized-plane";
    case Space::ScreenNormalized:
      return "screen-normalized";
  }
  return "unknown";
}

Pose3D::Pose3D(Joints3 joints, Frame frame) : joints_(std::move(joints)), frame_(frame) {
  if (joints_.rows() < 1) throw InvariantError("Pose3D needs at least one joint");
  if (!joints_.allFinite()) throw InvariantError("Pose3D has non-finite coordinates");
}

Pose2D::Pose2D(Joints2 joints, Space space) : joints_(std::move(joints)), space_(space) {
  if (joints_.rows() < 1) throw InvariantError("Pose2D needs at least one joint");
  if (!joints_.allFinite()) throw InvariantError("Pose2D has non-finite coordinates");
}

void require_frame(const Pose3D& pose, Frame expected, std::string_view op) {
  if (pose.frame() != expected) {
    throw InvalidFrameError(std::string(op) + ": expected " + std::string(to_string(expected)) +
                            " frame, got " + std::string(to_string(pose.frame())));
  }
}

void require_space(const Pose2D& pose, Space expected, std::string_view op) {
  if (pose.space() != expected) {
    throw InvalidFrameError(std::string(op) + ": expected " + std::string(to_string(expected)) +
                            " space, got " + std::string(to_string(pose.space())));
  }
}

}  // namespace canonpose
