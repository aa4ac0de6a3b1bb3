#include "canonpose/canonical.hpp"

#include <cmath>
#include <string>

namespace canonpose {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

std::size_t checked_root(const Skeleton& skeleton, Eigen::Index num_joints) {
  if (skeleton.num_joints() != static_cast<std::size_t>(num_joints)) {
    throw DimensionError("skeleton '" + skeleton.name + "' has " + std::to_string(skeleton.num_joints()) +
                         " joints, pose has " + std::to_string(num_joints));
  }
  if (skeleton.root_index >= static_cast<std::size_t>(num_joints)) {
    throw DimensionError("skeleton '" + skeleton.name + "' root index " + std::to_string(skeleton.root_index) +
                         " out of range for a " + std::to_string(num_joints) + "-joint pose");
  }
  return skeleton.root_index;
}

}  // namespace

CanonicalRotation CanonicalRotation::from_matrix(const Mat3& matrix) {
  return {matrix, matrix.transpose() * Vec3::UnitZ()};
}

CanonicalRotation rodrigues_align(const Vec3& a, const Vec3& b) {
  const double a_norm = a.norm();
  const double b_norm = b.norm();
  if (!(a_norm > kVectorEpsilon) || !(b_norm > kVectorEpsilon)) {
    throw DegenerateVectorError("rodrigues_align: input vector shorter than " + std::to_string(kVectorEpsilon));
  }
  const Vec3 a_hat = a / a_norm;
  const Vec3 b_hat = b / b_norm;
  const double cos_theta = a_hat.dot(b_hat);
  if (cos_theta < -1.0 + kAntiparallelEpsilon) {
    throw AntiparallelError("rodrigues_align: vectors are antiparallel, rotation axis undefined");
  }

  // With v = a x b (|v| = sin theta) and unit axis k = v / |v|:
  //   I + sin(theta) [k]x + (1 - cos(theta)) [k]x^2  ==  I + [v]x + [v]x^2 / (1 + cos(theta)).
  // The right-hand form needs no division by sin(theta), so aligned inputs give exactly I.
  const Mat3 s = skew(a_hat.cross(b_hat));
  Mat3 r = Mat3::Identity() + s + (s * s) / (1.0 + cos_theta);
  return {r, a};
}

Canonical3D canonicalize_3d(const Pose3D& pose, const Skeleton& skeleton) {
  require_frame(pose, Frame::Camera, "canonicalize_3d");
  const auto root_idx = static_cast<Eigen::Index>(checked_root(skeleton, pose.num_joints()));
  const Vec3 root = pose.joint(root_idx);
  if (!(root.z() > kDepthEpsilon)) {
    throw BehindCameraError("canonicalize_3d: root depth " + std::to_string(root.z()) + " is not in front of the camera");
  }
  CanonicalRotation rotation = rodrigues_align(root, Vec3::UnitZ());
  const double depth = root.norm();

  Joints3 rotated = pose.joints() * rotation.matrix().transpose();
  // The rotated root equals (0, 0, |root|) up to rounding; pin it so the centering contract is exact.
  rotated.row(root_idx) << 0.0, 0.0, depth;
  return {Pose3D(std::move(rotated), Frame::CanonicalCamera), std::move(rotation), depth};
}

Pose2D project_canonical_centered(const Pose3D& canonical_pose, const CameraIntrinsics& k) {
  require_frame(canonical_pose, Frame::CanonicalCamera, "project_canonical_centered");
  const auto& p = canonical_pose.joints();
  const double u0 = k.width / 2.0;
  const double v0 = k.height / 2.0;
  Joints2 out(p.rows(), 2);
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    const double z = p(j, 2);
    if (!(z > kDepthEpsilon)) {
      throw BehindCameraError("project_canonical_centered: joint " + std::to_string(j) + " has depth " +
                              std::to_string(z));
    }
    out(j, 0) = k.fx * p(j, 0) / z + u0;
    out(j, 1) = k.fy * p(j, 1) / z + v0;
  }
  return {std::move(out), Space::Image};
}

Pose3D root_relative(const Pose3D& pose, const Skeleton& skeleton) {
  const auto root_idx = static_cast<Eigen::Index>(checked_root(skeleton, pose.num_joints()));
  Joints3 out = pose.joints().rowwise() - pose.joints().row(root_idx);
  return {std::move(out), pose.frame()};
}

Canonical2D canonicalize_2d(const Pose2D& pose, const CameraIntrinsics& k, const Skeleton& skeleton) {
  require_space(pose, Space::Image, "canonicalize_2d");
  const auto root_idx = static_cast<Eigen::Index>(checked_root(skeleton, pose.num_joints()));

  const Mat3 k_inv = k.inverse_matrix();
  const Vec2 root_px = pose.joint(root_idx);
  // Written out rather than k_inv * p so a root on the principal point gives exactly (0, 0, 1).
  const Vec3 pelvis((root_px.x() - k.cx) / k.fx, (root_px.y() - k.cy) / k.fy, 1.0);
  CanonicalRotation rotation = rodrigues_align(pelvis, Vec3::UnitZ());

  const Mat3 transform = k.matrix() * rotation.matrix() * k_inv;
  Joints2 out(pose.num_joints(), 2);
  for (Eigen::Index j = 0; j < pose.num_joints(); ++j) {
    const Vec3 q = transform * Vec3(pose.joints()(j, 0), pose.joints()(j, 1), 1.0);
    if (!(std::abs(q.z()) > kDepthEpsilon)) {
      throw DegenerateHomogeneousError("canonicalize_2d: joint " + std::to_string(j) +
                                       " maps to homogeneous scale " + std::to_string(q.z()));
    }
    out(j, 0) = q.x() / q.z();
    out(j, 1) = q.y() / q.z();
  }

  // The re-projection leaves the root at the principal point; training data is centered
  // on the image center instead, so shift the whole pose there.
  const Eigen::RowVector2d root_after = out.row(root_idx);
  out = out.rowwise() - root_after;
  out.col(0).array() += k.width / 2.0;
  out.col(1).array() += k.height / 2.0;
  return {Pose2D(std::move(out), Space::Image), std::move(rotation)};
}

Pose3D back_transform(const Pose3D& prediction, const CanonicalRotation& rotation, double root_depth,
                      const Skeleton& skeleton) {
  require_frame(prediction, Frame::CanonicalCamera, "back_transform");
  Joints3 shifted = prediction.joints();
  shifted.col(2).array() += root_depth;
  Joints3 restored = shifted * rotation.matrix();  // row-wise R^T p
  return root_relative(Pose3D(std::move(restored), Frame::Camera), skeleton);
}

Vec2 residual_offset(const Vec3& root, const CameraIntrinsics& k) {
  if (!(root.z() > kDepthEpsilon)) {
    throw BehindCameraError("residual_offset: depth " + std::to_string(root.z()) + " is not in front of the camera");
  }
  return {k.fx * root.x() / root.z(), k.fy * root.y() / root.z()};
}

CanonicalRecord make_canonical_record(const Pose3D& camera_pose, const CameraIntrinsics& k,
                                      const Skeleton& skeleton) {
  Canonical3D c3 = canonicalize_3d(camera_pose, skeleton);
  Pose2D c2 = project_canonical_centered(c3.pose, k);
  return {std::move(c3.pose), std::move(c2), std::move(c3.rotation), c3.root_depth, skeleton.name};
}

}  // namespace canonpose
