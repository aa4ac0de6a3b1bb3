#include "canonpose/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace canonpose {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvariantError("camera intrinsics: fx and fy must be positive");
  if (!(width > 0.0) || !(height > 0.0)) throw InvariantError("camera intrinsics: image size must be positive");
  if (!(cx > 0.0 && cx < width)) throw InvariantError("camera intrinsics: cx must lie in (0, width)");
  if (!(cy > 0.0 && cy < height)) throw InvariantError("camera intrinsics: cy must lie in (0, height)");
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx,  //
      0.0, fy, cy,   //
      0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 k_inv;
  k_inv << 1.0 / fx, 0.0, -cx / fx,  //
      0.0, 1.0 / fy, -cy / fy,        //
      0.0, 0.0, 1.0;
  return k_inv;
}

void CameraExtrinsics::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvariantError("camera extrinsics: non-finite entries");
  }
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) throw InvariantError("camera extrinsics: R is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) throw InvariantError("camera extrinsics: det(R) != +1");
}

Pose3D world_to_camera(const Pose3D& pose, const CameraExtrinsics& ext) {
  require_frame(pose, Frame::Global, "world_to_camera");
  Joints3 out(pose.num_joints(), 3);
  for (Eigen::Index j = 0; j < pose.num_joints(); ++j) {
    out.row(j) = (ext.rotation * pose.joint(j) + ext.translation).transpose();
  }
  return {std::move(out), Frame::Camera};
}

Pose2D project(const Pose3D& pose, const CameraIntrinsics& k) {
  require_frame(pose, Frame::Camera, "project");
  const auto& p = pose.joints();
  Joints2 out(p.rows(), 2);
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    const double z = p(j, 2);
    if (!(z > kDepthEpsilon)) {
      throw BehindCameraError("project: joint " + std::to_string(j) + " has depth " + std::to_string(z));
    }
    out(j, 0) = k.fx * p(j, 0) / z + k.cx;
    out(j, 1) = k.fy * p(j, 1) / z + k.cy;
  }
  return {std::move(out), Space::Image};
}

Pose2D to_normalized_plane(const Pose2D& pose, const CameraIntrinsics& k) {
  require_space(pose, Space::Image, "to_normalized_plane");
  Joints2 out = pose.joints();
  out.col(0) = (out.col(0).array() - k.cx) / k.fx;
  out.col(1) = (out.col(1).array() - k.cy) / k.fy;
  return {std::move(out), Space::NormalizedPlane};
}

Pose2D from_normalized_plane(const Pose2D& pose, const CameraIntrinsics& k) {
  require_space(pose, Space::NormalizedPlane, "from_normalized_plane");
  Joints2 out = pose.joints();
  out.col(0) = out.col(0).array() * k.fx + k.cx;
  out.col(1) = out.col(1).array() * k.fy + k.cy;
  return {std::move(out), Space::Image};
}

Pose2D screen_normalize(const Pose2D& pose, const CameraIntrinsics& k) {
  require_space(pose, Space::Image, "screen_normalize");
  Joints2 out = pose.joints();
  out.col(0) = (2.0 * out.col(0).array() - k.width) / k.width;
  out.col(1) = (2.0 * out.col(1).array() - k.height) / k.width;
  return {std::move(out), Space::ScreenNormalized};
}

namespace {

double require_number(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw ParseError(std::string("camera: missing numeric key '") + key + "'", 0);
  }
  return obj.at(key).get<double>();
}

}  // namespace

Camera parse_camera_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("camera: ") + e.what(), 0);
  }
  if (!doc.is_object()) throw ParseError("camera: top-level value must be an object", 0);

  Camera cam;
  cam.intrinsics = {require_number(doc, "fx"),    require_number(doc, "fy"),
                    require_number(doc, "cx"),    require_number(doc, "cy"),
                    require_number(doc, "width"), require_number(doc, "height")};
  cam.intrinsics.validate();

  const bool has_r = doc.contains("R") && !doc.at("R").is_null();
  const bool has_t = doc.contains("t") && !doc.at("t").is_null();
  if (has_r || has_t) {
    CameraExtrinsics ext;
    if (has_r) {
      const auto& r = doc.at("R");
      if (!r.is_array() || r.size() != 9) throw ParseError("camera: 'R' must hold 9 numbers (row-major)", 0);
      for (int i = 0; i < 9; ++i) {
        if (!r.at(i).is_number()) throw ParseError("camera: 'R' entries must be numbers", 0);
        ext.rotation(i / 3, i % 3) = r.at(i).get<double>();
      }
    }
    if (has_t) {
      const auto& t = doc.at("t");
      if (!t.is_array() || t.size() != 3) throw ParseError("camera: 't' must hold 3 numbers", 0);
      for (int i = 0; i < 3; ++i) {
        if (!t.at(i).is_number()) throw ParseError("camera: 't' entries must be numbers", 0);
        ext.translation(i) = t.at(i).get<double>();
      }
    }
    ext.validate();
    cam.extrinsics = ext;
  }
  return cam;
}

Camera load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open camera file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_camera_json(buf.str());
}

}  // namespace canonpose
