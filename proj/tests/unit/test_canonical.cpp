#include <doctest.h>

#include "canonpose/canonical.hpp"
#include "canonpose/synth.hpp"
#include "oracles.hpp"

using namespace canonpose;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return max_abs(r.transpose() * r - Mat3::Identity()) < tol && std::abs(r.determinant() - 1.0) < tol;
}

Eigen::MatrixXd pairwise_distances(const Joints3& p) {
  Eigen::MatrixXd d(p.rows(), p.rows());
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    for (Eigen::Index b = 0; b < p.rows(); ++b) d(a, b) = (p.row(a) - p.row(b)).norm();
  }
  return d;
}

const Skeleton& chain5() {
  static const Skeleton s = Skeleton::chain(5);
  return s;
}

}  // namespace

TEST_SUITE("canonical") {
  TEST_CASE("rodrigues: hand cases") {
    CHECK(rodrigues_align(Vec3::UnitZ(), Vec3::UnitZ()).matrix() == Mat3::Identity());

    // 90 degrees about -y: x -> z, z -> -x.
    const Mat3 r = rodrigues_align(Vec3::UnitX(), Vec3::UnitZ()).matrix();
    Mat3 expected;
    expected << 0, 0, -1, 0, 1, 0, 1, 0, 0;
    CHECK(max_abs(r - expected) < 1e-15);
    CHECK(max_abs(r * Vec3::UnitX() - Vec3::UnitZ()) < 1e-15);

    // Scale of the inputs does not matter.
    CHECK(max_abs(rodrigues_align(Vec3(7, 0, 0), Vec3(0, 0, 0.1)).matrix() - expected) < 1e-15);
  }

  TEST_CASE("rodrigues: errors") {
    CHECK_THROWS_AS(rodrigues_align(Vec3::Zero(), Vec3::UnitZ()), DegenerateVectorError);
    CHECK_THROWS_AS(rodrigues_align(Vec3(1e-10, 0, 0), Vec3::UnitZ()), DegenerateVectorError);
    CHECK_THROWS_AS(rodrigues_align(Vec3::UnitZ(), Vec3::Zero()), DegenerateVectorError);
    CHECK_THROWS_AS(rodrigues_align(-Vec3::UnitZ(), Vec3::UnitZ()), AntiparallelError);
    CHECK_THROWS_AS(rodrigues_align(Vec3(1e-5, 0, -1), Vec3::UnitZ()), AntiparallelError);
    // Just outside the antiparallel band.
    CHECK_NOTHROW(rodrigues_align(Vec3(1e-3, 0, -1), Vec3::UnitZ()));
  }

  TEST_CASE("rodrigues: random pairs against axis-angle construction") {
    oracle::Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
      const Vec3 a = oracle::unit_vector(rng) * oracle::uniform(rng, 0.01, 10.0);
      const Vec3 b = oracle::unit_vector(rng) * oracle::uniform(rng, 0.01, 10.0);
      if (a.normalized().dot(b.normalized()) < -1.0 + 1e-6) continue;
      const CanonicalRotation cr = rodrigues_align(a, b);
      const Mat3& r = cr.matrix();
      REQUIRE(is_rotation(r));
      REQUIRE(max_abs(r * a.normalized() - b.normalized()) < 1e-9);
      const Vec3 axis = a.cross(b);
      if (axis.norm() > 1e-6) {
        const double angle = std::atan2(axis.norm(), a.dot(b));
        const Mat3 ref = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
        REQUIRE(max_abs(r - ref) < 1e-9);
      }
    }
  }

  TEST_CASE("canonical rotation helpers") {
    const CanonicalRotation r = rodrigues_align(Vec3(3, 0, 4), Vec3::UnitZ());
    CHECK(max_abs(r.inverse() * r.matrix() - Mat3::Identity()) < 1e-15);
    const CanonicalRotation back = CanonicalRotation::from_matrix(r.matrix());
    CHECK(max_abs(back.source_vector() - Vec3(0.6, 0, 0.8)) < 1e-15);
    CHECK(CanonicalRotation::identity().matrix() == Mat3::Identity());
  }

  TEST_CASE("canonicalize_3d: hand cases") {
    Joints3 on_axis(2, 3);
    on_axis << 0, 0, 3, 0.2, -0.1, 3.1;
    const Canonical3D c = canonicalize_3d(Pose3D(on_axis, Frame::Camera), Skeleton::chain(2));
    CHECK(c.rotation.matrix() == Mat3::Identity());
    CHECK(c.pose.joints() == on_axis);
    CHECK(c.pose.frame() == Frame::CanonicalCamera);
    CHECK(c.root_depth == 3.0);

    Joints3 single(1, 3);
    single << 3, 0, 4;
    const Canonical3D s = canonicalize_3d(Pose3D(single, Frame::Camera), Skeleton::chain(1));
    CHECK(s.pose.joint(0) == Vec3(0, 0, 5));
    CHECK(s.root_depth == 5.0);
    // Rotation lies in the x-z plane: y is untouched.
    CHECK(max_abs(s.rotation.matrix() * Vec3::UnitY() - Vec3::UnitY()) < 1e-15);
  }

  TEST_CASE("canonicalize_3d: errors") {
    Joints3 origin(1, 3);
    origin << 0, 0, 0;
    CHECK_THROWS_AS(canonicalize_3d(Pose3D(origin, Frame::Camera), Skeleton::chain(1)), BehindCameraError);
    Joints3 behind(1, 3);
    behind << 0.5, 0, -2;
    CHECK_THROWS_AS(canonicalize_3d(Pose3D(behind, Frame::Camera), Skeleton::chain(1)), BehindCameraError);
    Joints3 ok(1, 3);
    ok << 0.5, 0, 2;
    CHECK_THROWS_AS(canonicalize_3d(Pose3D(ok, Frame::Global), Skeleton::chain(1)), InvalidFrameError);
    CHECK_THROWS_AS(canonicalize_3d(Pose3D(ok, Frame::Camera), Skeleton::chain(3)), DimensionError);
  }

  TEST_CASE("canonicalize_3d: rigid, root on axis, norm preserved") {
    oracle::Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
      const Joints3 p = oracle::pose_around(rng, oracle::root_in_view(rng), 5);
      const Canonical3D c = canonicalize_3d(Pose3D(p, Frame::Camera), chain5());
      const Vec3 root = p.row(0).transpose();
      REQUIRE(max_abs(c.pose.joint(0) - Vec3(0, 0, root.norm())) < 1e-9);
      REQUIRE(c.root_depth == doctest::Approx(root.norm()).epsilon(1e-15));
      REQUIRE(max_abs(pairwise_distances(c.pose.joints()) - pairwise_distances(p)) < 1e-9);
      REQUIRE(is_rotation(c.rotation.matrix()));
      REQUIRE(max_abs(c.rotation.matrix() * root.normalized() - Vec3::UnitZ()) < 1e-9);
      // Inverse rotation recovers the input.
      REQUIRE(max_abs(c.pose.joints() * c.rotation.matrix() - p) < 1e-9);
    }
  }

  TEST_CASE("canonicalize_3d: rotating the scene about the camera center only rolls the result about z") {
    oracle::Rng rng(3);
    int done = 0;
    while (done < 500) {
      const Joints3 p1 = oracle::pose_around(rng, oracle::root_in_view(rng), 5, 0.5);
      const Mat3 q = oracle::rotation(rng);
      const Joints3 p2 = p1 * q.transpose();
      if (p2.col(2).minCoeff() <= 0.1) continue;
      ++done;
      const Canonical3D c1 = canonicalize_3d(Pose3D(p1, Frame::Camera), chain5());
      const Canonical3D c2 = canonicalize_3d(Pose3D(p2, Frame::Camera), chain5());
      REQUIRE(c1.root_depth == doctest::Approx(c2.root_depth).epsilon(1e-14));
      // Best rotation taking c1 onto c2 about the camera center; it has to fix the z axis.
      const Mat3 h = c1.pose.joints().transpose() * c2.pose.joints();
      Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Mat3 r = svd.matrixV() * svd.matrixU().transpose();
      if (r.determinant() < 0) {
        Mat3 v = svd.matrixV();
        v.col(2) *= -1;
        r = v * svd.matrixU().transpose();
      }
      REQUIRE(max_abs(c1.pose.joints() * r.transpose() - c2.pose.joints()) < 1e-8);
      REQUIRE(max_abs(r * Vec3::UnitZ() - Vec3::UnitZ()) < 1e-8);
    }
  }

  TEST_CASE("project_canonical_centered") {
    const CameraIntrinsics k{1000.0, 1000.0, 480.0, 390.0, 1000.0, 800.0};
    Joints3 p(2, 3);
    p << 0, 0, 4, 1, 0, 2;
    const Pose2D c = project_canonical_centered(Pose3D(p, Frame::CanonicalCamera), k);
    CHECK(c.joint(0) == Vec2(500, 400));
    CHECK(c.joint(1).x() == 1000.0);
    const Joints2 ref = oracle::project_all(p, k.fx, k.fy, k.width / 2, k.height / 2);
    CHECK(max_abs(c.joints() - ref) == 0.0);
    CHECK_THROWS_AS(project_canonical_centered(Pose3D(p, Frame::Camera), k), InvalidFrameError);
    Joints3 behind(1, 3);
    behind << 0, 0, -1;
    CHECK_THROWS_AS(project_canonical_centered(Pose3D(behind, Frame::CanonicalCamera), k), BehindCameraError);
  }

  TEST_CASE("root_relative") {
    oracle::Rng rng(4);
    const Joints3 p = oracle::pose_around(rng, oracle::root_in_view(rng), 5);
    const Pose3D r = root_relative(Pose3D(p, Frame::Camera), chain5());
    CHECK(r.joint(0) == Vec3::Zero());
    CHECK(r.frame() == Frame::Camera);
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(r.joint(j) == Vec3(p.row(j) - p.row(0)));
    CHECK(root_relative(r, chain5()).joints() == r.joints());

    Joints3 canon(2, 3);
    canon << 0, 0, 5, 0.1, 0.2, 5.3;
    const Pose3D rc = root_relative(Pose3D(canon, Frame::CanonicalCamera), Skeleton::chain(2));
    CHECK(rc.joint(1).x() == 0.1);
    CHECK(rc.joint(1).y() == 0.2);
    CHECK(rc.joint(1).z() == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("canonicalize_2d: root at principal point is a pure translation") {
    const CameraIntrinsics k{1100.0, 1090.0, 512.0, 515.0, 1000.0, 1002.0};
    Joints2 p(3, 2);
    p << 512, 515, 600, 700, 400, 300;
    const Canonical2D c = canonicalize_2d(Pose2D(p, Space::Image), k, Skeleton::chain(3));
    CHECK(c.rotation.matrix() == Mat3::Identity());
    Joints2 expected = p;
    expected.rowwise() += Eigen::RowVector2d(500 - 512, 501 - 515);
    CHECK(max_abs(c.pose.joints() - expected) < 1e-12);
    CHECK(c.pose.joint(0) == Vec2(500, 501));
  }

  TEST_CASE("canonicalize_2d: matches the 3D path") {
    oracle::Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
      const CameraIntrinsics k = oracle::intrinsics(rng);
      const Joints3 p = oracle::pose_around(rng, oracle::root_in_view(rng), 5);
      const Pose3D pose(p, Frame::Camera);
      const Canonical3D c3 = canonicalize_3d(pose, chain5());
      const Pose2D via3 = project_canonical_centered(c3.pose, k);
      const Canonical2D via2 = canonicalize_2d(project(pose, k), k, chain5());
      REQUIRE(max_abs(via3.joints() - via2.pose.joints()) < 1e-9);
      REQUIRE(max_abs(c3.rotation.matrix() - via2.rotation.matrix()) < 1e-9);
      REQUIRE(via2.pose.joint(0) == Vec2(k.width / 2, k.height / 2));
    }
  }

  TEST_CASE("canonicalize_2d: errors") {
    const CameraIntrinsics k{1000.0, 1000.0, 500.0, 400.0, 1000.0, 800.0};
    Joints2 p(2, 2);
    p << 500, 400, 600, 400;
    CHECK_THROWS_AS(canonicalize_2d(Pose2D(p, Space::NormalizedPlane), k, Skeleton::chain(2)), InvalidFrameError);
    Joints2 w(2, 2);
    // Root at 45 degrees, second joint 90 degrees away from it: lands at w = 0.
    w << 1500, 400, -500, 400;
    CHECK_THROWS_AS(canonicalize_2d(Pose2D(w, Space::Image), k, Skeleton::chain(2)), DegenerateHomogeneousError);
  }

  TEST_CASE("back_transform") {
    Joints3 pred(2, 3);
    pred << 0, 0, 0, 0.1, 0.2, 0.3;
    const Pose3D id = back_transform(Pose3D(pred, Frame::CanonicalCamera), CanonicalRotation::identity(), 4.0,
                                     Skeleton::chain(2));
    CHECK(max_abs(id.joints() - pred) < 1e-15);
    CHECK(id.frame() == Frame::Camera);

    oracle::Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
      const Joints3 p = oracle::pose_around(rng, oracle::root_in_view(rng), 5);
      const Pose3D pose(p, Frame::Camera);
      const Canonical3D c = canonicalize_3d(pose, chain5());
      const Pose3D rel = root_relative(c.pose, chain5());
      const Pose3D back = back_transform(rel, c.rotation, c.root_depth, chain5());
      REQUIRE(max_abs(back.joints() - root_relative(pose, chain5()).joints()) < 1e-9);
      REQUIRE(max_abs(pairwise_distances(back.joints()) - pairwise_distances(rel.joints())) < 1e-9);
    }
  }

  TEST_CASE("residual_offset") {
    const CameraIntrinsics k{1000.0, 1000.0, 500.0, 400.0, 1000.0, 800.0};
    CHECK(residual_offset(Vec3(0, 0, 3), k) == Vec2(0, 0));
    CHECK(residual_offset(Vec3(1, 2, 2), k) == Vec2(500, 1000));
    CHECK_THROWS_AS(residual_offset(Vec3(1, 2, 0), k), BehindCameraError);
  }

  TEST_CASE("canonical record invariants") {
    oracle::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
      const CameraIntrinsics k = oracle::intrinsics(rng);
      const Joints3 p = oracle::pose_around(rng, oracle::root_in_view(rng), 5);
      const CanonicalRecord rec = make_canonical_record(Pose3D(p, Frame::Camera), k, chain5());
      REQUIRE(max_abs(rec.canonical_3d.joint(0) - Vec3(0, 0, rec.root_depth)) < 1e-9);
      REQUIRE(rec.canonical_2d.joint(0) == Vec2(k.width / 2, k.height / 2));
      const Joints2 ref =
          oracle::project_all(rec.canonical_3d.joints(), k.fx, k.fy, k.width / 2, k.height / 2);
      REQUIRE(max_abs(rec.canonical_2d.joints() - ref) < 1e-9);
      REQUIRE(rec.skeleton_id == "chain5");
    }
  }
}
