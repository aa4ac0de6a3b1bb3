#include "canonpose/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "canonpose/metrics.hpp"
#include "canonpose/parallel.hpp"

namespace canonpose {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
    : engine_(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL) ^ mix64(stream + 0x85ebca6b0d3c4f2dULL))) {}

double CounterRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Box3::contains(const Vec3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

Vec3 Box3::sample(CounterRng& rng) const {
  Vec3 p;
  for (int i = 0; i < 3; ++i) p(i) = rng.uniform(min(i), max(i));
  return p;
}

CameraIntrinsics default_intrinsics() {
  return {1145.04940459, 1143.78109572, 512.54150496, 515.45148698, 1000.0, 1002.0};
}

CameraIntrinsics random_intrinsics(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index, /*stream=*/7);
  CameraIntrinsics k;
  k.width = std::round(rng.uniform(640.0, 1920.0));
  k.height = std::round(rng.uniform(480.0, 1440.0));
  k.fx = rng.uniform(600.0, 1800.0);
  k.fy = k.fx * rng.uniform(0.98, 1.02);
  k.cx = k.width / 2.0 + rng.uniform(-0.1, 0.1) * k.width;
  k.cy = k.height / 2.0 + rng.uniform(-0.1, 0.1) * k.height;
  return k;
}

void SynthConfig::validate() const {
  if (n_poses < 1) throw InvariantError("synth: n_poses must be >= 1");
  if (!(limb_scale > 0.0)) throw InvariantError("synth: limb_scale must be positive");
  if (!((root_region.max.array() >= root_region.min.array()).all())) {
    throw InvariantError("synth: root_region max must be >= min on every axis");
  }
  if (!(root_region.min.z() > 0.5)) throw InvariantError("synth: root_region must lie at Z > 0.5 m");
  if (intrinsics_pool.empty()) throw InvariantError("synth: intrinsics_pool is empty");
  for (const auto& k : intrinsics_pool) k.validate();
}

namespace {

constexpr double kTemplateThigh = 0.45;
constexpr int kMaxRedraws = 1000;

Mat3 euler(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(ry, Vec3::UnitY()) * Eigen::AngleAxisd(rx, Vec3::UnitX()) *
          Eigen::AngleAxisd(rz, Vec3::UnitZ()))
      .toRotationMatrix();
}

Joints3 draw_body(const SynthConfig& config, const Skeleton& skeleton,
                  const std::vector<std::pair<std::size_t, std::size_t>>& order, const std::vector<int>& fanout,
                  CounterRng& rng) {
  const std::size_t j_count = skeleton.num_joints();
  const double scale = config.limb_scale / kTemplateThigh;
  std::vector<Mat3> orient(j_count, Mat3::Identity());
  Joints3 joints = Joints3::Zero(static_cast<Eigen::Index>(j_count), 3);

  // Whole-body heading: any yaw about the vertical axis, mild pitch and roll.
  orient[skeleton.root_index] =
      euler(rng.uniform(-0.25, 0.25), rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-0.25, 0.25));

  for (const auto& [parent, child] : order) {
    // Bones leaving a branch point (hips, shoulders) bend less than limb segments.
    const double bound = fanout[parent] > 1 ? 0.35 : 0.8;
    const Mat3 local = euler(rng.uniform(-bound, bound), rng.uniform(-bound, bound), rng.uniform(-bound, bound));
    orient[child] = orient[parent] * local;
    const double jitter = rng.uniform(0.9, 1.1);
    const Vec3 bone = orient[child] * (skeleton.rest_offsets[child] * scale * jitter);
    joints.row(static_cast<Eigen::Index>(child)) =
        joints.row(static_cast<Eigen::Index>(parent)) + bone.transpose();
  }
  return joints;
}

}  // namespace

Pose3D generate_pose(const SynthConfig& config, const Skeleton& skeleton, std::uint64_t index) {
  if (skeleton.rest_offsets.size() != skeleton.num_joints()) {
    throw InvariantError("synth: skeleton '" + skeleton.name + "' has no rest template");
  }
  const auto order = skeleton.topological_edges();
  std::vector<int> fanout(skeleton.num_joints(), 0);
  for (const auto& e : order) ++fanout[e.first];

  CounterRng rng(config.seed, index);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Joints3 body = draw_body(config, skeleton, order, fanout, rng);
    const Vec3 root = config.root_region.sample(rng);
    body.rowwise() += root.transpose();
    if ((body.col(2).array() > config.min_joint_depth).all()) return {std::move(body), Frame::Camera};
  }
  throw InvariantError("synth: could not place a pose in front of min_joint_depth; root_region too close");
}

std::vector<Pose3D> generate_poses(const SynthConfig& config, const Skeleton& skeleton, unsigned threads) {
  config.validate();
  skeleton.validate();
  std::vector<std::optional<Pose3D>> slots(config.n_poses);
  parallel_for(config.n_poses, threads, [&](std::size_t i) { slots[i] = generate_pose(config, skeleton, i); });
  std::vector<Pose3D> poses;
  poses.reserve(slots.size());
  for (auto& s : slots) poses.push_back(std::move(*s));
  return poses;
}

Pose3D place_at(const Pose3D& pose, const Vec3& root, const Skeleton& skeleton) {
  Joints3 moved = root_relative(pose, skeleton).joints();
  moved.rowwise() += root.transpose();
  return {std::move(moved), pose.frame()};
}

ConsistencyReport consistency_oracle(const std::vector<Pose3D>& poses, const CameraIntrinsics& k,
                                     const CameraIntrinsics& k_2d_path, const Skeleton& skeleton, unsigned threads,
                                     double threshold_px) {
  ConsistencyReport report;
  report.threshold_px = threshold_px;
  report.entries.resize(poses.size());
  parallel_for(poses.size(), threads, [&](std::size_t i) {
    ConsistencyEntry& e = report.entries[i];
    e.pose_index = i;
    try {
      const Canonical3D c3 = canonicalize_3d(poses[i], skeleton);
      const Pose2D via_3d = project_canonical_centered(c3.pose, k);
      const Canonical2D via_2d = canonicalize_2d(project(poses[i], k), k_2d_path, skeleton);
      e.discrepancy_px = (via_3d.joints() - via_2d.pose.joints()).cwiseAbs().maxCoeff();
      e.rotation_discrepancy = (c3.rotation.matrix() - via_2d.rotation.matrix()).cwiseAbs().maxCoeff();
    } catch (const Error& err) {
      e.error = err.what();
      e.discrepancy_px = std::numeric_limits<double>::infinity();
    }
    e.flagged = !(e.discrepancy_px < threshold_px);
  });
  if (poses.empty()) return report;

  std::vector<double> d;
  d.reserve(report.entries.size());
  for (const auto& e : report.entries) {
    d.push_back(e.discrepancy_px);
    if (e.flagged) ++report.flagged;
  }
  report.max_discrepancy_px = *std::max_element(d.begin(), d.end());
  report.mean_discrepancy_px = pairwise_sum(d) / static_cast<double>(d.size());
  std::sort(d.begin(), d.end());
  const auto at = [&](double q) { return d[static_cast<std::size_t>(std::floor(q * static_cast<double>(d.size() - 1)))]; };
  report.median_discrepancy_px = at(0.5);
  report.p99_discrepancy_px = at(0.99);
  return report;
}

namespace {

double mean_pairwise_rms(const std::vector<Joints2>& poses) {
  if (poses.size() < 2) return 0.0;
  std::vector<double> d;
  for (std::size_t a = 0; a < poses.size(); ++a) {
    for (std::size_t b = a + 1; b < poses.size(); ++b) {
      d.push_back(std::sqrt((poses[a] - poses[b]).rowwise().squaredNorm().mean()));
    }
  }
  return pairwise_sum(d) / static_cast<double>(d.size());
}

double max_pairwise_distance(const std::vector<Vec2>& pts) {
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, (pts[a] - pts[b]).norm());
  }
  return best;
}

}  // namespace

ManyToOneReport many_to_one_demo(const Pose3D& base_root_relative, const std::vector<Vec3>& positions,
                                 const CameraIntrinsics& k, const Skeleton& skeleton) {
  require_frame(base_root_relative, Frame::Camera, "many_to_one_demo");
  const Pose3D base = root_relative(base_root_relative, skeleton);
  const auto root = static_cast<Eigen::Index>(skeleton.root_index);

  ManyToOneReport report;
  std::vector<Joints2> conventional;
  std::vector<Joints2> canonical;
  for (const Vec3& pos : positions) {
    if (!(pos.z() > kDepthEpsilon)) throw BehindCameraError("many_to_one_demo: position behind the camera");
    const Pose3D placed = place_at(base, pos, skeleton);
    const Pose2D conv = screen_normalize(project(placed, k), k);
    const Pose2D canon = screen_normalize(project_canonical_centered(canonicalize_3d(placed, skeleton).pose, k), k);
    report.conventional_roots.push_back(conv.joint(root));
    report.canonical_roots.push_back(canon.joint(root));
    conventional.push_back(conv.joints());
    canonical.push_back(canon.joints());

    // Same pose moved laterally at unchanged depths: every joint shifts by (fx X/Z_j, fy Y/Z_j).
    for (Eigen::Index j = 0; j < base.num_joints(); ++j) {
      const Vec3 on_axis = base.joint(j) + Vec3(0.0, 0.0, pos.z());
      const Vec3 off_axis = base.joint(j) + pos;
      const double z = on_axis.z();
      const Vec2 p1(k.fx * on_axis.x() / z + k.cx, k.fy * on_axis.y() / z + k.cy);
      const Vec2 p2(k.fx * off_axis.x() / z + k.cx, k.fy * off_axis.y() / z + k.cy);
      const Vec2 expected = residual_offset(Vec3(pos.x(), pos.y(), z), k);
      report.residual_max_error_px =
          std::max(report.residual_max_error_px, ((p2 - p1) - expected).cwiseAbs().maxCoeff());
    }
  }
  report.conventional_dispersion = mean_pairwise_rms(conventional);
  report.canonical_dispersion = mean_pairwise_rms(canonical);
  report.conventional_root_spread = max_pairwise_distance(report.conventional_roots);
  report.canonical_root_spread = max_pairwise_distance(report.canonical_roots);
  return report;
}

}  // namespace canonpose
