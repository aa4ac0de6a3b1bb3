#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "canonpose/camera.hpp"
#include "canonpose/canonical.hpp"
#include "canonpose/skeleton.hpp"

namespace canonpose {

/// Random stream keyed by (seed, index, stream). Streams for different indices are
/// independent, so item i is identical no matter which thread generates it or in what order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const;
  Vec3 sample(CounterRng& rng) const;
};

/// Human3.6M-like camera (1000 x 1002 image, principal point off-center).
CameraIntrinsics default_intrinsics();

/// Random plausible intrinsics keyed by (seed, index): f in [600, 1800] px, size in
/// [640, 1920] x [480, 1440] px, principal point within 10% of the center.
CameraIntrinsics random_intrinsics(std::uint64_t seed, std::uint64_t index);

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_poses = 1000;
  double limb_scale = 0.45;  ///< thigh length in meters; other bones scale with it
  Box3 root_region{Vec3(-1.0, -0.5, 3.0), Vec3(1.0, 0.5, 6.0)};
  std::vector<CameraIntrinsics> intrinsics_pool{default_intrinsics()};
  double min_joint_depth = 0.1;  ///< poses with a joint closer than this are redrawn

  /// Throws InvariantError unless n_poses >= 1, the root region is a non-empty box at Z > 0.5 m,
  /// limb_scale > 0 and the intrinsics pool is non-empty and valid.
  void validate() const;
};

/// Camera-frame poses with roots uniform in the root region, bone lengths jittered by
/// +/-10% and bounded random joint rotations. Deterministic in (seed, index).
/// Requires a skeleton with rest_offsets.
std::vector<Pose3D> generate_poses(const SynthConfig& config, const Skeleton& skeleton, unsigned threads = 0);

/// Single pose `index` of the stream generate_poses draws from.
Pose3D generate_pose(const SynthConfig& config, const Skeleton& skeleton, std::uint64_t index);

/// Rigidly moves a pose so its root sits at `root`.
Pose3D place_at(const Pose3D& pose, const Vec3& root, const Skeleton& skeleton);

struct ConsistencyEntry {
  std::size_t pose_index = 0;
  double discrepancy_px = 0.0;  ///< max |coordinate difference| between the two paths
  double rotation_discrepancy = 0.0;  ///< max |entry difference| between the two R_canon
  bool flagged = false;
  std::string error;  ///< non-empty if either path threw
};

struct ConsistencyReport {
  double threshold_px = 1e-9;
  std::vector<ConsistencyEntry> entries;
  double max_discrepancy_px = 0.0;
  double mean_discrepancy_px = 0.0;
  double median_discrepancy_px = 0.0;
  double p99_discrepancy_px = 0.0;
  std::size_t flagged = 0;
};

/// Compares the 3D path (canonicalize_3d + centered projection with `k`) with the 2D path
/// (project with `k`, then canonicalize_2d with `k_2d_path`). Passing different intrinsics
/// for the 2D path is a negative control.
ConsistencyReport consistency_oracle(const std::vector<Pose3D>& poses, const CameraIntrinsics& k,
                                     const CameraIntrinsics& k_2d_path, const Skeleton& skeleton,
                                     unsigned threads = 0, double threshold_px = 1e-9);

inline ConsistencyReport consistency_oracle(const std::vector<Pose3D>& poses, const CameraIntrinsics& k,
                                            const Skeleton& skeleton, unsigned threads = 0) {
  return consistency_oracle(poses, k, k, skeleton, threads);
}

struct ManyToOneReport {
  std::vector<Vec2> conventional_roots;  ///< screen-normalized
  std::vector<Vec2> canonical_roots;     ///< screen-normalized
  double conventional_dispersion = 0.0;  ///< mean pairwise RMS joint distance, screen-normalized
  double canonical_dispersion = 0.0;
  double conventional_root_spread = 0.0;  ///< max pairwise root distance, screen-normalized
  double canonical_root_spread = 0.0;
  double residual_max_error_px = 0.0;  ///< worst deviation from the lateral-offset residual identity
};

/// Places one root-relative pose at every position and contrasts conventional with
/// canonical 2D inputs. The residual check recomputes projections by hand instead of
/// calling the camera module.
ManyToOneReport many_to_one_demo(const Pose3D& base_root_relative, const std::vector<Vec3>& positions,
                                 const CameraIntrinsics& k, const Skeleton& skeleton);

}  // namespace canonpose
