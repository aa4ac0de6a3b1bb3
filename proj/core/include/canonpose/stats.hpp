#pragma once

#include <vector>

#include "canonpose/camera.hpp"
#include "canonpose/dataset.hpp"
#include "canonpose/skeleton.hpp"

namespace canonpose {

inline constexpr std::size_t kHistogramBins = 64;

/// Uniform histogram over [edges.front(), edges.back()]; the last bin is closed.
/// When every sample is equal all counts land in bin 0 and the edges collapse to one value.
struct Histogram {
  std::vector<double> edges;        ///< kHistogramBins + 1 entries
  std::vector<std::size_t> counts;  ///< kHistogramBins entries
};

/// Bounds, mean and per-axis histograms of a set of 2- or 3-vectors.
struct DistributionSummary {
  int dims = 0;
  std::vector<Eigen::VectorXd> samples;
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  Eigen::VectorXd mean;
  std::vector<Histogram> histograms;  ///< one per axis
  std::size_t degenerate = 0;         ///< inputs skipped as undefined (orientation only)

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  /// max - min per axis; empty vector for an empty summary.
  Eigen::VectorXd extent() const;
};

DistributionSummary summarize(std::vector<Eigen::VectorXd> samples, int dims);

struct PelvisDistributions {
  DistributionSummary xy;     ///< root (X, Y) in meters from 3D poses
  DistributionSummary image;  ///< root (u, v) in pixels
};

/// Root positions per frame. Image-plane roots come from the 2D pose when present,
/// otherwise from projecting the 3D root with `k` (centered projection for canonical frames).
PelvisDistributions pelvis_position_distribution(const std::vector<PoseSequence>& sequences,
                                                 const CameraIntrinsics& k, const Skeleton& skeleton);

/// Unit body-facing direction (left_hip - right_hip) x (torso - pelvis) per 3D frame.
/// Frames whose cross product is shorter than 1e-9 are counted in `degenerate`.
DistributionSummary body_orientation_distribution(const std::vector<PoseSequence>& sequences,
                                                  const Skeleton& skeleton);

enum class ScatterMode { TwoD, ThreeDRootRelative };

/// Every joint of every frame pooled into one cloud.
DistributionSummary joint_scatter_extent(const std::vector<PoseSequence>& sequences, ScatterMode mode,
                                         const Skeleton& skeleton);

}  // namespace canonpose
