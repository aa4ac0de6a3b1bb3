#include "canonpose/stats.hpp"

#include <algorithm>
#include <cmath>

#include "canonpose/metrics.hpp"

namespace canonpose {

Eigen::VectorXd DistributionSummary::extent() const {
  if (empty()) return {};
  return max - min;
}

DistributionSummary summarize(std::vector<Eigen::VectorXd> samples, int dims) {
  DistributionSummary s;
  s.dims = dims;
  s.samples = std::move(samples);
  if (s.samples.empty()) return s;

  s.min = s.samples.front();
  s.max = s.samples.front();
  for (const auto& v : s.samples) {
    if (v.size() != dims) throw DimensionError("summarize: sample dimension mismatch");
    s.min = s.min.cwiseMin(v);
    s.max = s.max.cwiseMax(v);
  }

  s.mean.resize(dims);
  std::vector<double> column(s.samples.size());
  for (int d = 0; d < dims; ++d) {
    for (std::size_t i = 0; i < s.samples.size(); ++i) column[i] = s.samples[i](d);
    s.mean(d) = pairwise_sum(column) / static_cast<double>(column.size());

    Histogram h;
    const double lo = s.min(d);
    const double hi = s.max(d);
    const double width = hi - lo;
    h.edges.resize(kHistogramBins + 1);
    for (std::size_t b = 0; b <= kHistogramBins; ++b) {
      h.edges[b] = b == kHistogramBins ? hi : lo + width * static_cast<double>(b) / kHistogramBins;
    }
    h.counts.assign(kHistogramBins, 0);
    for (double x : column) {
      std::size_t bin = 0;
      if (width > 0.0) {
        const double pos = std::floor((x - lo) / width * static_cast<double>(kHistogramBins));
        bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(kHistogramBins - 1)));
      }
      ++h.counts[bin];
    }
    s.histograms.push_back(std::move(h));
  }
  // Mean can drift outside [min, max] by rounding when all samples are equal.
  s.mean = s.mean.cwiseMax(s.min).cwiseMin(s.max);
  return s;
}

PelvisDistributions pelvis_position_distribution(const std::vector<PoseSequence>& sequences,
                                                 const CameraIntrinsics& k, const Skeleton& skeleton) {
  const auto root = static_cast<Eigen::Index>(skeleton.root_index);
  std::vector<Eigen::VectorXd> xy;
  std::vector<Eigen::VectorXd> image;
  for (const auto& seq : sequences) {
    for (const auto& f : seq.frames) {
      if (f.pose_3d) {
        const Vec3 r = f.pose_3d->joint(root);
        xy.emplace_back(Eigen::Vector2d(r.x(), r.y()));
      }
      if (f.pose_2d) {
        image.emplace_back(f.pose_2d->joint(root));
      } else if (f.pose_3d && f.pose_3d->frame() != Frame::Global) {
        Joints3 one = f.pose_3d->joints().row(root);
        const Pose3D root_only(std::move(one), f.pose_3d->frame());
        const Pose2D p = root_only.frame() == Frame::CanonicalCamera ? project_canonical_centered(root_only, k)
                                                                    : project(root_only, k);
        image.emplace_back(p.joint(0));
      }
    }
  }
  return {summarize(std::move(xy), 2), summarize(std::move(image), 2)};
}

DistributionSummary body_orientation_distribution(const std::vector<PoseSequence>& sequences,
                                                  const Skeleton& skeleton) {
  if (!skeleton.left_hip_index || !skeleton.right_hip_index || !skeleton.torso_index) {
    throw InvariantError("body_orientation_distribution: skeleton '" + skeleton.name +
                         "' lacks hip/torso joint indices");
  }
  const auto root = static_cast<Eigen::Index>(skeleton.root_index);
  const auto lhip = static_cast<Eigen::Index>(*skeleton.left_hip_index);
  const auto rhip = static_cast<Eigen::Index>(*skeleton.right_hip_index);
  const auto torso = static_cast<Eigen::Index>(*skeleton.torso_index);

  std::vector<Eigen::VectorXd> dirs;
  std::size_t degenerate = 0;
  for (const auto& seq : sequences) {
    for (const auto& f : seq.frames) {
      if (!f.pose_3d) continue;
      const auto& p = *f.pose_3d;
      const Vec3 across = p.joint(lhip) - p.joint(rhip);
      const Vec3 up = p.joint(torso) - p.joint(root);
      const Vec3 facing = across.cross(up);
      const double n = facing.norm();
      if (!(n > 1e-9)) {
        ++degenerate;
        continue;
      }
      dirs.emplace_back(facing / n);
    }
  }
  DistributionSummary s = summarize(std::move(dirs), 3);
  s.degenerate = degenerate;
  return s;
}

DistributionSummary joint_scatter_extent(const std::vector<PoseSequence>& sequences, ScatterMode mode,
                                         const Skeleton& skeleton) {
  std::vector<Eigen::VectorXd> pts;
  for (const auto& seq : sequences) {
    for (const auto& f : seq.frames) {
      if (mode == ScatterMode::TwoD) {
        if (!f.pose_2d) continue;
        for (Eigen::Index j = 0; j < f.pose_2d->num_joints(); ++j) pts.emplace_back(f.pose_2d->joint(j));
      } else {
        if (!f.pose_3d) continue;
        const Pose3D rel = root_relative(*f.pose_3d, skeleton);
        for (Eigen::Index j = 0; j < rel.num_joints(); ++j) pts.emplace_back(rel.joint(j));
      }
    }
  }
  return summarize(std::move(pts), mode == ScatterMode::TwoD ? 2 : 3);
}

}  // namespace canonpose
