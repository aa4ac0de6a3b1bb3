#include "canonpose/metrics.hpp"

#include <Eigen/SVD>
#include <string>

namespace canonpose {

namespace {

void require_same_shape(const Pose3D& a, const Pose3D& b, std::string_view op) {
  if (a.num_joints() != b.num_joints()) {
    throw DimensionError(std::string(op) + ": joint counts differ (" + std::to_string(a.num_joints()) + " vs " +
                         std::to_string(b.num_joints()) + ")");
  }
}

void require_same_length(std::size_t pred, std::size_t gt, std::string_view op) {
  if (pred != gt) {
    throw DimensionError(std::string(op) + ": frame counts differ (" + std::to_string(pred) + " vs " +
                         std::to_string(gt) + ")");
  }
  if (pred == 0) throw DimensionError(std::string(op) + ": no frames");
}

// Rank < 2 means every joint lies on one line through the centroid.
bool is_degenerate(const Eigen::Matrix<double, Eigen::Dynamic, 3>& centered) {
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 3>> svd(centered);
  const auto& sv = svd.singularValues();
  return !(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0);
}

}  // namespace

Joints3 SimilarityTransform::apply(const Joints3& points) const {
  Joints3 out = scale * (points * rotation.transpose());
  out.rowwise() += translation.transpose();
  return out;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean_joint_error(const Pose3D& pred, const Pose3D& gt) {
  require_same_shape(pred, gt, "mean_joint_error");
  const Eigen::VectorXd dist = (pred.joints() - gt.joints()).rowwise().norm();
  return pairwise_sum(std::span<const double>(dist.data(), static_cast<std::size_t>(dist.size()))) /
         static_cast<double>(dist.size());
}

double mpjpe(std::span<const Pose3D> pred, std::span<const Pose3D> gt) {
  require_same_length(pred.size(), gt.size(), "mpjpe");
  std::vector<double> per_frame(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) per_frame[t] = mean_joint_error(pred[t], gt[t]);
  // Equal J in every frame, so the mean of frame means is the 1/(TJ) double sum.
  return pairwise_sum(per_frame) / static_cast<double>(per_frame.size());
}

ProcrustesResult procrustes_align(const Pose3D& pred, const Pose3D& gt) {
  require_same_shape(pred, gt, "procrustes_align");
  if (pred.num_joints() < 3) throw DegenerateShapeError("procrustes_align: needs at least 3 joints");

  const Vec3 mu_pred = pred.joints().colwise().mean().transpose();
  const Vec3 mu_gt = gt.joints().colwise().mean().transpose();
  const Eigen::Matrix<double, Eigen::Dynamic, 3> x = pred.joints().rowwise() - mu_pred.transpose();
  const Eigen::Matrix<double, Eigen::Dynamic, 3> y = gt.joints().rowwise() - mu_gt.transpose();
  if (is_degenerate(x) || is_degenerate(y)) {
    throw DegenerateShapeError("procrustes_align: joints are coincident or collinear");
  }

  // Cross-covariance gt^T pred; R = U D V^T with D fixing det(R) = +1.
  const Mat3 cov = y.transpose() * x;
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d.z() = -1.0;

  SimilarityTransform tf;
  tf.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  tf.scale = svd.singularValues().dot(d) / x.squaredNorm();
  if (!(tf.scale > 0.0)) throw DegenerateShapeError("procrustes_align: non-positive optimal scale");
  tf.translation = mu_gt - tf.scale * tf.rotation * mu_pred;

  return {Pose3D(tf.apply(pred.joints()), gt.frame()), tf};
}

double p_mpjpe(std::span<const Pose3D> pred, std::span<const Pose3D> gt) {
  require_same_length(pred.size(), gt.size(), "p_mpjpe");
  std::vector<double> per_frame(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    per_frame[t] = mean_joint_error(procrustes_align(pred[t], gt[t]).aligned, gt[t]);
  }
  return pairwise_sum(per_frame) / static_cast<double>(per_frame.size());
}

}  // namespace canonpose
