#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "canonpose/camera.hpp"
#include "canonpose/synth.hpp"

namespace canonpose {

enum class MappingKind { Conventional, Canonical };

std::string_view to_string(MappingKind kind);

/// Affine map from a flattened screen-normalized 2D pose to a flattened root-relative 3D pose.
///
/// Inputs are standardized with `feature_mean` / `feature_scale` before the weights apply;
/// the last row of `weights` is the bias.
struct LinearLifter {
  Eigen::MatrixXd weights;           ///< (2J + 1) x 3J
  Eigen::RowVectorXd feature_mean;   ///< 2J
  Eigen::RowVectorXd feature_scale;  ///< 2J
  double ridge_lambda = 0.0;
  MappingKind kind = MappingKind::Conventional;

  Eigen::Index num_joints() const noexcept { return weights.cols() / 3; }
  /// Weights acting on raw (unstandardized) inputs, bias in the last row.
  Eigen::MatrixXd effective_weights() const;
  /// Lifter with the given raw-space weights and no standardization.
  static LinearLifter from_weights(Eigen::MatrixXd raw_weights, MappingKind kind);
};

struct TrainingPair {
  Pose2D input;   ///< screen-normalized
  Pose3D target;  ///< root-relative
};

struct FitOptions {
  double ridge_lambda = 1e-4;
  bool standardize = true;
  MappingKind kind = MappingKind::Conventional;
};

/// Solves (A^T A + lambda I) W = A^T Y with A the (standardized) inputs plus a bias column.
/// Needs at least 2J + 1 pairs. Throws SingularMatrixError if the system cannot be solved.
LinearLifter fit(std::span<const TrainingPair> pairs, const FitOptions& options);

/// Root-relative prediction; canonical lifters yield canonical-camera poses.
Pose3D predict(const LinearLifter& lifter, const Pose2D& input);

struct LiftingStudyConfig {
  Box3 train_root_region{Vec3(-0.2, -0.2, 3.0), Vec3(0.2, 0.2, 5.0)};
  Box3 test_root_region{Vec3(0.8, 0.3, 3.0), Vec3(1.2, 0.6, 5.0)};
  double noise_sigma = 2.0;  ///< pixels, added before screen normalization
  std::size_t n_train = 20000;
  std::size_t n_test = 5000;
  std::uint64_t seed = 0;
  double ridge_lambda = 1e-4;
  double limb_scale = 0.45;
  CameraIntrinsics intrinsics = default_intrinsics();

  /// Regions at Z > 0.5 m, counts >= 1, noise >= 0, lambda >= 0, and test x-y range
  /// disjoint from the train x-y range.
  void validate() const;
};

struct ArmMetrics {
  double mpjpe_mm = 0.0;
  double p_mpjpe_mm = 0.0;
};

struct ArmComparison {
  ArmMetrics conventional;
  ArmMetrics canonical;
  double canonical_without_back_transform_mpjpe_mm = 0.0;
  double mpjpe_ratio = 0.0;    ///< canonical / conventional
  double p_mpjpe_ratio = 0.0;  ///< canonical / conventional
  double error_reduction_rate = 0.0;  ///< 1 - mpjpe_ratio
};

struct ResidualStats {
  double mean_mm = 0.0;
  double std_mm = 0.0;
};

struct StudyReport {
  LiftingStudyConfig config;
  ArmComparison shift;    ///< test poses in test_root_region
  ArmComparison control;  ///< fresh test poses in train_root_region
  ResidualStats conventional_train_residual;
  ResidualStats canonical_train_residual;
};

/// Trains a conventional and a canonical lifter on identical poses and noise, then scores both
/// on a shifted test set and an in-domain control set. Canonical predictions are
/// back-transformed before they are compared with camera-frame ground truth.
StudyReport run_study(const LiftingStudyConfig& config, const Skeleton& skeleton, unsigned threads = 0);

}  // namespace canonpose
