#include "canonpose/lift.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <optional>
#include <string>

#include "canonpose/canonical.hpp"
#include "canonpose/metrics.hpp"
#include "canonpose/parallel.hpp"

namespace canonpose {

std::string_view to_string(MappingKind kind) {
  return kind == MappingKind::Canonical ? "canonical" : "conventional";
}

Eigen::MatrixXd LinearLifter::effective_weights() const {
  const Eigen::Index d = feature_mean.size();
  Eigen::MatrixXd raw(weights.rows(), weights.cols());
  // y = ((x - mu) / s) W_x + b  =  x (W_x / s) + (b - (mu / s) W_x)
  const Eigen::RowVectorXd inv_scale = feature_scale.cwiseInverse();
  raw.topRows(d) = inv_scale.transpose().asDiagonal() * weights.topRows(d);
  raw.row(d) = weights.row(d) - feature_mean.cwiseProduct(inv_scale) * weights.topRows(d);
  return raw;
}

LinearLifter LinearLifter::from_weights(Eigen::MatrixXd raw_weights, MappingKind kind) {
  LinearLifter l;
  const Eigen::Index d = raw_weights.rows() - 1;
  if (d < 2 || d % 2 != 0 || raw_weights.cols() % 3 != 0 || raw_weights.cols() / 3 != d / 2) {
    throw DimensionError("LinearLifter: weights must be (2J + 1) x 3J");
  }
  l.weights = std::move(raw_weights);
  l.feature_mean = Eigen::RowVectorXd::Zero(d);
  l.feature_scale = Eigen::RowVectorXd::Ones(d);
  l.kind = kind;
  return l;
}

namespace {

Eigen::RowVectorXd flatten(const Pose2D& p) {
  return Eigen::Map<const Eigen::RowVectorXd>(p.joints().data(), p.joints().size());
}

Eigen::RowVectorXd flatten(const Pose3D& p) {
  return Eigen::Map<const Eigen::RowVectorXd>(p.joints().data(), p.joints().size());
}

}  // namespace

LinearLifter fit(std::span<const TrainingPair> pairs, const FitOptions& options) {
  if (!(options.ridge_lambda >= 0.0) || !std::isfinite(options.ridge_lambda)) {
    throw InvariantError("fit: ridge_lambda must be a finite non-negative number");
  }
  if (pairs.empty()) throw DimensionError("fit: no training pairs");
  const Eigen::Index joints = pairs.front().input.num_joints();
  const Eigen::Index in_dim = 2 * joints;
  const Eigen::Index out_dim = 3 * joints;
  const auto n = static_cast<Eigen::Index>(pairs.size());
  if (n < in_dim + 1) {
    throw DimensionError("fit: need at least " + std::to_string(in_dim + 1) + " pairs, got " + std::to_string(n));
  }

  Eigen::MatrixXd a(n, in_dim + 1);
  Eigen::MatrixXd y(n, out_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pair = pairs[static_cast<std::size_t>(i)];
    require_space(pair.input, Space::ScreenNormalized, "fit");
    if (pair.input.num_joints() != joints || pair.target.num_joints() != joints) {
      throw DimensionError("fit: inconsistent joint counts across training pairs");
    }
    a.row(i).head(in_dim) = flatten(pair.input);
    y.row(i) = flatten(pair.target);
  }
  a.col(in_dim).setOnes();

  LinearLifter lifter;
  lifter.ridge_lambda = options.ridge_lambda;
  lifter.kind = options.kind;
  lifter.feature_mean = Eigen::RowVectorXd::Zero(in_dim);
  lifter.feature_scale = Eigen::RowVectorXd::Ones(in_dim);
  if (options.standardize) {
    auto x = a.leftCols(in_dim);
    lifter.feature_mean = x.colwise().mean();
    x.rowwise() -= lifter.feature_mean;
    for (Eigen::Index c = 0; c < in_dim; ++c) {
      const double sd = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(n));
      lifter.feature_scale(c) = sd > 1e-12 ? sd : 1.0;
    }
    x.array().rowwise() /= lifter.feature_scale.array();
  }

  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += options.ridge_lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-13)) {
    throw SingularMatrixError("fit: normal matrix is singular (ridge_lambda = " +
                              std::to_string(options.ridge_lambda) + ")");
  }
  lifter.weights = ldlt.solve(a.transpose() * y);
  if (!lifter.weights.allFinite()) throw SingularMatrixError("fit: solution is not finite");
  return lifter;
}

Pose3D predict(const LinearLifter& lifter, const Pose2D& input) {
  require_space(input, Space::ScreenNormalized, "predict");
  const Eigen::Index joints = lifter.num_joints();
  if (input.num_joints() != joints) {
    throw DimensionError("predict: lifter expects " + std::to_string(joints) + " joints, got " +
                         std::to_string(input.num_joints()));
  }
  const Eigen::Index d = 2 * joints;
  const Eigen::RowVectorXd x = (flatten(input) - lifter.feature_mean).cwiseQuotient(lifter.feature_scale);
  const Eigen::RowVectorXd out = x * lifter.weights.topRows(d) + lifter.weights.row(d);
  Joints3 j = Eigen::Map<const Joints3>(out.data(), joints, 3);
  return {std::move(j), lifter.kind == MappingKind::Canonical ? Frame::CanonicalCamera : Frame::Camera};
}

void LiftingStudyConfig::validate() const {
  for (const Box3* box : {&train_root_region, &test_root_region}) {
    if (!((box->max.array() >= box->min.array()).all())) {
      throw InvariantError("study: region max must be >= min on every axis");
    }
    if (!(box->min.z() > 0.5)) throw InvariantError("study: regions must lie at Z > 0.5 m");
  }
  if (n_train < 1 || n_test < 1) throw InvariantError("study: n_train and n_test must be >= 1");
  if (!(noise_sigma >= 0.0)) throw InvariantError("study: noise_sigma must be >= 0");
  if (!(ridge_lambda >= 0.0)) throw InvariantError("study: ridge_lambda must be >= 0");
  intrinsics.validate();
  const bool overlap_x = test_root_region.min.x() <= train_root_region.max.x() &&
                         train_root_region.min.x() <= test_root_region.max.x();
  const bool overlap_y = test_root_region.min.y() <= train_root_region.max.y() &&
                         train_root_region.min.y() <= test_root_region.max.y();
  if (overlap_x && overlap_y) throw InvariantError("study: test x-y region must be disjoint from the train x-y region");
}

namespace {

enum Stream : std::uint64_t { kTrainPoses = 1, kShiftPoses = 2, kControlPoses = 3, kNoiseBase = 100 };

struct Observed {
  Pose3D pose;
  Joints2 noise;  ///< pixels, shared by both arms
};

std::vector<Observed> draw_set(const LiftingStudyConfig& cfg, const Skeleton& skeleton, const Box3& region,
                               std::size_t count, Stream stream, unsigned threads) {
  SynthConfig sc;
  sc.seed = mix64(cfg.seed ^ mix64(stream));
  sc.n_poses = count;
  sc.limb_scale = cfg.limb_scale;
  sc.root_region = region;
  sc.intrinsics_pool = {cfg.intrinsics};
  std::vector<Pose3D> poses = generate_poses(sc, skeleton, threads);

  const auto j = static_cast<Eigen::Index>(skeleton.num_joints());
  std::vector<Observed> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(cfg.seed, i, kNoiseBase + stream);
    Joints2 noise(j, 2);
    for (Eigen::Index r = 0; r < j; ++r) {
      for (int c = 0; c < 2; ++c) noise(r, c) = cfg.noise_sigma * rng.normal();
    }
    out.push_back({std::move(poses[i]), std::move(noise)});
  }
  return out;
}

Pose2D add_noise(const Pose2D& p, const Joints2& noise) { return {p.joints() + noise, p.space()}; }

struct PoseScore {
  double conventional = 0.0;
  double conventional_p = 0.0;
  double canonical = 0.0;
  double canonical_p = 0.0;
  double canonical_raw = 0.0;
};

ArmComparison evaluate(const LinearLifter& conventional, const LinearLifter& canonical,
                       const std::vector<Observed>& test, const CameraIntrinsics& k, const Skeleton& skeleton,
                       unsigned threads) {
  std::vector<PoseScore> scores(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    const Observed& o = test[i];
    const Pose3D gt = root_relative(o.pose, skeleton);
    const Pose2D observed = add_noise(project(o.pose, k), o.noise);

    const Pose3D conv = predict(conventional, screen_normalize(observed, k));

    const Canonical2D c2 = canonicalize_2d(observed, k, skeleton);
    const Pose3D canon_pred = predict(canonical, screen_normalize(c2.pose, k));
    const double depth = o.pose.joint(static_cast<Eigen::Index>(skeleton.root_index)).norm();
    const Pose3D canon = back_transform(canon_pred, c2.rotation, depth, skeleton);
    const Pose3D canon_raw(canon_pred.joints(), Frame::Camera);

    PoseScore& s = scores[i];
    s.conventional = mean_joint_error(conv, gt);
    s.conventional_p = mean_joint_error(procrustes_align(conv, gt).aligned, gt);
    s.canonical = mean_joint_error(canon, gt);
    s.canonical_p = mean_joint_error(procrustes_align(canon, gt).aligned, gt);
    s.canonical_raw = mean_joint_error(canon_raw, gt);
  });

  const auto mean_mm = [&](double PoseScore::*field) {
    std::vector<double> v(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) v[i] = scores[i].*field;
    return 1000.0 * pairwise_sum(v) / static_cast<double>(v.size());
  };
  ArmComparison cmp;
  cmp.conventional = {mean_mm(&PoseScore::conventional), mean_mm(&PoseScore::conventional_p)};
  cmp.canonical = {mean_mm(&PoseScore::canonical), mean_mm(&PoseScore::canonical_p)};
  cmp.canonical_without_back_transform_mpjpe_mm = mean_mm(&PoseScore::canonical_raw);
  cmp.mpjpe_ratio = cmp.canonical.mpjpe_mm / cmp.conventional.mpjpe_mm;
  cmp.p_mpjpe_ratio = cmp.canonical.p_mpjpe_mm / cmp.conventional.p_mpjpe_mm;
  cmp.error_reduction_rate = 1.0 - cmp.mpjpe_ratio;
  return cmp;
}

ResidualStats training_residual(const LinearLifter& lifter, std::span<const TrainingPair> pairs) {
  std::vector<double> err(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pose3D pred = predict(lifter, pairs[i].input);
    err[i] = mean_joint_error(Pose3D(pred.joints(), pairs[i].target.frame()), pairs[i].target);
  }
  const double mean = pairwise_sum(err) / static_cast<double>(err.size());
  std::vector<double> sq(err.size());
  for (std::size_t i = 0; i < err.size(); ++i) sq[i] = (err[i] - mean) * (err[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(sq.size());
  return {1000.0 * mean, 1000.0 * std::sqrt(var)};
}

}  // namespace

StudyReport run_study(const LiftingStudyConfig& config, const Skeleton& skeleton, unsigned threads) {
  config.validate();
  skeleton.validate();
  const CameraIntrinsics& k = config.intrinsics;

  const auto train = draw_set(config, skeleton, config.train_root_region, config.n_train, kTrainPoses, threads);
  const auto shifted = draw_set(config, skeleton, config.test_root_region, config.n_test, kShiftPoses, threads);
  const auto control = draw_set(config, skeleton, config.train_root_region, config.n_test, kControlPoses, threads);

  std::vector<std::optional<TrainingPair>> conv_slots(train.size());
  std::vector<std::optional<TrainingPair>> canon_slots(train.size());
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const Observed& o = train[i];
    conv_slots[i] = TrainingPair{screen_normalize(add_noise(project(o.pose, k), o.noise), k),
                                 root_relative(o.pose, skeleton)};
    const CanonicalRecord rec = make_canonical_record(o.pose, k, skeleton);
    canon_slots[i] = TrainingPair{screen_normalize(add_noise(rec.canonical_2d, o.noise), k),
                                  root_relative(rec.canonical_3d, skeleton)};
  });
  std::vector<TrainingPair> conv_pairs;
  std::vector<TrainingPair> canon_pairs;
  conv_pairs.reserve(train.size());
  canon_pairs.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    conv_pairs.push_back(std::move(*conv_slots[i]));
    canon_pairs.push_back(std::move(*canon_slots[i]));
  }

  const LinearLifter conventional =
      fit(conv_pairs, {config.ridge_lambda, /*standardize=*/true, MappingKind::Conventional});
  const LinearLifter canonical = fit(canon_pairs, {config.ridge_lambda, /*standardize=*/true, MappingKind::Canonical});

  StudyReport report;
  report.config = config;
  report.shift = evaluate(conventional, canonical, shifted, k, skeleton, threads);
  report.control = evaluate(conventional, canonical, control, k, skeleton, threads);
  report.conventional_train_residual = training_residual(conventional, conv_pairs);
  report.canonical_train_residual = training_residual(canonical, canon_pairs);
  return report;
}

}  // namespace canonpose
