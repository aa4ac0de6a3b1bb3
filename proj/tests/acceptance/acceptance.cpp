// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "canonpose/canonical.hpp"
#include "canonpose/dataset.hpp"
#include "canonpose/lift.hpp"
#include "canonpose/metrics.hpp"
#include "canonpose/synth.hpp"
#include "cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace canonpose;

namespace {

// Pinned tolerances.
constexpr double kPathTolPx = 1e-9;
constexpr double kPathBudgetS = 10.0;
constexpr double kRoundTripTolM = 1e-9;
constexpr double kResidualTolPx = 1e-9;
constexpr double kMappingTol = 1e-9;
constexpr double kRotationTol = 1e-9;
constexpr double kSimilarityTolM = 1e-9;
constexpr double kMetricSlack = 1e-12;
constexpr double kGridStepDeg = 1.0;
constexpr double kStudyTargetRatio = 0.9;
constexpr double kControlLo = 0.5;
constexpr double kControlHi = 2.0;
constexpr double kStudyBudgetS = 120.0;

constexpr std::size_t kPathPoses = 10000;
constexpr std::size_t kPathCameras = 10;
constexpr std::size_t kRoundTripPoses = 10000;
constexpr std::size_t kResidualPairs = 1000;
constexpr std::size_t kMappingPoses = 1000;
constexpr std::size_t kMetricPairs = 1000;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

const Skeleton& skel() {
  static const Skeleton s = Skeleton::h36m17();
  return s;
}

std::vector<Pose3D> wide_poses(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_poses = n;
  cfg.root_region = {Vec3(-2.5, -1.5, 1.5), Vec3(2.5, 1.5, 9.0)};
  return generate_poses(cfg, skel(), 0);
}

// Rotation checks shared by several criteria.
struct RotationAudit {
  std::size_t count = 0;
  double orth = 0.0;
  double det = 0.0;
  double align = 0.0;

  void add(const CanonicalRotation& r, const Vec3& pelvis) {
    ++count;
    const Mat3& m = r.matrix();
    orth = std::max(orth, max_abs(m.transpose() * m - Mat3::Identity()));
    det = std::max(det, std::abs(m.determinant() - 1.0));
    align = std::max(align, max_abs(m * pelvis.normalized() - Vec3::UnitZ()));
  }
};

RotationAudit rotations;

void path_equivalence() {
  const auto poses = wide_poses(kPathPoses, 101);
  oracle::Rng rng(102);
  std::vector<CameraIntrinsics> cams;
  for (std::size_t c = 0; c < kPathCameras; ++c) cams.push_back(oracle::intrinsics(rng));

  double min_z = 1e300;
  for (const auto& p : poses) min_z = std::min(min_z, p.joints().col(2).minCoeff());

  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  double worst_rot = 0.0;
  for (const auto& k : cams) {
    for (const auto& p : poses) {
      const Canonical3D c3 = canonicalize_3d(p, skel());
      const Pose2D via3 = project_canonical_centered(c3.pose, k);
      const Canonical2D via2 = canonicalize_2d(project(p, k), k, skel());
      worst = std::max(worst, max_abs(via3.joints() - via2.pose.joints()));
      worst_rot = std::max(worst_rot, max_abs(c3.rotation.matrix() - via2.rotation.matrix()));
      rotations.add(c3.rotation, p.joint(0));
    }
  }
  const double dt = seconds_since(t0);
  report(1, worst < kPathTolPx && dt < kPathBudgetS && min_z > 0.1,
         fmt("3D path vs 2D path canonical 2D, %zu poses x %zu cameras: max |diff| = %.3g px (tol %.0e), "
             "rotation max |diff| = %.3g, min joint Z = %.3f m, %.2f s (budget %.0f s)",
             poses.size(), cams.size(), worst, kPathTolPx, worst_rot, min_z, dt, kPathBudgetS));
}

void round_trip() {
  const auto poses = wide_poses(kRoundTripPoses, 201);
  double worst = 0.0;
  for (const auto& p : poses) {
    const Canonical3D c = canonicalize_3d(p, skel());
    const Pose3D back = back_transform(root_relative(c.pose, skel()), c.rotation, c.root_depth, skel());
    worst = std::max(worst, max_abs(back.joints() - root_relative(p, skel()).joints()));
    rotations.add(c.rotation, p.joint(0));
  }
  report(2, worst < kRoundTripTolM,
         fmt("canonicalize_3d -> root_relative -> back_transform on %zu poses: max |diff| = %.3g m (tol %.0e)",
             poses.size(), worst, kRoundTripTolM));
}

void residual_identity() {
  const auto shapes = wide_poses(kResidualPairs, 301);
  oracle::Rng rng(302);
  double worst = 0.0;
  for (std::size_t i = 0; i < kResidualPairs; ++i) {
    const CameraIntrinsics k = oracle::intrinsics(rng);
    const Pose3D rel = root_relative(shapes[i], skel());
    const Vec3 off(oracle::uniform(rng, -2.0, 2.0), oracle::uniform(rng, -1.5, 1.5), oracle::uniform(rng, 2.5, 8.0));
    Joints3 pos1 = rel.joints();
    Joints3 pos2 = rel.joints();
    pos1.col(2).array() += off.z();
    pos2.rowwise() += off.transpose();
    const Pose2D p1 = project(Pose3D(pos1, Frame::Camera), k);
    const Pose2D p2 = project(Pose3D(pos2, Frame::Camera), k);
    for (Eigen::Index j = 0; j < rel.num_joints(); ++j) {
      const double zj = pos1(j, 2);
      const Vec2 expected(k.fx * off.x() / zj, k.fy * off.y() / zj);
      worst = std::max(worst, max_abs(p2.joint(j) - p1.joint(j) - expected));
    }
  }
  report(3, worst < kResidualTolPx,
         fmt("off-axis residual (fx X/Z, fy Y/Z) per joint on %zu (pose, offset) pairs: max |diff| = %.3g px (tol %.0e)",
             kResidualPairs, worst, kResidualTolPx));
}

void mapping_forms() {
  const auto poses = wide_poses(kMappingPoses, 401);
  oracle::Rng rng(402);
  bool root_exact = true;
  double canon_worst = 0.0;
  double conv_worst = 0.0;
  for (const auto& p : poses) {
    const CameraIntrinsics k = oracle::intrinsics(rng);
    const double w = k.width;

    // Canonical: both the 3D-built and the test-time 2D-built poses.
    const CanonicalRecord rec = make_canonical_record(p, k, skel());
    const Canonical2D c2 = canonicalize_2d(project(p, k), k, skel());
    rotations.add(rec.rotation, p.joint(0));
    rotations.add(c2.rotation, p.joint(0));
    const Pose3D rel = root_relative(rec.canonical_3d, skel());
    for (const Pose2D* img : {&rec.canonical_2d, &c2.pose}) {
      const Pose2D s = screen_normalize(*img, k);
      root_exact = root_exact && s.joint(0).x() == 0.0 && s.joint(0).y() == 0.0;
      for (Eigen::Index j = 0; j < s.num_joints(); ++j) {
        const double z = rec.canonical_3d.joint(j).z();
        const Vec2 ax(2.0 * k.fx / w * rel.joint(j).x() / z, 2.0 * k.fy / w * rel.joint(j).y() / z);
        canon_worst = std::max(canon_worst, max_abs(s.joint(j) - ax));
      }
    }

    // Conventional: A X_hat + B with B = (fx X_r / Z + cx, fy Y_r / Z + cy).
    const Pose2D img = project(p, k);
    const Pose3D crel = root_relative(p, skel());
    const Vec3 r = p.joint(0);
    for (Eigen::Index j = 0; j < img.num_joints(); ++j) {
      const double z = p.joint(j).z();
      const Vec2 a_x(k.fx / z * crel.joint(j).x(), k.fy / z * crel.joint(j).y());
      const Vec2 b(k.fx / z * r.x() + k.cx, k.fy / z * r.y() + k.cy);
      conv_worst = std::max(conv_worst, max_abs(img.joint(j) - (a_x + b)));
    }
  }
  report(4, root_exact && canon_worst < kMappingTol && conv_worst < kMappingTol,
         fmt("mapping forms on %zu poses: canonical screen root exactly (0,0) = %s; canonical AX max |diff| = %.3g; "
             "conventional AX+B max |diff| = %.3g px (tol %.0e)",
             poses.size(), root_exact ? "yes" : "no", canon_worst, conv_worst, kMappingTol));
}

void rotation_validity() {
  // Antiparallel and zero inputs must raise rather than produce a rotation.
  bool guarded = false;
  try {
    rodrigues_align(-Vec3::UnitZ(), Vec3::UnitZ());
  } catch (const AntiparallelError&) {
    guarded = true;
  }
  report(5,
         rotations.count > 0 && rotations.orth < kRotationTol && rotations.det < kRotationTol &&
             rotations.align < kRotationTol && guarded,
         fmt("%zu canonical rotations: max |R^T R - I| = %.3g, max |det R - 1| = %.3g, max |R v_pelvis - z| = %.3g "
             "(tol %.0e); antiparallel input rejected = %s",
             rotations.count, rotations.orth, rotations.det, rotations.align, kRotationTol, guarded ? "yes" : "no"));
}

void metric_suite() {
  oracle::Rng rng(601);
  const auto a = wide_poses(kMetricPairs, 602);
  const auto b = wide_poses(kMetricPairs, 603);
  std::size_t order_violations = 0;
  double worst_similarity = 0.0;
  for (std::size_t i = 0; i < kMetricPairs; ++i) {
    const std::vector<Pose3D> p{root_relative(a[i], skel())};
    const std::vector<Pose3D> g{root_relative(b[i], skel())};
    if (!(p_mpjpe(p, g) <= mpjpe(p, g) + kMetricSlack)) ++order_violations;

    const SimilarityTransform t{oracle::uniform(rng, 0.3, 3.0), oracle::rotation(rng),
                                Vec3(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2))};
    const std::vector<Pose3D> moved{Pose3D(t.apply(g[0].joints()), Frame::Camera)};
    worst_similarity = std::max(worst_similarity, p_mpjpe(moved, g));
  }

  // Hand-built 4-joint case against an exhaustive rotation grid.
  Joints3 gt(4, 3);
  gt << 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3;
  Joints3 pred(4, 3);
  pred << 0.1, 0.0, 0.2, 0.9, 0.3, -0.1, -0.4, 1.8, 0.2, 0.3, 0.2, 2.7;
  const ProcrustesResult pr = procrustes_align(Pose3D(pred, Frame::Camera), Pose3D(gt, Frame::Camera));
  const double ours = (pr.aligned.joints() - gt).rowwise().squaredNorm().sum();
  const auto t0 = std::chrono::steady_clock::now();
  const double grid = oracle::grid_min_sse(pred, gt, kGridStepDeg);
  const double grid_s = seconds_since(t0);
  // Any rotation is within 1.5 steps of a grid point (half a step per Euler angle), so the grid's RMS
  // residual can exceed the optimum by at most s * delta * RMS(|centered pred|).
  const Joints3 centered = pred.rowwise() - pred.colwise().mean();
  const double delta = 1.5 * kGridStepDeg * std::numbers::pi / 180.0;
  const double rms_bound = pr.transform.scale * delta * std::sqrt(centered.rowwise().squaredNorm().mean());
  const double rms_ours = std::sqrt(ours / 4.0);
  const double rms_grid = std::sqrt(grid / 4.0);
  const bool grid_ok = ours <= grid + kMetricSlack && rms_grid - rms_ours <= rms_bound;

  report(6, order_violations == 0 && worst_similarity < kSimilarityTolM && grid_ok,
         fmt("p_mpjpe <= mpjpe violations: %zu / %zu; p_mpjpe after random similarity max = %.3g m (tol %.0e); "
             "4-joint case RMS %.6f m vs %.0f-degree grid %.6f m (allowed gap %.4f m, grid took %.1f s)",
             order_violations, kMetricPairs, worst_similarity, kSimilarityTolM, rms_ours, kGridStepDeg, rms_grid,
             rms_bound, grid_s));
}

void lifting_study() {
  const LiftingStudyConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const StudyReport r = run_study(cfg, skel(), 0);
  const double dt = seconds_since(t0);
  const bool lower = r.shift.canonical.mpjpe_mm < r.shift.conventional.mpjpe_mm;
  const bool target = r.shift.mpjpe_ratio <= kStudyTargetRatio;
  const bool control = r.control.mpjpe_ratio >= kControlLo && r.control.mpjpe_ratio <= kControlHi;
  report(7, lower && target && control && dt < kStudyBudgetS,
         fmt("lifting study (default config): shift MPJPE canonical %.2f mm vs conventional %.2f mm, ratio %.4f "
             "(strictly lower: %s; target <= %.2f: %s); control ratio %.4f (range [%.1f, %.1f]: %s); %.1f s (budget %.0f s)",
             r.shift.canonical.mpjpe_mm, r.shift.conventional.mpjpe_mm, r.shift.mpjpe_ratio, lower ? "yes" : "no",
             kStudyTargetRatio, target ? "yes" : "no", r.control.mpjpe_ratio, kControlLo, kControlHi,
             control ? "yes" : "no", dt, kStudyBudgetS));
}

PoseSequence n_frames(std::size_t n) {
  PoseSequence s{"S", "a", "c", 50.0, {}};
  for (std::size_t i = 0; i < n; ++i) {
    FrameRecord f;
    f.frame_index = static_cast<std::int64_t>(i);
    Joints3 j(1, 3);
    j << 0.0, 0.0, 3.0;
    f.pose_3d.emplace(j, Frame::Camera);
    s.frames.push_back(std::move(f));
  }
  return s;
}

void windowing() {
  const WindowSpec spec{243, 81};
  const auto w243 = window(n_frames(243), spec, PadPolicy::Drop);
  const bool a = w243.size() == 1 && w243[0].start == 0 && w243[0].padded_frames == 0;

  const auto w405 = window(n_frames(405), spec, PadPolicy::Drop);
  const bool b = w405.size() == 3 && w405[0].start == 0 && w405[1].start == 81 && w405[2].start == 162;

  const auto w100 = window(n_frames(100), spec, PadPolicy::RepeatLast);
  bool c = w100.size() == 1 && w100[0].source_frames.size() == 243 && w100[0].padded_frames == 143;
  if (c) {
    for (std::size_t i = 0; i < 243; ++i) c = c && w100[0].source_frames[i] == (i < 100 ? i : 99);
  }
  report(8, a && b && c,
         fmt("windows T=243 stride=81: 243 frames -> %zu window(s); 405 frames (drop) -> %zu at offsets 0/81/162 = %s; "
             "100 frames (repeat-last) -> %zu window, slots 100..242 copy frame 99 = %s",
             w243.size(), w405.size(), b ? "yes" : "no", w100.size(), c ? "yes" : "no"));
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "canonpose");
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / ("canonpose_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string many = std::to_string(std::max(4u, std::thread::hardware_concurrency()));

  // Fixture: several sequences so canonicalization actually fans out.
  const auto poses = wide_poses(2400, 901);
  const CameraIntrinsics k = default_intrinsics();
  std::vector<PoseSequence> seqs;
  for (std::size_t s = 0; s < 12; ++s) {
    PoseSequence seq{"S" + std::to_string(s % 4), "act" + std::to_string(s), "cam", 50.0, {}};
    for (std::size_t f = 0; f < 200; ++f) {
      FrameRecord r;
      r.frame_index = static_cast<std::int64_t>(f);
      r.pose_3d = poses[s * 200 + f];
      r.pose_2d = project(*r.pose_3d, k);
      seq.frames.push_back(std::move(r));
    }
    seqs.push_back(std::move(seq));
  }
  save_sequences(seqs, dir / "in.ndjson", skel());
  std::ofstream(dir / "camera.json") << R"({"fx":1145.04940459,"fy":1143.78109572,"cx":512.54150496,"cy":515.45148698,"width":1000,"height":1002})";

  const auto p = [&](const char* name) { return (dir / name).string(); };
  bool codes_ok = true;
  for (const char* mode : {"3d", "2d"}) {
    for (const auto& [threads, out] : {std::pair{"1", "a"}, {"1", "b"}, {many.c_str(), "c"}}) {
      const std::string file = std::string(mode) + out + ".ndjson";
      codes_ok = codes_ok && run_cli({"canonicalize", "--input", p("in.ndjson"), "--camera", p("camera.json"),
                                      "--mode", mode, "--threads", threads, "--output", p(file.c_str())}) == 0;
    }
  }
  for (const auto& [threads, out] : {std::pair{"1", "sa.json"}, {"1", "sb.json"}, {many.c_str(), "sc.json"}}) {
    codes_ok = codes_ok && run_cli({"study", "--config", "default", "--threads", threads, "--output", p(out)}) == 0;
  }

  const auto same3 = [&](const char* a, const char* b, const char* c) {
    const std::string x = slurp(p(a));
    return !x.empty() && x == slurp(p(b)) && x == slurp(p(c));
  };
  const bool can3 = same3("3da.ndjson", "3db.ndjson", "3dc.ndjson");
  const bool can2 = same3("2da.ndjson", "2db.ndjson", "2dc.ndjson");
  const bool study = same3("sa.json", "sb.json", "sc.json");
  fs::remove_all(dir);

  report(9, codes_ok && can3 && can2 && study,
         fmt("byte-identical outputs over repeated runs and --threads 1 vs %s: canonicalize 3d = %s, canonicalize 2d = %s, "
             "study = %s",
             many.c_str(), can3 ? "yes" : "no", can2 ? "yes" : "no", study ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto guard = [](int id, auto fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what());
    }
  };
  guard(1, path_equivalence);
  guard(2, round_trip);
  guard(3, residual_identity);
  guard(4, mapping_forms);
  guard(5, rotation_validity);
  guard(6, metric_suite);
  guard(7, lifting_study);
  guard(8, windowing);
  guard(9, determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
