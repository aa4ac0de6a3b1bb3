#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "canonpose/camera.hpp"
#include "canonpose/canonical.hpp"
#include "canonpose/dataset.hpp"
#include "canonpose/lift.hpp"
#include "canonpose/metrics.hpp"
#include "canonpose/stats.hpp"
#include "canonpose/synth.hpp"

namespace canonpose::cli {

namespace {

using Json = nlohmann::ordered_json;

// Bad flags or config; reported with exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_error(std::string_view kind, std::string_view message) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

// Writes to `path`, or stdout for "-".
void write_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  body(out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
}

double number_at(const Json& obj, const char* key) {
  if (!obj.at(key).is_number()) throw ValidationError(std::string("config: '") + key + "' must be a number");
  return obj.at(key).get<double>();
}

std::size_t count_at(const Json& obj, const char* key) {
  if (!obj.at(key).is_number_unsigned()) {
    throw ValidationError(std::string("config: '") + key + "' must be a non-negative integer");
  }
  return obj.at(key).get<std::size_t>();
}

Vec3 vec3_at(const Json& obj, const char* key) {
  const Json& a = obj.at(key);
  if (!a.is_array() || a.size() != 3) throw ValidationError(std::string("config: '") + key + "' must hold 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a.at(i).is_number()) throw ValidationError(std::string("config: '") + key + "' must hold 3 numbers");
    v(i) = a.at(i).get<double>();
  }
  return v;
}

Box3 box_at(const Json& obj, const char* key) {
  const Json& b = obj.at(key);
  if (!b.is_object() || !b.contains("min") || !b.contains("max")) {
    throw ValidationError(std::string("config: '") + key + "' must be {\"min\": [x,y,z], \"max\": [x,y,z]}");
  }
  return {vec3_at(b, "min"), vec3_at(b, "max")};
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ValidationError("config: top-level value must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ValidationError("config: unknown key '" + item.key() + "'");
  }
}

CameraIntrinsics intrinsics_from(const Json& obj) {
  reject_unknown(obj, {"fx", "fy", "cx", "cy", "width", "height"});
  return {number_at(obj, "fx"), number_at(obj, "fy"),    number_at(obj, "cx"),
          number_at(obj, "cy"), number_at(obj, "width"), number_at(obj, "height")};
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json box_json(const Box3& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

Json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

Json summary_json(const DistributionSummary& s, const char* unit) {
  Json j;
  j["unit"] = unit;
  j["count"] = s.size();
  if (!s.empty()) {
    j["min"] = vec_json(s.min);
    j["max"] = vec_json(s.max);
    j["mean"] = vec_json(s.mean);
    j["extent"] = vec_json(s.extent());
    Json hs = Json::array();
    for (const auto& h : s.histograms) hs.push_back({{"edges", h.edges}, {"counts", h.counts}});
    j["histograms"] = hs;
  }
  if (s.degenerate > 0) j["degenerate"] = s.degenerate;
  return j;
}

// Options shared by most subcommands.
struct Common {
  std::string input;
  std::string output = "-";
  std::string camera;
  std::string skeleton = "h36m17";
  unsigned threads = 0;
};

void add_skeleton(CLI::App* cmd, Common& c) {
  cmd->add_option("--skeleton", c.skeleton, "Skeleton layout of the data; built-in: h36m17")->capture_default_str();
}

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "Worker threads; 0 = one per logical core. Output does not depend on it")
      ->capture_default_str();
}

void add_output(CLI::App* cmd, Common& c) {
  cmd->add_option("--output", c.output, "Output path, '-' for stdout")->capture_default_str();
}

Skeleton resolve_skeleton(const std::string& name) {
  try {
    return skeleton_by_name(name);
  } catch (const InvariantError& e) {
    throw ValidationError(e.what());
  }
}

// ---- canonicalize

struct CanonicalizeArgs {
  Common c;
  std::string mode = "3d";
};

void canonicalize(const CanonicalizeArgs& a) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  const Camera cam = load_camera(a.c.camera);
  std::vector<PoseSequence> seqs = load_sequences(a.c.input, skel);
  const CanonicalMode mode = a.mode == "2d" ? CanonicalMode::TwoD : CanonicalMode::ThreeD;

  // Global-frame 3D needs the camera extrinsics first.
  for (auto& s : seqs) {
    for (auto& f : s.frames) {
      if (!f.pose_3d || f.pose_3d->frame() != Frame::Global) continue;
      if (!cam.extrinsics) {
        throw InvalidFrameError("sequence " + s.subject + "/" + s.action + "/" + s.camera_id +
                                ": global-frame 3D but the camera file has no extrinsics");
      }
      f.pose_3d = world_to_camera(*f.pose_3d, *cam.extrinsics);
    }
  }

  const DatasetCanonicalization result = canonicalize_dataset(seqs, cam.intrinsics, mode, skel, a.c.threads);
  write_output(a.c.output, [&](std::ostream& out) { write_sequences(out, result.sequences, skel); });
  if (!result.ok()) {
    for (const auto& fail : result.failures) {
      Json j;
      j["error"] = "canonicalization";
      j["subject"] = fail.subject;
      j["action"] = fail.action;
      j["camera"] = fail.camera_id;
      Json frames = Json::array();
      for (const auto& f : fail.frames) frames.push_back({{"frame", f.frame_index}, {"message", f.message}});
      j["frames"] = frames;
      std::cerr << j.dump() << '\n';
    }
    throw Error(std::to_string(result.failures.size()) + " sequence(s) failed and were left out");
  }
}

// ---- stats

struct StatsArgs {
  Common c;
  std::string samples_csv;
};

void stats(const StatsArgs& a) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  const Camera cam = load_camera(a.c.camera);
  const std::vector<PoseSequence> seqs = load_sequences(a.c.input, skel);

  bool has_2d = false;
  bool has_3d = false;
  std::size_t frames = 0;
  for (const auto& s : seqs) {
    for (const auto& f : s.frames) {
      has_2d = has_2d || f.pose_2d.has_value();
      has_3d = has_3d || f.pose_3d.has_value();
      ++frames;
    }
  }

  const PelvisDistributions pelvis = pelvis_position_distribution(seqs, cam.intrinsics, skel);
  Json j;
  j["sequences"] = seqs.size();
  j["frames"] = frames;
  j["pelvis_xy"] = summary_json(pelvis.xy, "m");
  j["pelvis_image"] = summary_json(pelvis.image, "px");
  std::optional<DistributionSummary> orient;
  if (has_3d && skel.left_hip_index && skel.right_hip_index && skel.torso_index) {
    orient = body_orientation_distribution(seqs, skel);
    j["body_orientation"] = summary_json(*orient, "unit");
  }
  if (has_2d) j["joint_scatter_2d"] = summary_json(joint_scatter_extent(seqs, ScatterMode::TwoD, skel), "px");
  if (has_3d) {
    j["joint_scatter_3d"] = summary_json(joint_scatter_extent(seqs, ScatterMode::ThreeDRootRelative, skel), "m");
  }
  write_output(a.c.output, [&](std::ostream& out) { out << j.dump(2) << '\n'; });

  if (!a.samples_csv.empty()) {
    write_output(a.samples_csv, [&](std::ostream& out) {
      out << "distribution,a,b,c\n";
      const auto dump = [&](const char* name, const DistributionSummary& s) {
        for (const auto& v : s.samples) {
          out << name;
          for (Eigen::Index i = 0; i < 3; ++i) out << ',' << (i < v.size() ? format_number(v(i)) : "");
          out << '\n';
        }
      };
      dump("pelvis_xy", pelvis.xy);
      dump("pelvis_image", pelvis.image);
      if (orient) dump("body_orientation", *orient);
    });
  }
}

// ---- eval

struct EvalArgs {
  Common c;
  std::string pred;
  std::string gt;
  std::string metric = "mpjpe";
  bool back_transform = false;
};

void eval(const EvalArgs& a) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  const std::vector<PoseSequence> pred = load_sequences(a.pred, skel);
  const std::vector<PoseSequence> gt = load_sequences(a.gt, skel);
  if (pred.size() != gt.size()) {
    throw SchemaError("eval: prediction has " + std::to_string(pred.size()) + " sequences, ground truth " +
                      std::to_string(gt.size()));
  }

  std::vector<Pose3D> p;
  std::vector<Pose3D> g;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const PoseSequence& ps = pred[s];
    const PoseSequence& gs = gt[s];
    if (ps.subject != gs.subject || ps.action != gs.action || ps.camera_id != gs.camera_id ||
        ps.frames.size() != gs.frames.size()) {
      throw SchemaError("eval: sequence " + std::to_string(s) + " does not line up with the ground truth");
    }
    for (std::size_t f = 0; f < ps.frames.size(); ++f) {
      const FrameRecord& pf = ps.frames[f];
      const FrameRecord& gf = gs.frames[f];
      if (!pf.pose_3d || !gf.pose_3d) {
        throw SchemaError("eval: frame " + std::to_string(pf.frame_index) + " has no 3D pose");
      }
      if (a.back_transform) {
        if (!pf.rotation) {
          throw SchemaError("eval: --back-transform needs a rotation on frame " + std::to_string(pf.frame_index));
        }
        const Pose3D canon(pf.pose_3d->joints(), Frame::CanonicalCamera);
        p.push_back(back_transform(canon, *pf.rotation, pf.root_depth.value_or(0.0), skel));
      } else {
        p.push_back(root_relative(*pf.pose_3d, skel));
      }
      g.push_back(root_relative(*gf.pose_3d, skel));
    }
  }

  const double value = a.metric == "pmpjpe" ? p_mpjpe(p, g) : mpjpe(p, g);
  Json j;
  j["metric"] = a.metric;
  j["unit"] = "mm";
  j["value"] = 1000.0 * value;
  j["frames"] = p.size();
  j["back_transform"] = a.back_transform;
  write_output(a.c.output, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// ---- synth

struct SynthArgs {
  Common c;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  std::string oracle_report;
};

SynthConfig synth_config(const SynthArgs& a) {
  SynthConfig cfg;
  if (!a.config.empty()) {
    const Json j = read_json_file(a.config);
    reject_unknown(j, {"seed", "n_poses", "limb_scale", "root_region", "min_joint_depth"});
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_poses")) cfg.n_poses = count_at(j, "n_poses");
    if (j.contains("limb_scale")) cfg.limb_scale = number_at(j, "limb_scale");
    if (j.contains("root_region")) cfg.root_region = box_at(j, "root_region");
    if (j.contains("min_joint_depth")) cfg.min_joint_depth = number_at(j, "min_joint_depth");
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.count) cfg.n_poses = *a.count;
  return cfg;
}

void synth(const SynthArgs& a, SynthConfig cfg) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  if (!a.c.camera.empty()) cfg.intrinsics_pool = {load_camera(a.c.camera).intrinsics};
  const CameraIntrinsics& k = cfg.intrinsics_pool.front();
  const std::vector<Pose3D> poses = generate_poses(cfg, skel, a.c.threads);

  PoseSequence seq{"synth", "seed-" + std::to_string(cfg.seed), "0", 50.0, {}};
  seq.frames.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    FrameRecord f;
    f.frame_index = static_cast<std::int64_t>(i);
    f.pose_2d = project(poses[i], k);
    f.pose_3d = poses[i];
    seq.frames.push_back(std::move(f));
  }
  write_output(a.c.output, [&](std::ostream& out) { write_sequences(out, {seq}, skel); });

  if (!a.oracle_report.empty()) {
    const ConsistencyReport r = consistency_oracle(poses, k, skel, a.c.threads);
    Json j;
    j["poses"] = poses.size();
    j["threshold_px"] = r.threshold_px;
    j["max_discrepancy_px"] = r.max_discrepancy_px;
    j["mean_discrepancy_px"] = r.mean_discrepancy_px;
    j["median_discrepancy_px"] = r.median_discrepancy_px;
    j["p99_discrepancy_px"] = r.p99_discrepancy_px;
    j["flagged"] = r.flagged;
    Json flagged = Json::array();
    for (const auto& e : r.entries) {
      if (!e.flagged) continue;
      Json fe{{"pose", e.pose_index}, {"discrepancy_px", e.discrepancy_px}};
      if (!e.error.empty()) fe["error"] = e.error;
      flagged.push_back(fe);
    }
    j["flagged_poses"] = flagged;
    write_output(a.oracle_report, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }
}

// ---- study

struct StudyArgs {
  Common c;
  std::string config = "default";
  std::optional<std::uint64_t> seed;
};

LiftingStudyConfig study_config(const StudyArgs& a) {
  LiftingStudyConfig cfg;
  if (a.config != "default") {
    const Json j = read_json_file(a.config);
    reject_unknown(j, {"train_root_region", "test_root_region", "noise_sigma", "n_train", "n_test", "seed",
                       "ridge_lambda", "limb_scale", "camera"});
    if (j.contains("train_root_region")) cfg.train_root_region = box_at(j, "train_root_region");
    if (j.contains("test_root_region")) cfg.test_root_region = box_at(j, "test_root_region");
    if (j.contains("noise_sigma")) cfg.noise_sigma = number_at(j, "noise_sigma");
    if (j.contains("n_train")) cfg.n_train = count_at(j, "n_train");
    if (j.contains("n_test")) cfg.n_test = count_at(j, "n_test");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ridge_lambda")) cfg.ridge_lambda = number_at(j, "ridge_lambda");
    if (j.contains("limb_scale")) cfg.limb_scale = number_at(j, "limb_scale");
    if (j.contains("camera")) cfg.intrinsics = intrinsics_from(j.at("camera"));
  }
  if (a.seed) cfg.seed = *a.seed;
  try {
    cfg.validate();
  } catch (const InvariantError& e) {
    throw ValidationError(e.what());
  }
  return cfg;
}

Json arm_json(const ArmComparison& c) {
  Json j;
  j["conventional"] = {{"mpjpe_mm", c.conventional.mpjpe_mm}, {"p_mpjpe_mm", c.conventional.p_mpjpe_mm}};
  j["canonical"] = {{"mpjpe_mm", c.canonical.mpjpe_mm}, {"p_mpjpe_mm", c.canonical.p_mpjpe_mm}};
  j["canonical_without_back_transform_mpjpe_mm"] = c.canonical_without_back_transform_mpjpe_mm;
  j["mpjpe_ratio"] = c.mpjpe_ratio;
  j["p_mpjpe_ratio"] = c.p_mpjpe_ratio;
  j["error_reduction_rate"] = c.error_reduction_rate;
  return j;
}

void study(const StudyArgs& a, const LiftingStudyConfig& cfg) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  const StudyReport r = run_study(cfg, skel, a.c.threads);
  Json j;
  j["seed"] = cfg.seed;
  j["config"] = {{"train_root_region", box_json(cfg.train_root_region)},
                 {"test_root_region", box_json(cfg.test_root_region)},
                 {"noise_sigma_px", cfg.noise_sigma},
                 {"n_train", cfg.n_train},
                 {"n_test", cfg.n_test},
                 {"seed", cfg.seed},
                 {"ridge_lambda", cfg.ridge_lambda},
                 {"limb_scale_m", cfg.limb_scale},
                 {"camera", intrinsics_json(cfg.intrinsics)}};
  j["shift"] = arm_json(r.shift);
  j["control"] = arm_json(r.control);
  j["train_residual_mm"] = {
      {"conventional", {{"mean", r.conventional_train_residual.mean_mm}, {"std", r.conventional_train_residual.std_mm}}},
      {"canonical", {{"mean", r.canonical_train_residual.mean_mm}, {"std", r.canonical_train_residual.std_mm}}}};
  write_output(a.c.output, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// ---- window

struct WindowArgs {
  Common c;
  std::size_t length = 243;
  std::size_t stride = 81;
  std::string pad = "drop";
};

void window_cmd(const WindowArgs& a) {
  const Skeleton skel = skeleton_by_name(a.c.skeleton);
  const std::vector<PoseSequence> seqs = load_sequences(a.c.input, skel);
  const WindowSpec spec{a.length, a.stride};
  const PadPolicy pad = a.pad == "repeat-last" ? PadPolicy::RepeatLast : PadPolicy::Drop;
  write_output(a.c.output, [&](std::ostream& out) {
    for (const auto& s : seqs) {
      const auto windows = window(s, spec, pad);
      for (std::size_t w = 0; w < windows.size(); ++w) {
        Json j;
        j["subject"] = s.subject;
        j["action"] = s.action;
        j["camera"] = s.camera_id;
        j["window"] = w;
        j["start"] = windows[w].start;
        j["padded"] = windows[w].padded_frames;
        Json frames = Json::array();
        for (std::size_t src : windows[w].source_frames) frames.push_back(s.frames[src].frame_index);
        j["frames"] = frames;
        out << j.dump() << '\n';
      }
    }
  });
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Canonical-domain 2D-3D pose toolkit. Lengths are meters internally; errors are reported in mm.",
               "canonpose"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  CanonicalizeArgs ca;
  auto* cmd_can = app.add_subcommand("canonicalize", "Rotate every frame so its root lies on the principal axis");
  cmd_can->add_option("--input", ca.c.input, "Pose NDJSON")->required()->check(CLI::ExistingFile);
  cmd_can->add_option("--camera", ca.c.camera, "Camera JSON (fx, fy, cx, cy, width, height; optional R, t)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_can
      ->add_option("--mode", ca.mode,
                   "3d: canonicalize camera-frame 3D and emit centered canonical 2D; "
                   "2d: canonicalize image-space 2D only")
      ->check(CLI::IsMember({"2d", "3d"}))
      ->capture_default_str();
  add_output(cmd_can, ca.c);
  add_skeleton(cmd_can, ca.c);
  add_threads(cmd_can, ca.c);

  StatsArgs sa;
  auto* cmd_stats = app.add_subcommand("stats", "Pelvis position, body orientation and joint scatter summaries");
  cmd_stats->add_option("--input", sa.c.input, "Pose NDJSON")->required()->check(CLI::ExistingFile);
  cmd_stats->add_option("--camera", sa.c.camera, "Camera JSON used to project roots of frames without 2D")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_stats->add_option("--samples-csv", sa.samples_csv, "Also dump raw samples as CSV to this path (empty: no dump)")
      ->capture_default_str();
  add_output(cmd_stats, sa.c);
  add_skeleton(cmd_stats, sa.c);

  EvalArgs ea;
  auto* cmd_eval = app.add_subcommand("eval", "Root-relative MPJPE or P-MPJPE in mm between two pose files");
  cmd_eval->add_option("--pred", ea.pred, "Predicted poses (NDJSON)")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--gt", ea.gt, "Ground-truth poses (NDJSON), same sequences and frame order")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--metric", ea.metric, "mpjpe or pmpjpe (after per-frame similarity alignment)")
      ->check(CLI::IsMember({"mpjpe", "pmpjpe"}))
      ->capture_default_str();
  cmd_eval->add_flag("--back-transform", ea.back_transform,
                     "Predictions are canonical-frame; undo each frame's stored rotation before scoring");
  add_output(cmd_eval, ea.c);
  add_skeleton(cmd_eval, ea.c);

  SynthArgs ya;
  auto* cmd_synth = app.add_subcommand("synth", "Generate random camera-frame poses with their 2D projections");
  cmd_synth->add_option("--config", ya.config,
                        "JSON with any of seed, n_poses (1000), limb_scale (0.45 m), "
                        "root_region ({min:[-1,-0.5,3], max:[1,0.5,6]} m), min_joint_depth (0.1 m)");
  cmd_synth->add_option("--seed", ya.seed, "Overrides the config seed (default 0)");
  cmd_synth->add_option("--count", ya.count, "Overrides the config n_poses (default 1000)")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--camera", ya.c.camera,
                        "Camera JSON for the 2D projections (default: built-in 1000x1002 camera)");
  cmd_synth->add_option("--oracle-report", ya.oracle_report,
                        "Also write the 3D-path vs 2D-path consistency report (JSON) to this path");
  add_output(cmd_synth, ya.c);
  add_skeleton(cmd_synth, ya.c);
  add_threads(cmd_synth, ya.c);

  StudyArgs ta;
  auto* cmd_study =
      app.add_subcommand("study", "Linear lifting study: conventional vs canonical mapping under a root-position shift");
  cmd_study
      ->add_option("--config", ta.config,
                   "'default' or a JSON file with any of train_root_region, test_root_region (boxes in m), "
                   "noise_sigma (px), n_train, n_test, seed, ridge_lambda, limb_scale (m), camera")
      ->capture_default_str();
  cmd_study->add_option("--seed", ta.seed, "Overrides the config seed (default 0)");
  add_output(cmd_study, ta.c);
  add_skeleton(cmd_study, ta.c);
  add_threads(cmd_study, ta.c);

  WindowArgs wa;
  auto* cmd_win = app.add_subcommand("window", "List fixed-length windows of every sequence as NDJSON");
  cmd_win->add_option("--input", wa.c.input, "Pose NDJSON")->required()->check(CLI::ExistingFile);
  cmd_win->add_option("--window-length", wa.length, "Frames per window")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_win->add_option("--window-stride", wa.stride, "Frames between window starts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_win
      ->add_option("--pad", wa.pad, "Tail handling: drop the short last window or repeat-last frame to fill it")
      ->check(CLI::IsMember({"drop", "repeat-last"}))
      ->capture_default_str();
  add_output(cmd_win, wa.c);
  add_skeleton(cmd_win, wa.c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("validation", e.what());
    return kExitValidation;
  }

  // Validation: everything that can be checked without touching the data.
  std::function<void()> task;
  try {
    if (cmd_can->parsed()) {
      resolve_skeleton(ca.c.skeleton);
      task = [&] { canonicalize(ca); };
    } else if (cmd_stats->parsed()) {
      resolve_skeleton(sa.c.skeleton);
      task = [&] { stats(sa); };
    } else if (cmd_eval->parsed()) {
      resolve_skeleton(ea.c.skeleton);
      task = [&] { eval(ea); };
    } else if (cmd_synth->parsed()) {
      const Skeleton skel = resolve_skeleton(ya.c.skeleton);
      if (skel.rest_offsets.size() != skel.num_joints()) {
        throw ValidationError("synth: skeleton '" + skel.name + "' has no rest template");
      }
      SynthConfig cfg = synth_config(ya);
      try {
        cfg.validate();
      } catch (const InvariantError& e) {
        throw ValidationError(e.what());
      }
      task = [&, cfg] { synth(ya, cfg); };
    } else if (cmd_study->parsed()) {
      resolve_skeleton(ta.c.skeleton);
      const LiftingStudyConfig cfg = study_config(ta);
      task = [&, cfg] { study(ta, cfg); };
    } else {
      resolve_skeleton(wa.c.skeleton);
      try {
        WindowSpec{wa.length, wa.stride}.validate();
      } catch (const InvariantError& e) {
        throw ValidationError(e.what());
      }
      task = [&] { window_cmd(wa); };
    }
  } catch (const ValidationError& e) {
    emit_error("validation", e.what());
    return kExitValidation;
  } catch (const Json::exception& e) {
    emit_error("validation", std::string("config: ") + e.what());
    return kExitValidation;
  }

  try {
    task();
  } catch (const std::exception& e) {
    emit_error("data", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace canonpose::cli
