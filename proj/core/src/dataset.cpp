#include "canonpose/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "canonpose/parallel.hpp"

namespace canonpose {

using nlohmann::json;

Eigen::Index PoseSequence::num_joints() const {
  for (const auto& f : frames) {
    if (f.pose_3d) return f.pose_3d->num_joints();
    if (f.pose_2d) return f.pose_2d->num_joints();
  }
  return 0;
}

void WindowSpec::validate() const {
  if (length < 1) throw InvariantError("window length must be >= 1");
  if (stride < 1) throw InvariantError("window stride must be >= 1");
}

std::vector<SequenceWindow> window(const PoseSequence& seq, const WindowSpec& spec, PadPolicy pad) {
  spec.validate();
  const std::size_t n = seq.frames.size();
  std::vector<SequenceWindow> out;
  if (n == 0) return out;

  std::size_t start = 0;
  for (; start + spec.length <= n; start += spec.stride) {
    SequenceWindow w{start, 0, {}};
    w.source_frames.reserve(spec.length);
    for (std::size_t i = 0; i < spec.length; ++i) w.source_frames.push_back(start + i);
    out.push_back(std::move(w));
  }
  // `start` is now the first offset whose window would overrun the sequence.
  const std::size_t covered = out.empty() ? 0 : out.back().start + spec.length;
  if (pad == PadPolicy::RepeatLast && start < n && covered < n) {
    SequenceWindow w{start, spec.length - (n - start), {}};
    w.source_frames.reserve(spec.length);
    for (std::size_t i = 0; i < spec.length; ++i) w.source_frames.push_back(std::min(start + i, n - 1));
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<FrameRecord> materialize(const PoseSequence& seq, const SequenceWindow& w) {
  std::vector<FrameRecord> frames;
  frames.reserve(w.source_frames.size());
  for (std::size_t idx : w.source_frames) frames.push_back(seq.frames.at(idx));
  return frames;
}

std::string format_number(double value) {
  if (value == 0.0) return std::signbit(value) ? "-0.0" : "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

Frame parse_frame_tag(const std::string& tag, std::size_t line) {
  if (tag == "camera") return Frame::Camera;
  if (tag == "global") return Frame::Global;
  if (tag == "canonical-camera") return Frame::CanonicalCamera;
  throw ParseError("unknown frame_3d '" + tag + "'", line);
}

template <int Cols>
Eigen::Matrix<double, Eigen::Dynamic, Cols, Eigen::RowMajor> parse_joints(const json& arr, const char* key,
                                                                          std::size_t line) {
  if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array or null", line);
  Eigen::Matrix<double, Eigen::Dynamic, Cols, Eigen::RowMajor> m(static_cast<Eigen::Index>(arr.size()), Cols);
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const auto& row = arr[j];
    if (!row.is_array() || row.size() != Cols) {
      throw ParseError(std::string("'") + key + "' joint " + std::to_string(j) + " must have " +
                           std::to_string(Cols) + " numbers",
                       line);
    }
    for (int c = 0; c < Cols; ++c) {
      if (!row[c].is_number()) throw ParseError(std::string("'") + key + "' holds a non-number", line);
      m(static_cast<Eigen::Index>(j), c) = row[c].get<double>();
    }
  }
  return m;
}

const std::string& require_string(const json& rec, const char* key, std::size_t line) {
  if (!rec.contains(key) || !rec.at(key).is_string()) {
    throw ParseError(std::string("missing string key '") + key + "'", line);
  }
  return rec.at(key).get_ref<const std::string&>();
}

bool present(const json& rec, const char* key) { return rec.contains(key) && !rec.at(key).is_null(); }

FileMeta parse_meta(const json& meta, const Skeleton& skeleton, std::size_t line) {
  if (!meta.is_object()) throw ParseError("'meta' must be an object", line);
  FileMeta fm;
  fm.skeleton = skeleton.name;
  if (present(meta, "skeleton")) {
    if (!meta.at("skeleton").is_string()) throw ParseError("'meta.skeleton' must be a string", line);
    fm.skeleton = meta.at("skeleton").get<std::string>();
    if (fm.skeleton != skeleton.name) {
      throw SchemaError("line " + std::to_string(line) + ": file declares skeleton '" + fm.skeleton +
                        "' but '" + skeleton.name + "' was requested");
    }
  }
  if (present(meta, "unit_scale")) {
    if (!meta.at("unit_scale").is_number()) throw ParseError("'meta.unit_scale' must be a number", line);
    fm.unit_scale = meta.at("unit_scale").get<double>();
    if (!(fm.unit_scale > 0.0) || !std::isfinite(fm.unit_scale)) {
      throw ParseError("'meta.unit_scale' must be positive", line);
    }
  }
  if (present(meta, "fps")) {
    if (!meta.at("fps").is_number()) throw ParseError("'meta.fps' must be a number", line);
    fm.fps = meta.at("fps").get<double>();
    if (!(fm.fps > 0.0) || !std::isfinite(fm.fps)) throw ParseError("'meta.fps' must be positive", line);
  }
  return fm;
}

FrameRecord parse_record(const json& rec, const FileMeta& meta, const Skeleton& skeleton, std::size_t line) {
  FrameRecord fr;
  if (!rec.contains("frame") || !rec.at("frame").is_number_integer()) {
    throw ParseError("missing integer key 'frame'", line);
  }
  fr.frame_index = rec.at("frame").get<std::int64_t>();
  const auto expected = static_cast<Eigen::Index>(skeleton.num_joints());

  try {
    if (present(rec, "joints_2d")) {
      Joints2 j2 = parse_joints<2>(rec.at("joints_2d"), "joints_2d", line);
      if (j2.rows() != expected) {
        throw SchemaError("line " + std::to_string(line) + ": joints_2d has " + std::to_string(j2.rows()) +
                          " joints, skeleton '" + skeleton.name + "' has " + std::to_string(expected));
      }
      fr.pose_2d.emplace(std::move(j2), Space::Image);
    }
    if (present(rec, "joints_3d")) {
      Joints3 j3 = parse_joints<3>(rec.at("joints_3d"), "joints_3d", line);
      if (j3.rows() != expected) {
        throw SchemaError("line " + std::to_string(line) + ": joints_3d has " + std::to_string(j3.rows()) +
                          " joints, skeleton '" + skeleton.name + "' has " + std::to_string(expected));
      }
      Frame tag = Frame::Camera;
      if (present(rec, "frame_3d")) {
        if (!rec.at("frame_3d").is_string()) throw ParseError("'frame_3d' must be a string", line);
        tag = parse_frame_tag(rec.at("frame_3d").get<std::string>(), line);
      }
      if (meta.unit_scale != 1.0) j3 *= meta.unit_scale;
      fr.pose_3d.emplace(std::move(j3), tag);
    }
  } catch (const InvariantError& e) {
    throw ParseError(e.what(), line);
  }
  if (!fr.pose_2d && !fr.pose_3d) throw ParseError("record has neither joints_2d nor joints_3d", line);

  if (present(rec, "rotation")) {
    const auto& r = rec.at("rotation");
    if (!r.is_array() || r.size() != 9) throw ParseError("'rotation' must hold 9 numbers", line);
    Mat3 m;
    for (int i = 0; i < 9; ++i) {
      if (!r[i].is_number()) throw ParseError("'rotation' holds a non-number", line);
      m(i / 3, i % 3) = r[i].get<double>();
    }
    fr.rotation = CanonicalRotation::from_matrix(m);
  }
  if (present(rec, "root_depth")) {
    if (!rec.at("root_depth").is_number()) throw ParseError("'root_depth' must be a number", line);
    fr.root_depth = rec.at("root_depth").get<double>() * meta.unit_scale;
  }
  return fr;
}

}  // namespace

std::vector<PoseSequence> read_sequences(std::istream& in, const Skeleton& skeleton) {
  FileMeta meta;
  meta.skeleton = skeleton.name;
  std::vector<PoseSequence> sequences;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;

  std::string text;
  std::size_t line = 0;
  bool seen_content = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!rec.is_object()) throw ParseError("record must be a JSON object", line);
    if (rec.contains("meta")) {
      if (seen_content) throw ParseError("'meta' header must be the first record", line);
      meta = parse_meta(rec.at("meta"), skeleton, line);
      seen_content = true;
      continue;
    }
    seen_content = true;

    auto key = std::make_tuple(require_string(rec, "subject", line), require_string(rec, "action", line),
                               require_string(rec, "camera", line));
    FrameRecord fr = parse_record(rec, meta, skeleton, line);
    auto [it, inserted] = index.try_emplace(key, sequences.size());
    if (inserted) {
      PoseSequence seq;
      std::tie(seq.subject, seq.action, seq.camera_id) = key;
      seq.fps = meta.fps;
      sequences.push_back(std::move(seq));
    }
    sequences[it->second].frames.push_back(std::move(fr));
  }
  if (in.bad()) throw IoError("read failure after line " + std::to_string(line));
  return sequences;
}

std::vector<PoseSequence> load_sequences(const std::filesystem::path& path, const Skeleton& skeleton) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_sequences(in, skeleton);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

namespace {

template <class Matrix>
void write_joints(std::ostream& out, const Matrix& m) {
  out << '[';
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    if (j) out << ',';
    out << '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_number(m(j, c));
    }
    out << ']';
  }
  out << ']';
}

}  // namespace

void write_sequences(std::ostream& out, const std::vector<PoseSequence>& sequences, const Skeleton& skeleton) {
  if (sequences.empty()) return;
  const double fps = sequences.front().fps;
  for (const auto& seq : sequences) {
    if (seq.fps != fps) throw SchemaError("cannot save sequences with different frame rates into one file");
  }
  out << R"({"meta":{"skeleton":)" << json(skeleton.name).dump() << R"(,"unit_scale":1,"fps":)"
      << format_number(fps) << "}}\n";

  for (const auto& seq : sequences) {
    const std::string prefix = R"({"subject":)" + json(seq.subject).dump() + R"(,"action":)" +
                               json(seq.action).dump() + R"(,"camera":)" + json(seq.camera_id).dump();
    for (const auto& f : seq.frames) {
      out << prefix << R"(,"frame":)" << f.frame_index << R"(,"joints_2d":)";
      if (f.pose_2d) {
        write_joints(out, f.pose_2d->joints());
      } else {
        out << "null";
      }
      out << R"(,"joints_3d":)";
      if (f.pose_3d) {
        write_joints(out, f.pose_3d->joints());
        out << R"(,"frame_3d":")" << to_string(f.pose_3d->frame()) << '"';
      } else {
        out << "null";
      }
      if (f.rotation) {
        out << R"(,"rotation":[)";
        for (int i = 0; i < 9; ++i) {
          if (i) out << ',';
          out << format_number(f.rotation->matrix()(i / 3, i % 3));
        }
        out << ']';
      }
      if (f.root_depth) out << R"(,"root_depth":)" << format_number(*f.root_depth);
      out << "}\n";
    }
  }
}

void save_sequences(const std::vector<PoseSequence>& sequences, const std::filesystem::path& path,
                    const Skeleton& skeleton) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_sequences(out, sequences, skeleton);
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

namespace {

FrameRecord canonicalize_frame(const FrameRecord& in, const CameraIntrinsics& k, CanonicalMode mode,
                               const Skeleton& skeleton) {
  FrameRecord out;
  out.frame_index = in.frame_index;
  if (mode == CanonicalMode::ThreeD) {
    if (!in.pose_3d) throw SchemaError("frame has no 3D pose (required by the 3d path)");
    CanonicalRecord rec = make_canonical_record(*in.pose_3d, k, skeleton);
    out.pose_3d = std::move(rec.canonical_3d);
    out.pose_2d = std::move(rec.canonical_2d);
    out.rotation = std::move(rec.rotation);
    out.root_depth = rec.root_depth;
  } else {
    if (!in.pose_2d) throw SchemaError("frame has no 2D pose (required by the 2d path)");
    Canonical2D c2 = canonicalize_2d(*in.pose_2d, k, skeleton);
    out.pose_2d = std::move(c2.pose);
    out.rotation = std::move(c2.rotation);
    out.pose_3d = in.pose_3d;
    if (in.pose_3d && in.pose_3d->frame() == Frame::Camera) {
      out.root_depth = in.pose_3d->joint(static_cast<Eigen::Index>(skeleton.root_index)).norm();
    }
  }
  return out;
}

}  // namespace

DatasetCanonicalization canonicalize_dataset(const std::vector<PoseSequence>& sequences, const CameraIntrinsics& k,
                                             CanonicalMode mode, const Skeleton& skeleton, unsigned threads) {
  k.validate();
  std::vector<std::optional<PoseSequence>> results(sequences.size());
  std::vector<SequenceFailure> failures(sequences.size());

  parallel_for(sequences.size(), threads, [&](std::size_t s) {
    const PoseSequence& in = sequences[s];
    PoseSequence out{in.subject, in.action, in.camera_id, in.fps, {}};
    out.frames.reserve(in.frames.size());
    SequenceFailure& fail = failures[s];
    for (std::size_t f = 0; f < in.frames.size(); ++f) {
      try {
        out.frames.push_back(canonicalize_frame(in.frames[f], k, mode, skeleton));
      } catch (const Error& e) {
        fail.frames.push_back({f, in.frames[f].frame_index, e.what()});
      }
    }
    if (fail.frames.empty()) {
      results[s] = std::move(out);
    } else {
      fail.sequence_index = s;
      fail.subject = in.subject;
      fail.action = in.action;
      fail.camera_id = in.camera_id;
    }
  });

  DatasetCanonicalization report;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (results[s]) {
      report.sequences.push_back(std::move(*results[s]));
    } else {
      report.failures.push_back(std::move(failures[s]));
    }
  }
  return report;
}

}  // namespace canonpose
