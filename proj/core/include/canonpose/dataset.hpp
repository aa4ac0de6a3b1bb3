#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "canonpose/camera.hpp"
#include "canonpose/canonical.hpp"
#include "canonpose/skeleton.hpp"

namespace canonpose {

/// One frame of a sequence. Canonicalized frames also carry the rotation (and, when
/// known, the root depth) needed to back-transform predictions.
struct FrameRecord {
  std::int64_t frame_index = 0;
  std::optional<Pose2D> pose_2d;
  std::optional<Pose3D> pose_3d;
  std::optional<CanonicalRotation> rotation;
  std::optional<double> root_depth;
};

struct PoseSequence {
  std::string subject;
  std::string action;
  std::string camera_id;
  double fps = 50.0;
  std::vector<FrameRecord> frames;

  /// Joint count shared by all frames (0 if there are none).
  Eigen::Index num_joints() const;
};

struct WindowSpec {
  std::size_t length = 243;
  std::size_t stride = 81;

  void validate() const;
};

enum class PadPolicy { Drop, RepeatLast };

struct SequenceWindow {
  std::size_t start = 0;
  std::size_t padded_frames = 0;  ///< trailing copies of the last real frame
  std::vector<std::size_t> source_frames;  ///< index into the sequence for each of the `length` slots
};

/// Fixed-length windows starting at 0, stride, 2*stride, ... that fit inside the sequence.
/// If frames remain past the end of the last full window and the next stride offset is
/// inside the sequence, one more window starts there and is either dropped or padded by
/// repeating the final frame.
std::vector<SequenceWindow> window(const PoseSequence& seq, const WindowSpec& spec, PadPolicy pad);

/// Frames of one window, padding included.
std::vector<FrameRecord> materialize(const PoseSequence& seq, const SequenceWindow& w);

/// File-level header: `{"meta": {"skeleton": str, "unit_scale": number, "fps": number}}`.
struct FileMeta {
  std::string skeleton;
  double unit_scale = 1.0;  ///< multiplies 3D coordinates to obtain meters
  double fps = 50.0;
};

std::vector<PoseSequence> read_sequences(std::istream& in, const Skeleton& skeleton);
std::vector<PoseSequence> load_sequences(const std::filesystem::path& path, const Skeleton& skeleton);

/// One record per frame, fixed key order, %.17g numbers. All sequences must share one fps.
void write_sequences(std::ostream& out, const std::vector<PoseSequence>& sequences, const Skeleton& skeleton);
void save_sequences(const std::vector<PoseSequence>& sequences, const std::filesystem::path& path,
                    const Skeleton& skeleton);

/// Formats a double with 17 significant digits; round-trips exactly through strtod.
std::string format_number(double value);

enum class CanonicalMode { ThreeD, TwoD };

struct FrameFailure {
  std::size_t frame_position = 0;  ///< position within the sequence's frame list
  std::int64_t frame_index = 0;
  std::string message;
};

struct SequenceFailure {
  std::size_t sequence_index = 0;
  std::string subject;
  std::string action;
  std::string camera_id;
  std::vector<FrameFailure> frames;
};

struct DatasetCanonicalization {
  std::vector<PoseSequence> sequences;  ///< successfully canonicalized, input order
  std::vector<SequenceFailure> failures;

  bool ok() const noexcept { return failures.empty(); }
};

/// Per-frame canonicalization of every sequence.
///
/// ThreeD: needs camera-frame 3D; emits canonical 3D, centered canonical 2D, rotation and depth.
/// TwoD: needs image-space 2D; emits canonical 2D and rotation, passing any 3D through untouched.
/// A sequence with any failing frame is left out entirely and all its bad frames are reported.
DatasetCanonicalization canonicalize_dataset(const std::vector<PoseSequence>& sequences, const CameraIntrinsics& k,
                                             CanonicalMode mode, const Skeleton& skeleton, unsigned threads = 0);

}  // namespace canonpose
