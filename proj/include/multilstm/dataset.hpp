#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "multilstm/matrix.hpp"

namespace multilstm {

// Half-open labeled segment: frames [start, end) carry class_id.
struct LabelInterval {
  int class_id = 0;
  int start = 0;  // inclusive
  int end = 0;    // exclusive
};

struct VideoRecord {
  std::string id;
  int frames = 0;
  double frame_rate = 10.0;
  Matrix features;  // T x D, rows == 0 when features are absent
  std::vector<LabelInterval> intervals;

  bool has_features() const { return features.rows > 0; }
  void validate(int class_count) const;
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<VideoRecord> videos;

  int class_count() const { return static_cast<int>(classes.size()); }
  int class_id(const std::string& name) const;  // -1 when unknown
  long total_frames() const;
};

// T x C binary matrix with entry (t,c) = 1 iff some interval of class c
// covers frame t. Overlapping intervals of one class merge idempotently.
Matrix rasterize(const std::vector<LabelInterval>& intervals, int frames,
                 int class_count);

// Feature file, bit-exact layout: magic "DMF1", uint32-le rows, uint32-le
// cols, then rows*cols float32-le values row-major. Values are widened to
// doubles on load.
void write_features(const std::filesystem::path& path, const Matrix& features);
Matrix read_features(const std::filesystem::path& path);

// Annotation document (JSON): video id, frame count, frame rate, the class
// vocabulary, and (class name, start, end) interval triples, end exclusive.
void write_annotation(const std::filesystem::path& path, const VideoRecord& video,
                      const std::vector<std::string>& classes);
VideoRecord read_annotation(const std::filesystem::path& path,
                            std::vector<std::string>& classes_out);

// Dataset directory: <dir>/annotations/*.json plus optional
// <dir>/features/<video>.dmf. Videos are loaded in sorted filename order and
// every annotation must carry the same vocabulary.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir, bool require_features);

}  // namespace multilstm
