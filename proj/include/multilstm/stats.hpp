#pragma once

#include <filesystem>
#include <vector>

#include "multilstm/dataset.hpp"

namespace multilstm {

// An instance is a maximal run of consecutive positive frames for one class,
// counted on the rasterized labels (so abutting or overlapping intervals of
// one class merge before counting).
struct ClassStats {
  long instances = 0;
  long frames = 0;
  double seconds = 0.0;
  double mean_instance_frames = 0.0;
  double mean_instance_seconds = 0.0;
  double stddev_instance_frames = 0.0;  // population std over instance lengths
};

struct DatasetStats {
  std::vector<long> labels_per_frame_hist;    // index = labels on a frame
  std::vector<long> classes_per_video_hist;   // index = distinct classes
  std::vector<ClassStats> per_class;
  double mean_labels_per_frame = 0.0;
  double mean_classes_per_video = 0.0;
  int max_labels_per_frame = 0;
  int max_classes_per_video = 0;
  long total_frames = 0;
  int video_count = 0;
};

DatasetStats dataset_stats(const Dataset& dataset);

// CSV tables: summary.csv, labels_per_frame_hist.csv,
// classes_per_video_hist.csv, per_class.csv.
void write_stats_csv(const DatasetStats& stats,
                     const std::vector<std::string>& classes,
                     const std::filesystem::path& dir);

}  // namespace multilstm
