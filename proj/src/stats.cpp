#include "multilstm/stats.hpp"

#include <cmath>
#include <fstream>

#include "multilstm/checkpoint.hpp"
#include "multilstm/error.hpp"

namespace multilstm {

DatasetStats dataset_stats(const Dataset& dataset) {
  if (dataset.videos.empty()) throw ArgumentError("dataset_stats: empty dataset");
  const int classes = dataset.class_count();
  DatasetStats stats;
  stats.video_count = static_cast<int>(dataset.videos.size());
  stats.per_class.resize(classes);

  std::vector<std::vector<long>> lengths(classes);  // instance lengths, frames
  std::vector<std::vector<double>> lengths_sec(classes);
  long label_total = 0;
  long class_video_total = 0;

  for (const VideoRecord& video : dataset.videos) {
    video.validate(classes);
    const Matrix labels = rasterize(video.intervals, video.frames, classes);
    stats.total_frames += video.frames;

    for (int t = 0; t < video.frames; ++t) {
      int active = 0;
      for (int c = 0; c < classes; ++c) active += labels(t, c) != 0.0 ? 1 : 0;
      if (active >= static_cast<int>(stats.labels_per_frame_hist.size()))
        stats.labels_per_frame_hist.resize(active + 1, 0);
      stats.labels_per_frame_hist[active] += 1;
      stats.max_labels_per_frame = std::max(stats.max_labels_per_frame, active);
      label_total += active;
    }

    int distinct = 0;
    for (int c = 0; c < classes; ++c) {
      long run = 0;
      bool seen = false;
      for (int t = 0; t < video.frames; ++t) {
        if (labels(t, c) != 0.0) {
          ++run;
          seen = true;
        } else if (run > 0) {
          lengths[c].push_back(run);
          lengths_sec[c].push_back(run / video.frame_rate);
          run = 0;
        }
      }
      if (run > 0) {
        lengths[c].push_back(run);
        lengths_sec[c].push_back(run / video.frame_rate);
      }
      if (seen) ++distinct;
    }
    class_video_total += distinct;
    if (distinct >= static_cast<int>(stats.classes_per_video_hist.size()))
      stats.classes_per_video_hist.resize(distinct + 1, 0);
    stats.classes_per_video_hist[distinct] += 1;
    stats.max_classes_per_video = std::max(stats.max_classes_per_video, distinct);
  }

  for (int c = 0; c < classes; ++c) {
    ClassStats& cs = stats.per_class[c];
    cs.instances = static_cast<long>(lengths[c].size());
    for (std::size_t i = 0; i < lengths[c].size(); ++i) {
      cs.frames += lengths[c][i];
      cs.seconds += lengths_sec[c][i];
    }
    if (cs.instances > 0) {
      cs.mean_instance_frames =
          static_cast<double>(cs.frames) / static_cast<double>(cs.instances);
      cs.mean_instance_seconds = cs.seconds / static_cast<double>(cs.instances);
      double var = 0.0;
      for (long len : lengths[c]) {
        const double d = static_cast<double>(len) - cs.mean_instance_frames;
        var += d * d;
      }
      cs.stddev_instance_frames =
          std::sqrt(var / static_cast<double>(cs.instances));
    }
  }

  stats.mean_labels_per_frame =
      stats.total_frames > 0
          ? static_cast<double>(label_total) / static_cast<double>(stats.total_frames)
          : 0.0;
  stats.mean_classes_per_video =
      static_cast<double>(class_video_total) / stats.video_count;
  return stats;
}

void write_stats_csv(const DatasetStats& stats,
                     const std::vector<std::string>& classes,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.csv");
    out << "metric,value\n";
    out << "videos," << stats.video_count << "\n";
    out << "total_frames," << stats.total_frames << "\n";
    out << "mean_labels_per_frame," << format_double(stats.mean_labels_per_frame)
        << "\n";
    out << "mean_classes_per_video,"
        << format_double(stats.mean_classes_per_video) << "\n";
    out << "max_labels_per_frame," << stats.max_labels_per_frame << "\n";
    out << "max_classes_per_video," << stats.max_classes_per_video << "\n";
  }
  {
    std::ofstream out(dir / "labels_per_frame_hist.csv");
    out << "labels,frames\n";
    for (std::size_t k = 0; k < stats.labels_per_frame_hist.size(); ++k)
      out << k << "," << stats.labels_per_frame_hist[k] << "\n";
  }
  {
    std::ofstream out(dir / "classes_per_video_hist.csv");
    out << "classes,videos\n";
    for (std::size_t k = 0; k < stats.classes_per_video_hist.size(); ++k)
      out << k << "," << stats.classes_per_video_hist[k] << "\n";
  }
  {
    std::ofstream out(dir / "per_class.csv");
    out << "class,instances,frames,seconds,mean_instance_frames,"
           "mean_instance_seconds,stddev_instance_frames\n";
    for (std::size_t c = 0; c < stats.per_class.size(); ++c) {
      const ClassStats& cs = stats.per_class[c];
      out << classes[c] << "," << cs.instances << "," << cs.frames << ","
          << format_double(cs.seconds) << ","
          << format_double(cs.mean_instance_frames) << ","
          << format_double(cs.mean_instance_seconds) << ","
          << format_double(cs.stddev_instance_frames) << "\n";
    }
  }
}

}  // namespace multilstm
