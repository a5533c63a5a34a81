#include "multilstm/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "multilstm/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature/checkpoint files assume a little-endian host");

namespace multilstm {

namespace fs = std::filesystem;
using nlohmann::json;

void VideoRecord::validate(int class_count) const {
  if (frames < 0) throw DataError(id + ": negative frame count");
  if (frame_rate <= 0.0) throw DataError(id + ": frame rate must be > 0");
  for (const LabelInterval& iv : intervals) {
    if (iv.class_id < 0 || iv.class_id >= class_count)
      throw DataError(id + ": interval class " + std::to_string(iv.class_id) +
                      " outside vocabulary of " + std::to_string(class_count));
    if (iv.start < 0 || iv.start >= iv.end || iv.end > frames)
      throw DataError(id + ": interval [" + std::to_string(iv.start) + "," +
                      std::to_string(iv.end) + ") invalid for " +
                      std::to_string(frames) + " frames");
  }
  if (has_features() && features.rows != frames)
    throw DataError(id + ": " + std::to_string(features.rows) +
                    " feature rows for " + std::to_string(frames) + " frames");
}

int Dataset::class_id(const std::string& name) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return static_cast<int>(i);
  return -1;
}

long Dataset::total_frames() const {
  long total = 0;
  for (const VideoRecord& v : videos) total += v.frames;
  return total;
}

Matrix rasterize(const std::vector<LabelInterval>& intervals, int frames,
                 int class_count) {
  Matrix labels(frames, class_count, 0.0);
  for (const LabelInterval& iv : intervals) {
    if (iv.class_id < 0 || iv.class_id >= class_count || iv.start < 0 ||
        iv.start >= iv.end || iv.end > frames)
      throw DataError("rasterize: interval (class " +
                      std::to_string(iv.class_id) + ", " +
                      std::to_string(iv.start) + ", " + std::to_string(iv.end) +
                      ") invalid for " + std::to_string(frames) + " frames, " +
                      std::to_string(class_count) + " classes");
    for (int t = iv.start; t < iv.end; ++t) labels(t, iv.class_id) = 1.0;
  }
  return labels;
}

void write_features(const fs::path& path, const Matrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write("DMF1", 4);
  const std::uint32_t rows = static_cast<std::uint32_t>(features.rows);
  const std::uint32_t cols = static_cast<std::uint32_t>(features.cols);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  std::vector<float> buffer(features.data.size());
  for (std::size_t i = 0; i < buffer.size(); ++i)
    buffer[i] = static_cast<float>(features.data[i]);
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  if (!out) throw DataError("short write to " + path.string());
}

Matrix read_features(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DMF1", 4) != 0)
    throw DataError(path.string() + ": not a DMF1 feature file");
  std::uint32_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in) throw DataError(path.string() + ": truncated header");
  Matrix features(static_cast<int>(rows), static_cast<int>(cols));
  std::vector<float> buffer(features.data.size());
  in.read(reinterpret_cast<char*>(buffer.data()),
          static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  if (!in) throw DataError(path.string() + ": truncated feature payload");
  for (std::size_t i = 0; i < buffer.size(); ++i)
    features.data[i] = static_cast<double>(buffer[i]);
  check_finite(features, path.string());
  return features;
}

void write_annotation(const fs::path& path, const VideoRecord& video,
                      const std::vector<std::string>& classes) {
  json doc;
  doc["video_id"] = video.id;
  doc["frames"] = video.frames;
  doc["frame_rate"] = video.frame_rate;
  doc["classes"] = classes;
  json intervals = json::array();
  for (const LabelInterval& iv : video.intervals) {
    json entry;
    entry["class"] = classes.at(iv.class_id);
    entry["start"] = iv.start;
    entry["end"] = iv.end;  // exclusive
    intervals.push_back(entry);
  }
  doc["intervals"] = intervals;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

VideoRecord read_annotation(const fs::path& path,
                            std::vector<std::string>& classes_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  VideoRecord video;
  try {
    video.id = doc.at("video_id").get<std::string>();
    video.frames = doc.at("frames").get<int>();
    video.frame_rate = doc.at("frame_rate").get<double>();
    classes_out = doc.at("classes").get<std::vector<std::string>>();
    for (const json& entry : doc.at("intervals")) {
      LabelInterval iv;
      const std::string name = entry.at("class").get<std::string>();
      const auto it = std::find(classes_out.begin(), classes_out.end(), name);
      if (it == classes_out.end())
        throw DataError(path.string() + ": interval class '" + name +
                        "' missing from vocabulary");
      iv.class_id = static_cast<int>(it - classes_out.begin());
      iv.start = entry.at("start").get<int>();
      iv.end = entry.at("end").get<int>();
      video.intervals.push_back(iv);
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  video.validate(static_cast<int>(classes_out.size()));
  return video;
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir / "annotations");
  bool any_features = false;
  for (const VideoRecord& v : dataset.videos) any_features |= v.has_features();
  if (any_features) fs::create_directories(dir / "features");
  for (const VideoRecord& v : dataset.videos) {
    write_annotation(dir / "annotations" / (v.id + ".json"), v, dataset.classes);
    if (v.has_features())
      write_features(dir / "features" / (v.id + ".dmf"), v.features);
  }
}

Dataset load_dataset(const fs::path& dir, bool require_features) {
  const fs::path ann_dir = dir / "annotations";
  if (!fs::is_directory(ann_dir))
    throw DataError("no annotations directory under " + dir.string());
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(ann_dir))
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw DataError("no annotation files in " + ann_dir.string());

  Dataset dataset;
  for (const fs::path& path : paths) {
    std::vector<std::string> classes;
    VideoRecord video = read_annotation(path, classes);
    if (dataset.videos.empty()) {
      dataset.classes = classes;
    } else if (classes != dataset.classes) {
      throw DataError(path.string() + ": vocabulary differs from " +
                      dataset.videos.front().id);
    }
    const fs::path feat = dir / "features" / (video.id + ".dmf");
    if (fs::exists(feat)) {
      video.features = read_features(feat);
      if (video.features.rows != video.frames)
        throw DataError(video.id + ": feature rows " +
                        std::to_string(video.features.rows) + " vs " +
                        std::to_string(video.frames) + " frames");
    } else if (require_features) {
      throw DataError("missing feature file " + feat.string());
    }
    dataset.videos.push_back(std::move(video));
  }
  return dataset;
}

}  // namespace multilstm
