#include "multilstm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multilstm/error.hpp"

namespace multilstm {

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const double> labels) {
  if (scores.size() != labels.size())
    throw ShapeError("average_precision: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(labels.size()) + " labels");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a] > scores[b];  // ties keep original index order
  });
  long positives = 0;
  double precision_sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0.0) {
      ++positives;
      precision_sum += static_cast<double>(positives) /
                       static_cast<double>(rank + 1);
    }
  }
  if (positives == 0) return std::nullopt;
  return precision_sum / static_cast<double>(positives);
}

ClassPools pool_by_class(const std::vector<EvalPair>& pairs, int offset,
                         int restrict_inactive_class) {
  if (pairs.empty()) throw ArgumentError("pool_by_class: no videos");
  const int classes = pairs[0].predictions->cols;
  ClassPools pools;
  pools.scores.resize(classes);
  pools.labels.resize(classes);
  for (const EvalPair& pair : pairs) {
    const Matrix& preds = *pair.predictions;
    const Matrix& labels = *pair.labels;
    if (preds.cols != classes || labels.cols != classes ||
        preds.rows != labels.rows)
      throw ShapeError("pool_by_class: predictions " + preds.shape_str() +
                       " vs labels " + labels.shape_str());
    for (int t = 0; t < preds.rows; ++t) {
      const int target = t + offset;
      if (target < 0 || target >= labels.rows) continue;
      if (restrict_inactive_class >= 0 &&
          labels(t, restrict_inactive_class) != 0.0)
        continue;
      for (int c = 0; c < classes; ++c) {
        pools.scores[c].push_back(preds(t, c));
        pools.labels[c].push_back(labels(target, c));
      }
    }
  }
  return pools;
}

MeanApResult mean_ap(const std::vector<EvalPair>& pairs, int offset) {
  const ClassPools pools = pool_by_class(pairs, offset);
  MeanApResult result;
  result.per_class.resize(pools.scores.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < pools.scores.size(); ++c) {
    result.per_class[c] = average_precision(pools.scores[c], pools.labels[c]);
    if (result.per_class[c]) {
      sum += *result.per_class[c];
      ++result.defined_classes;
    }
  }
  if (result.defined_classes > 0) result.map = sum / result.defined_classes;
  return result;
}

ClassLengthStats compute_length_stats(const Dataset& train) {
  const int classes = train.class_count();
  ClassLengthStats stats;
  stats.mean.assign(classes, 1.0);
  stats.stddev.assign(classes, 1.0);
  std::vector<std::vector<long>> lengths(classes);
  for (const VideoRecord& video : train.videos) {
    const Matrix labels = rasterize(video.intervals, video.frames, classes);
    for (int c = 0; c < classes; ++c) {
      long run = 0;
      for (int t = 0; t < video.frames; ++t) {
        if (labels(t, c) != 0.0) {
          ++run;
        } else if (run > 0) {
          lengths[c].push_back(run);
          run = 0;
        }
      }
      if (run > 0) lengths[c].push_back(run);
    }
  }
  for (int c = 0; c < classes; ++c) {
    if (lengths[c].empty()) continue;
    double mean = 0.0;
    for (long len : lengths[c]) mean += static_cast<double>(len);
    mean /= static_cast<double>(lengths[c].size());
    double var = 0.0;
    for (long len : lengths[c]) {
      const double d = static_cast<double>(len) - mean;
      var += d * d;
    }
    stats.mean[c] = mean;
    // sigma floor of one frame keeps the length penalty nonsingular for
    // classes whose training instances all share one length.
    stats.stddev[c] =
        std::max(1.0, std::sqrt(var / static_cast<double>(lengths[c].size())));
  }
  return stats;
}

std::vector<Detection> detect(std::span<const double> probs, double lambda,
                              double mu, double sigma, double alpha_det) {
  std::vector<Detection> detections;
  const int frames = static_cast<int>(probs.size());
  int t = 0;
  while (t < frames) {
    if (probs[t] < lambda) {
      ++t;
      continue;
    }
    const int start = t;
    double sum = 0.0;
    while (t < frames && probs[t] >= lambda) {
      sum += probs[t];
      ++t;
    }
    const int len = t - start;
    const double dev = static_cast<double>(len) - mu;
    Detection det;
    det.start = start;
    det.end = t;
    det.score = sum * std::exp(-alpha_det * dev * dev / (sigma * sigma));
    detections.push_back(det);
  }
  return detections;
}

std::vector<Detection> detect_video(const std::string& video_id,
                                    const Matrix& predictions, double lambda,
                                    const ClassLengthStats& stats,
                                    double alpha_det) {
  if (predictions.cols != static_cast<int>(stats.mean.size()))
    throw ShapeError("detect_video: " + std::to_string(predictions.cols) +
                     " classes vs stats for " +
                     std::to_string(stats.mean.size()));
  std::vector<Detection> all;
  Vec column(predictions.rows);
  for (int c = 0; c < predictions.cols; ++c) {
    for (int t = 0; t < predictions.rows; ++t) column[t] = predictions(t, c);
    std::vector<Detection> dets =
        detect(column, lambda, stats.mean[c], stats.stddev[c], alpha_det);
    for (Detection& d : dets) {
      d.video = video_id;
      d.class_id = c;
      all.push_back(std::move(d));
    }
  }
  return all;
}

double temporal_iou(int start_a, int end_a, int start_b, int end_b) {
  const int inter =
      std::max(0, std::min(end_a, end_b) - std::max(start_a, start_b));
  const int uni = (end_a - start_a) + (end_b - start_b) - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::optional<double> detection_ap(std::vector<Detection> detections,
                                   const std::vector<GtInstance>& truth,
                                   double iou_threshold) {
  if (iou_threshold <= 0.0 || iou_threshold > 1.0)
    throw ArgumentError("detection_ap: overlap threshold must be in (0,1]");
  if (truth.empty()) return std::nullopt;
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.video != b.video) return a.video < b.video;
                     return a.start < b.start;
                   });
  std::vector<bool> matched(truth.size(), false);
  long tp = 0;
  double precision_sum = 0.0;
  for (std::size_t rank = 0; rank < detections.size(); ++rank) {
    const Detection& det = detections[rank];
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (matched[g] || truth[g].video != det.video) continue;
      const double iou =
          temporal_iou(det.start, det.end, truth[g].start, truth[g].end);
      if (iou >= iou_threshold && iou > best_iou) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      matched[best] = true;
      ++tp;
      precision_sum += static_cast<double>(tp) / static_cast<double>(rank + 1);
    }
  }
  return precision_sum / static_cast<double>(truth.size());
}

std::vector<GtInstance> gt_instances(const Dataset& dataset, int class_id) {
  std::vector<GtInstance> instances;
  for (const VideoRecord& video : dataset.videos) {
    const Matrix labels =
        rasterize(video.intervals, video.frames, dataset.class_count());
    int run_start = -1;
    for (int t = 0; t <= video.frames; ++t) {
      const bool active = t < video.frames && labels(t, class_id) != 0.0;
      if (active && run_start < 0) run_start = t;
      if (!active && run_start >= 0) {
        instances.push_back({video.id, run_start, t});
        run_start = -1;
      }
    }
  }
  return instances;
}

Matrix offset_prior(const Dataset& train, int offset) {
  const int classes = train.class_count();
  Matrix joint(classes, classes, 0.0);
  Vec denom(classes, 0.0);
  for (const VideoRecord& video : train.videos) {
    const Matrix labels = rasterize(video.intervals, video.frames, classes);
    for (int t = 0; t < video.frames; ++t) {
      const int target = t + offset;
      if (target < 0 || target >= video.frames) continue;
      for (int a = 0; a < classes; ++a) {
        if (labels(t, a) == 0.0) continue;
        denom[a] += 1.0;
        for (int b = 0; b < classes; ++b)
          if (labels(target, b) != 0.0) joint(a, b) += 1.0;
      }
    }
  }
  for (int a = 0; a < classes; ++a)
    if (denom[a] > 0.0)
      for (int b = 0; b < classes; ++b) joint(a, b) /= denom[a];
  return joint;
}

Matrix prior_predictions(const Matrix& predictions, const Matrix& prior) {
  if (prior.rows != predictions.cols || prior.cols != predictions.cols)
    throw ShapeError("prior_predictions: prior " + prior.shape_str() +
                     " vs predictions " + predictions.shape_str());
  Matrix out(predictions.rows, predictions.cols, 0.0);
  for (int t = 0; t < predictions.rows; ++t) {
    for (int b = 0; b < predictions.cols; ++b) {
      double acc = 0.0;
      for (int a = 0; a < predictions.cols; ++a)
        acc += prior(a, b) * predictions(t, a);
      out(t, b) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace multilstm
