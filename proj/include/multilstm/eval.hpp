#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multilstm/dataset.hpp"
#include "multilstm/matrix.hpp"

namespace multilstm {

// Frame-level AP: sort frames by descending score (ties broken by original
// index so results are deterministic), then average the precision at each
// positive's rank. Returns nullopt when there are no positives (the caller
// skips the class with a warning).
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const double> labels);

// Per-class pooled score/label arrays for frame-level evaluation. For a
// model trained with offset s, prediction row t is scored against label row
// t+s and out-of-range rows are dropped. `restrict_inactive_class`, when
// >= 0, keeps only frames where that class is inactive at time t (used to
// measure onset prediction on pre-event frames).
struct EvalPair {
  const Matrix* predictions;  // T x C probabilities
  const Matrix* labels;       // T x C binary
};

struct ClassPools {
  std::vector<Vec> scores;  // per class
  std::vector<Vec> labels;
};

ClassPools pool_by_class(const std::vector<EvalPair>& pairs, int offset,
                         int restrict_inactive_class = -1);

struct MeanApResult {
  double map = 0.0;
  std::vector<std::optional<double>> per_class;
  int defined_classes = 0;
};

// Unweighted mean over classes with at least one positive.
MeanApResult mean_ap(const std::vector<EvalPair>& pairs, int offset = 0);

// Detection post-processing: maximal runs of frames with p >= lambda become
// detections scored (sum p) * exp(-alpha (L - mu)^2 / sigma^2).
struct Detection {
  std::string video;
  int class_id = 0;
  int start = 0;  // inclusive
  int end = 0;    // exclusive
  double score = 0.0;
};

struct ClassLengthStats {
  Vec mean;    // mu(C), frames; >= 1
  Vec stddev;  // sigma(C), floored at 1 frame
};

// mu/sigma of instance lengths on a training set; classes with no instances
// get mu = sigma = 1.
ClassLengthStats compute_length_stats(const Dataset& train);

std::vector<Detection> detect(std::span<const double> probs, double lambda,
                              double mu, double sigma, double alpha_det);

// All detections for one video across classes.
std::vector<Detection> detect_video(const std::string& video_id,
                                    const Matrix& predictions, double lambda,
                                    const ClassLengthStats& stats,
                                    double alpha_det);

// Greedy matching by descending score against ground-truth instances at
// temporal IoU >= threshold; AP over the resulting TP/FP ranking with the
// instance count as the positive total.
struct GtInstance {
  std::string video;
  int start = 0;
  int end = 0;
};

double temporal_iou(int start_a, int end_a, int start_b, int end_b);
std::optional<double> detection_ap(std::vector<Detection> detections,
                                   const std::vector<GtInstance>& truth,
                                   double iou_threshold);

// Ground-truth instances (maximal runs) for one class over a dataset.
std::vector<GtInstance> gt_instances(const Dataset& dataset, int class_id);

// P(class b active at t+offset | class a active at t) from training labels;
// entry (a, b) of the result.
Matrix offset_prior(const Dataset& train, int offset);

// Label-distribution baseline: prediction for class b at t+offset is
// sum_a P(b | a, offset) * p_t[a], clipped to [0,1]. Row t of the output is
// aligned like an offset model's row t (a prediction about frame t+offset).
Matrix prior_predictions(const Matrix& predictions, const Matrix& prior);

}  // namespace multilstm
