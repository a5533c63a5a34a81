#pragma once

#include <string>
#include <vector>

#include "multilstm/matrix.hpp"

namespace multilstm {

struct VideoPredictions {
  std::string video;
  const Matrix* probs;  // T x C
};

// "A then B within g frames". Candidates (tA, tB) with 0 < tB - tA <= gap
// are scored p[tA][A] * p[tB][B]; after a pair is selected, candidates whose
// endpoints fall within `gap` frames of it (same video) are suppressed so the
// top-k is not k near-duplicates of one event.
struct SequentialQuery {
  int first_class = 0;
  int second_class = 0;
  int max_gap = 1;
  int top_k = 1;
  bool suppress = true;
};

struct SequentialHit {
  std::string video;
  int t_first = 0;
  int t_second = 0;
  double score = 0.0;
};

std::vector<SequentialHit> retrieve_sequential(
    const std::vector<VideoPredictions>& predictions,
    const SequentialQuery& query);

struct CooccurrenceHit {
  std::string video;
  int frame = 0;
  double score = 0.0;
};

// Frames ranked by p[t][A] * p[t][B].
std::vector<CooccurrenceHit> retrieve_cooccurring(
    const std::vector<VideoPredictions>& predictions, int class_a, int class_b,
    int top_k);

// Pointwise mutual information over per-frame label pairs with add-one frame
// smoothing: entry (a,b) = log[(n_ab+1)(F+1) / ((n_a+1)(n_b+1))]. Symmetric,
// finite everywhere, near zero for independent classes.
Matrix cooccurrence_pmi(const std::vector<const Matrix*>& labels);

}  // namespace multilstm
