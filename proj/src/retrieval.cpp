#include "multilstm/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

std::vector<SequentialHit> retrieve_sequential(
    const std::vector<VideoPredictions>& predictions,
    const SequentialQuery& query) {
  if (query.max_gap < 0) throw ArgumentError("retrieve_sequential: gap < 0");
  if (query.top_k < 1) throw ArgumentError("retrieve_sequential: top_k < 1");

  std::vector<SequentialHit> candidates;
  for (const VideoPredictions& vp : predictions) {
    const Matrix& p = *vp.probs;
    if (query.first_class < 0 || query.first_class >= p.cols ||
        query.second_class < 0 || query.second_class >= p.cols)
      throw ArgumentError("retrieve_sequential: class id outside vocabulary");
    for (int ta = 0; ta < p.rows; ++ta) {
      const double pa = p(ta, query.first_class);
      if (pa == 0.0) continue;
      const int last = std::min(p.rows - 1, ta + query.max_gap);
      for (int tb = ta + 1; tb <= last; ++tb) {
        const double score = pa * p(tb, query.second_class);
        if (score > 0.0) candidates.push_back({vp.video, ta, tb, score});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SequentialHit& a, const SequentialHit& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.video != b.video) return a.video < b.video;
                     if (a.t_first != b.t_first) return a.t_first < b.t_first;
                     return a.t_second < b.t_second;
                   });

  std::vector<SequentialHit> selected;
  for (const SequentialHit& hit : candidates) {
    if (static_cast<int>(selected.size()) >= query.top_k) break;
    if (query.suppress) {
      bool duplicate = false;
      for (const SequentialHit& kept : selected) {
        if (kept.video != hit.video) continue;
        if (std::abs(kept.t_first - hit.t_first) <= query.max_gap ||
            std::abs(kept.t_second - hit.t_second) <= query.max_gap) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
    }
    selected.push_back(hit);
  }
  return selected;
}

std::vector<CooccurrenceHit> retrieve_cooccurring(
    const std::vector<VideoPredictions>& predictions, int class_a, int class_b,
    int top_k) {
  if (top_k < 1) throw ArgumentError("retrieve_cooccurring: top_k < 1");
  std::vector<CooccurrenceHit> hits;
  for (const VideoPredictions& vp : predictions) {
    const Matrix& p = *vp.probs;
    if (class_a < 0 || class_a >= p.cols || class_b < 0 || class_b >= p.cols)
      throw ArgumentError("retrieve_cooccurring: class id outside vocabulary");
    for (int t = 0; t < p.rows; ++t)
      hits.push_back({vp.video, t, p(t, class_a) * p(t, class_b)});
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const CooccurrenceHit& a, const CooccurrenceHit& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.video != b.video) return a.video < b.video;
                     return a.frame < b.frame;
                   });
  if (static_cast<int>(hits.size()) > top_k) hits.resize(top_k);
  return hits;
}

Matrix cooccurrence_pmi(const std::vector<const Matrix*>& labels) {
  if (labels.empty()) throw ArgumentError("cooccurrence_pmi: no labels");
  const int classes = labels[0]->cols;
  Matrix joint(classes, classes, 0.0);
  Vec marginal(classes, 0.0);
  double frames = 0.0;
  for (const Matrix* m : labels) {
    if (m->cols != classes)
      throw ShapeError("cooccurrence_pmi: label matrices disagree on classes");
    for (int t = 0; t < m->rows; ++t) {
      frames += 1.0;
      for (int a = 0; a < classes; ++a) {
        if ((*m)(t, a) == 0.0) continue;
        marginal[a] += 1.0;
        for (int b = 0; b < classes; ++b)
          if ((*m)(t, b) != 0.0) joint(a, b) += 1.0;
      }
    }
  }
  Matrix pmi(classes, classes, 0.0);
  for (int a = 0; a < classes; ++a)
    for (int b = 0; b < classes; ++b)
      pmi(a, b) = std::log((joint(a, b) + 1.0) * (frames + 1.0) /
                           ((marginal[a] + 1.0) * (marginal[b] + 1.0)));
  return pmi;
}

}  // namespace multilstm
