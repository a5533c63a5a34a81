#include <doctest.h>

#include <cmath>

#include "multilstm/error.hpp"
#include "multilstm/eval.hpp"
#include "multilstm/rng.hpp"

using namespace multilstm;

namespace {

// Independent AP recomputation: per positive, threshold at its score and
// count by brute force (no sorting shared with the implementation).
double sweep_ap(const Vec& scores, const Vec& labels) {
  const int n = static_cast<int>(scores.size());
  double precision_sum = 0.0;
  int positives = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] == 0.0) continue;
    ++positives;
    int rank = 0, tp = 0;
    for (int j = 0; j < n; ++j) {
      const bool before =
          scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
      if (before) {
        ++rank;
        if (labels[j] != 0.0) ++tp;
      }
    }
    precision_sum += static_cast<double>(tp) / rank;
  }
  return precision_sum / positives;
}

}  // namespace

TEST_CASE("average_precision hand cases") {
  CHECK(*average_precision(Vec{0.9, 0.1, 0.8}, Vec{1, 0, 1}) ==
        doctest::Approx(1.0));
  CHECK(*average_precision(Vec{0.1, 0.9}, Vec{1, 0}) == doctest::Approx(0.5));

  // perfect separation
  CHECK(*average_precision(Vec{0.9, 0.8, 0.2, 0.1}, Vec{1, 1, 0, 0}) == 1.0);

  // no positives -> undefined
  CHECK(!average_precision(Vec{0.3, 0.4}, Vec{0, 0}).has_value());

  CHECK_THROWS_AS(average_precision(Vec{0.1}, Vec{0, 1}), ShapeError);
}

TEST_CASE("average_precision invariant under strictly monotone transforms") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    Vec scores(25), labels(25);
    bool any = false;
    for (int i = 0; i < 25; ++i) {
      scores[i] = rng.uniform(-3.0, 3.0);
      labels[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
      any |= labels[i] != 0.0;
    }
    if (!any) labels[0] = 1.0;
    const double base = *average_precision(scores, labels);
    Vec exp_scores = scores, affine_scores = scores;
    for (double& v : exp_scores) v = std::exp(v);
    for (double& v : affine_scores) v = 2.0 * v + 1.0;
    CHECK(*average_precision(exp_scores, labels) == doctest::Approx(base));
    CHECK(*average_precision(affine_scores, labels) == doctest::Approx(base));
  }
}

TEST_CASE("average_precision matches the brute-force threshold sweep") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Vec scores(30), labels(30);
    bool any = false;
    for (int i = 0; i < 30; ++i) {
      scores[i] = rng.uniform(0.0, 1.0);
      labels[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
      any |= labels[i] != 0.0;
    }
    if (!any) labels[rng.uniform_int(0, 29)] = 1.0;
    CHECK(std::abs(*average_precision(scores, labels) -
                   sweep_ap(scores, labels)) < 1e-9);
  }
}

TEST_CASE("mean_ap basics") {
  // two classes with AP 1.0 and 0.5
  Matrix preds(2, 2), labels(2, 2, 0.0);
  preds(0, 0) = 0.9;
  preds(1, 0) = 0.1;
  labels(0, 0) = 1.0;  // class 0 perfectly ranked
  preds(0, 1) = 0.9;
  preds(1, 1) = 0.1;
  labels(1, 1) = 1.0;  // class 1: positive ranked second -> 0.5
  const MeanApResult r = mean_ap({{&preds, &labels}});
  CHECK(r.map == doctest::Approx(0.75));
  CHECK(r.defined_classes == 2);

  // ground truth as predictions scores exactly 1.0
  Rng rng(3);
  Matrix z(40, 3, 0.0);
  for (double& v : z.data) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
  bool ok = false;
  for (int c = 0; c < 3; ++c)
    for (int t = 0; t < 40; ++t) ok |= z(t, c) != 0.0;
  REQUIRE(ok);
  const MeanApResult perfect = mean_ap({{&z, &z}});
  CHECK(perfect.map == 1.0);
}

TEST_CASE("mean_ap skips classes without positives") {
  Matrix preds(3, 2, 0.5);
  Matrix labels(3, 2, 0.0);
  labels(1, 0) = 1.0;
  const MeanApResult r = mean_ap({{&preds, &labels}});
  CHECK(r.defined_classes == 1);
  CHECK(!r.per_class[1].has_value());
}

TEST_CASE("detect hand scores") {
  // run of both frames at exactly mu: penalty factor 1
  const std::vector<Detection> d1 = detect(Vec{0.5, 0.5}, 0.1, 2.0, 1.0, 0.01);
  REQUIRE(d1.size() == 1);
  CHECK(d1[0].start == 0);
  CHECK(d1[0].end == 2);
  CHECK(d1[0].score == doctest::Approx(1.0));

  // length one sigma away: factor exp(-alpha)
  const std::vector<Detection> d2 = detect(Vec{0.5, 0.5}, 0.1, 1.0, 1.0, 0.01);
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].score == doctest::Approx(std::exp(-0.01)));

  // nothing above threshold
  CHECK(detect(Vec{0.05, 0.02, 0.09}, 0.1, 1.0, 1.0, 0.01).empty());
}

TEST_CASE("detect partitions the frames above threshold") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Vec probs(50);
    for (double& v : probs) v = rng.uniform(0.0, 1.0);
    const double lambda = 0.35;
    const std::vector<Detection> dets = detect(probs, lambda, 3.0, 2.0, 0.01);
    std::vector<bool> covered(50, false);
    for (const Detection& d : dets) {
      CHECK(d.start < d.end);
      CHECK(d.score > 0.0);
      for (int t = d.start; t < d.end; ++t) {
        CHECK(!covered[t]);  // pairwise disjoint
        covered[t] = true;
      }
    }
    for (int t = 0; t < 50; ++t) CHECK(covered[t] == (probs[t] >= lambda));
  }
}

TEST_CASE("temporal iou and detection AP") {
  CHECK(temporal_iou(0, 10, 5, 15) == doctest::Approx(5.0 / 15.0));
  CHECK(temporal_iou(0, 5, 5, 10) == 0.0);
  CHECK(temporal_iou(2, 6, 2, 6) == 1.0);

  std::vector<GtInstance> truth{{"v", 0, 10}, {"v", 20, 30}};
  std::vector<Detection> exact{{"v", 0, 0, 10, 0.9}, {"v", 0, 20, 30, 0.8}};
  CHECK(*detection_ap(exact, truth, 0.999) == doctest::Approx(1.0));
  CHECK(*detection_ap(exact, truth, 0.1) == doctest::Approx(1.0));

  std::vector<Detection> miss{{"v", 0, 40, 50, 0.9}};
  CHECK(*detection_ap(miss, {{"v", 0, 10}}, 0.1) == 0.0);

  // higher-scored false positive ahead of a true positive halves precision
  std::vector<Detection> mixed{{"v", 0, 40, 50, 0.9}, {"v", 0, 0, 10, 0.5}};
  CHECK(*detection_ap(mixed, {{"v", 0, 10}}, 0.5) == doctest::Approx(0.5));

  CHECK(!detection_ap(exact, {}, 0.5).has_value());
  CHECK_THROWS_AS(detection_ap(exact, truth, 0.0), ArgumentError);
}

TEST_CASE("compute_length_stats applies the sigma floor") {
  Dataset ds;
  ds.classes = {"fixed", "varied", "absent"};
  VideoRecord v;
  v.id = "v";
  v.frames = 40;
  v.frame_rate = 10.0;
  // two instances of identical length 4 -> sigma would be 0, floored to 1
  v.intervals = {{0, 0, 4}, {0, 10, 14}, {1, 20, 22}, {1, 24, 32}};
  ds.videos.push_back(v);
  const ClassLengthStats stats = compute_length_stats(ds);
  CHECK(stats.mean[0] == doctest::Approx(4.0));
  CHECK(stats.stddev[0] == 1.0);
  CHECK(stats.mean[1] == doctest::Approx(5.0));
  CHECK(stats.stddev[1] == doctest::Approx(3.0));
  CHECK(stats.mean[2] == 1.0);
  CHECK(stats.stddev[2] == 1.0);
}

TEST_CASE("offset prior identity statistics reproduce the predictions") {
  // one class active per frame, deterministic identity conditional
  Dataset ds;
  ds.classes = {"a", "b"};
  VideoRecord v;
  v.id = "v";
  v.frames = 20;
  v.frame_rate = 10.0;
  v.intervals = {{0, 0, 10}, {1, 10, 20}};
  ds.videos.push_back(v);
  const Matrix prior = offset_prior(ds, 0);
  CHECK(prior(0, 0) == 1.0);
  CHECK(prior(0, 1) == 0.0);
  CHECK(prior(1, 1) == 1.0);

  Rng rng(5);
  Matrix preds(6, 2);
  for (double& p : preds.data) p = rng.uniform(0.0, 1.0);
  const Matrix out = prior_predictions(preds, prior);
  for (std::size_t i = 0; i < preds.data.size(); ++i)
    CHECK(out.data[i] == doctest::Approx(preds.data[i]));
}

TEST_CASE("offset prior recovers a planted lag exactly") {
  // B spans [start+3, end+3) for every A instance [start, end)
  Dataset ds;
  ds.classes = {"A", "B"};
  for (int v = 0; v < 3; ++v) {
    VideoRecord video;
    video.id = "v" + std::to_string(v);
    video.frames = 50;
    video.frame_rate = 10.0;
    const int start = 5 + 9 * v;
    const int len = 4 + v;
    video.intervals = {{0, start, start + len}, {1, start + 3, start + 3 + len}};
    ds.videos.push_back(video);
  }
  const Matrix prior = offset_prior(ds, 3);
  CHECK(prior(0, 1) == 1.0);  // P(B at t+3 | A at t)
}

TEST_CASE("offset prior near-uniform for independent random labels") {
  Rng rng(6);
  Dataset ds;
  ds.classes = {"a", "b"};
  VideoRecord v;
  v.id = "v";
  v.frames = 20000;
  v.frame_rate = 10.0;
  // iid per-frame activity at rate 0.5, rasterized from unit intervals
  for (int t = 0; t < v.frames; ++t) {
    if (rng.uniform() < 0.5) v.intervals.push_back({0, t, t + 1});
    if (rng.uniform() < 0.5) v.intervals.push_back({1, t, t + 1});
  }
  ds.videos.push_back(v);
  const Matrix prior = offset_prior(ds, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(prior(a, b) - 0.5) < 0.05);
}

TEST_CASE("pool_by_class honors offset and masks") {
  Matrix preds(4, 1);
  preds(0, 0) = 0.1;
  preds(1, 0) = 0.2;
  preds(2, 0) = 0.3;
  preds(3, 0) = 0.4;
  Matrix labels(4, 1, 0.0);
  labels(2, 0) = 1.0;
  const ClassPools pools = pool_by_class({{&preds, &labels}}, 1);
  // rows 0..2 valid (target t+1), row 3 dropped
  REQUIRE(pools.scores[0].size() == 3);
  CHECK(pools.labels[0][1] == 1.0);  // prediction row 1 targets frame 2

  // restrict to frames where the class is inactive at t
  const ClassPools pre = pool_by_class({{&preds, &labels}}, 1, 0);
  REQUIRE(pre.scores[0].size() == 2);  // frame 2 (active) dropped
}
