#include <doctest.h>

#include <cmath>

#include "multilstm/error.hpp"
#include "multilstm/gradcheck.hpp"
#include "multilstm/multilstm.hpp"
#include "multilstm/rng.hpp"
#include "multilstm/verify.hpp"

using namespace multilstm;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

std::vector<std::span<const double>> window_of(const std::vector<Vec>& frames) {
  std::vector<std::span<const double>> window;
  for (const Vec& f : frames) window.emplace_back(f.data(), f.size());
  return window;
}

MultiLstmConfig small_config(int window, int outputs, int hidden, int units) {
  MultiLstmConfig config;
  config.window = window;
  config.outputs = outputs;
  config.hidden = hidden;
  config.attention_units = units;
  return config;
}

}  // namespace

TEST_CASE("attention_weights zero w_ae gives uniform weights") {
  Rng rng(1);
  AttentionParams attn = AttentionParams::init(4, 3, 2, rng);
  for (double& v : attn.w_ae) v = 0.0;
  const std::vector<Vec> frames{{0.1, 0.2}, {1.0, -1.0}, {0.4, 0.0}};
  Vec h_prev{0.3, -0.2, 0.5};
  const Vec alpha = attention_weights(attn, h_prev, window_of(frames));
  REQUIRE(alpha.size() == 3);
  for (double a : alpha) CHECK(a == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("attention_weights singleton window") {
  Rng rng(2);
  const AttentionParams attn = AttentionParams::init(4, 3, 2, rng);
  const std::vector<Vec> frames{{0.7, -0.3}};
  const Vec alpha = attention_weights(attn, {0.1, 0.2, 0.3}, window_of(frames));
  REQUIRE(alpha.size() == 1);
  CHECK(alpha[0] == 1.0);
}

TEST_CASE("attention_weights symmetric on duplicate frames") {
  Rng rng(3);
  const AttentionParams attn = AttentionParams::init(5, 4, 3, rng);
  const Vec frame{0.5, -0.8, 0.1};
  const std::vector<Vec> frames{frame, {1.0, 0.0, 0.0}, frame};
  Vec h_prev{0.2, -0.4, 0.6, 0.0};
  const Vec alpha = attention_weights(attn, h_prev, window_of(frames));
  CHECK(alpha[0] == alpha[2]);
}

TEST_CASE("attention_weights errors") {
  Rng rng(4);
  const AttentionParams attn = AttentionParams::init(4, 3, 2, rng);
  CHECK_THROWS_AS(attention_weights(attn, {0.0, 0.0, 0.0}, {}), ArgumentError);
}

TEST_CASE("attention simplex on fuzzed inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int units = rng.uniform_int(1, 6);
    const int hidden = rng.uniform_int(1, 5);
    const int dim = rng.uniform_int(1, 5);
    const AttentionParams attn = AttentionParams::init(units, hidden, dim, rng);
    const int len = rng.uniform_int(1, 7);
    std::vector<Vec> frames(len, Vec(dim));
    for (Vec& f : frames)
      for (double& v : f) v = rng.uniform(-10.0, 10.0);
    Vec h_prev(hidden);
    for (double& v : h_prev) v = rng.uniform(-1.0, 1.0);
    const Vec alpha = attention_weights(attn, h_prev, window_of(frames));
    double sum = 0.0;
    for (double a : alpha) {
      CHECK(a >= 0.0);
      sum += a;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("attended_input hand cases") {
  // one-hot at the last frame recovers the plain-LSTM input
  const std::vector<Vec> frames{{1.0, 2.0}, {3.0, 4.0}};
  const Vec picked = attended_input({0.0, 1.0}, window_of(frames));
  CHECK(picked[0] == 3.0);
  CHECK(picked[1] == 4.0);

  const std::vector<Vec> same{{2.0, -1.0}, {2.0, -1.0}, {2.0, -1.0}};
  const Vec averaged = attended_input({1.0 / 3, 1.0 / 3, 1.0 / 3}, window_of(same));
  CHECK(averaged[0] == doctest::Approx(2.0));
  CHECK(averaged[1] == doctest::Approx(-1.0));

  const std::vector<Vec> pair{{0.0, 4.0}, {4.0, 0.0}};
  const Vec mixed = attended_input({0.25, 0.75}, window_of(pair));
  CHECK(mixed[0] == doctest::Approx(3.0));
  CHECK(mixed[1] == doctest::Approx(1.0));

  CHECK_THROWS_AS(attended_input({0.5, 0.5, 0.0}, window_of(pair)), ShapeError);
}

TEST_CASE("consolidate_outputs hand cases") {
  // N=1 pass-through
  const std::vector<std::vector<Vec>> single{{{0.2, 0.9}}, {{0.4, 0.1}}};
  const Matrix passed = consolidate_outputs(single, 2, 2);
  CHECK(passed(0, 0) == 0.2);
  CHECK(passed(1, 1) == 0.1);

  // all steps emit the same vector
  const Vec p{0.3, 0.6};
  const std::vector<std::vector<Vec>> same{{p}, {p, p}, {p, p}};
  const Matrix equal = consolidate_outputs(same, 3, 2);
  for (int t = 0; t < 3; ++t) {
    CHECK(equal(t, 0) == doctest::Approx(0.3));
    CHECK(equal(t, 1) == doctest::Approx(0.6));
  }

  // frame 0 averages 0.2 (own step) and 0.6 (next step, head 1)
  const std::vector<std::vector<Vec>> two{{{0.2}}, {{0.8}, {0.6}}};
  const Matrix avg = consolidate_outputs(two, 2, 1);
  CHECK(avg(0, 0) == doctest::Approx(0.4));
  CHECK(avg(1, 0) == doctest::Approx(0.8));
}

TEST_CASE("multilstm reduction: window=outputs=1 equals the plain LSTM") {
  Rng rng(6);
  const LstmParams lstm = LstmParams::init(3, 4, 2, rng);
  Rng attn_rng = rng.split(1);
  const MultiLstmParams multi = MultiLstmParams::from_lstm(lstm, 5, attn_rng);
  const MultiLstmConfig config = small_config(1, 1, 4, 5);

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix xs = random_matrix(rng.uniform_int(1, 15), 3, rng, 2.0);
    const LstmForwardResult base = lstm_forward(lstm, xs, LstmState::zeros(4));
    const MultiLstmForwardResult reduced =
        multilstm_forward(multi, xs, config, LstmState::zeros(4));
    for (int t = 0; t < xs.rows; ++t)
      for (int c = 0; c < 2; ++c) {
        // raw head scores and consolidated probabilities, both bit-identical
        CHECK(reduced.cache.steps[t].head_scores[0][c] == base.scores(t, c));
        CHECK(reduced.predictions(t, c) == sigmoid(base.scores(t, c)));
      }
  }
}

TEST_CASE("multilstm zero parameters predict 0.5 everywhere") {
  MultiLstmParams params;
  params.gates = GateParams::zeros(3, 4);
  params.heads.assign(2, OutputHead::zeros(4, 2));
  params.attention = AttentionParams::zeros(3, 4, 3);
  const MultiLstmConfig config = small_config(2, 2, 4, 3);
  Rng rng(7);
  const Matrix xs = random_matrix(6, 3, rng);
  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, LstmState::zeros(4));
  for (double v : fwd.predictions.data) CHECK(v == 0.5);
}

TEST_CASE("multilstm edge handling at the sequence start") {
  Rng rng(8);
  Rng init_rng = rng.split(0);
  const MultiLstmParams params = MultiLstmParams::init(3, 4, 2, 3, 4, init_rng);
  const MultiLstmConfig config = small_config(5, 4, 4, 3);
  const Matrix xs = random_matrix(6, 3, rng);
  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, LstmState::zeros(4));
  // frame 0 consolidates min(N, T) = 4 steps; step 0 attends over 1 frame
  CHECK(fwd.cache.counts[0] == 4.0);
  CHECK(fwd.cache.steps[0].alpha.size() == 1);
  CHECK(fwd.cache.steps[1].alpha.size() == 2);

  const Matrix shorty = random_matrix(2, 3, rng);
  const MultiLstmForwardResult short_fwd =
      multilstm_forward(params, shorty, config, LstmState::zeros(4));
  CHECK(short_fwd.cache.counts[0] == 2.0);  // min(N, T) with T = 2
}

TEST_CASE("multilstm predictions stay inside (0,1)") {
  Rng rng(9);
  Rng init_rng = rng.split(0);
  const MultiLstmParams params = MultiLstmParams::init(4, 5, 3, 4, 3, init_rng);
  const MultiLstmConfig config = small_config(3, 3, 5, 4);
  const Matrix xs = random_matrix(20, 4, rng, 10.0);
  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, LstmState::zeros(5));
  for (double v : fwd.predictions.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("streamed chunks equal the full forward bit for bit") {
  Rng rng(10);
  Rng init_rng = rng.split(0);
  const MultiLstmParams params = MultiLstmParams::init(3, 6, 2, 4, 4, init_rng);
  const MultiLstmConfig config = small_config(5, 4, 6, 4);
  const Matrix xs = random_matrix(40, 3, rng);

  const MultiLstmForwardResult full =
      multilstm_forward(params, xs, config, LstmState::zeros(6));

  for (int chunk : {1, 3, 7, 32, 40}) {
    MultiLstmStream stream(params, config);
    std::vector<double> out;
    for (int begin = 0; begin < 40; begin += chunk) {
      const int end = std::min(40, begin + chunk);
      Matrix part(end - begin, 3);
      for (int t = begin; t < end; ++t) part.set_row(t - begin, xs.row(t));
      const Matrix rows = stream.push(part);
      out.insert(out.end(), rows.data.begin(), rows.data.end());
    }
    const Matrix tail = stream.finish();
    out.insert(out.end(), tail.data.begin(), tail.data.end());
    REQUIRE(out.size() == full.predictions.data.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == full.predictions.data[i]);
  }
}

TEST_CASE("multilabel_loss hand cases") {
  // all scores zero: loss = unmasked pairs * ln 2
  const Matrix scores(4, 3, 0.0);
  Matrix labels(4, 3, 0.0);
  labels(0, 1) = 1.0;
  std::vector<std::uint8_t> mask{1, 1, 0, 1};
  const MultilabelLossResult r = multilabel_loss(scores, labels, mask);
  CHECK(r.loss == doctest::Approx(9.0 * std::log(2.0)));
  CHECK(r.dscores(2, 0) == 0.0);  // masked row

  // saturated positive: per-term loss below 1e-20
  Matrix one(1, 1, 50.0);
  Matrix z_one(1, 1, 1.0);
  const MultilabelLossResult sat =
      multilabel_loss(one, z_one, std::vector<std::uint8_t>{1});
  CHECK(sat.loss >= 0.0);
  CHECK(sat.loss < 1e-20);

  // gradient sigma(y) - z
  Matrix y(1, 2, 0.0);
  Matrix z(1, 2, 0.0);
  z(0, 0) = 1.0;
  const MultilabelLossResult grad =
      multilabel_loss(y, z, std::vector<std::uint8_t>{1});
  CHECK(grad.dscores(0, 0) == doctest::Approx(-0.5));
  CHECK(grad.dscores(0, 1) == doctest::Approx(0.5));

  // numerically stable far into saturation
  Matrix big(1, 2, 0.0);
  big(0, 0) = 500.0;
  big(0, 1) = -500.0;
  Matrix zb(1, 2, 0.0);
  zb(0, 0) = 1.0;
  const MultilabelLossResult stable =
      multilabel_loss(big, zb, std::vector<std::uint8_t>{1});
  CHECK(std::isfinite(stable.loss));
  CHECK(stable.loss >= 0.0);

  CHECK_THROWS_AS(multilabel_loss(Matrix(2, 2), Matrix(3, 2),
                                  std::vector<std::uint8_t>{1, 1}),
                  ShapeError);
}

TEST_CASE("shift_labels hand cases") {
  Matrix z(10, 2, 0.0);
  for (int t = 0; t < 10; ++t) z(t, 0) = t;  // row marker

  const ShiftedLabels same = shift_labels(z, 0);
  for (int t = 0; t < 10; ++t) {
    CHECK(same.mask[t] == 1);
    CHECK(same.labels(t, 0) == z(t, 0));
  }

  const ShiftedLabels ahead = shift_labels(z, 2);
  for (int t = 0; t < 8; ++t) {
    CHECK(ahead.mask[t] == 1);
    CHECK(ahead.labels(t, 0) == z(t + 2, 0));
  }
  CHECK(ahead.mask[8] == 0);
  CHECK(ahead.mask[9] == 0);

  const ShiftedLabels back = shift_labels(z, -1);
  CHECK(back.mask[0] == 0);
  for (int t = 1; t < 10; ++t) {
    CHECK(back.mask[t] == 1);
    CHECK(back.labels(t, 0) == z(t - 1, 0));
  }

  CHECK_THROWS_AS(shift_labels(z, 10), ArgumentError);
  CHECK_THROWS_AS(shift_labels(z, -10), ArgumentError);
}

TEST_CASE("multilstm_backward zero upstream gives zero gradients") {
  Rng rng(11);
  Rng init_rng = rng.split(0);
  const MultiLstmParams params = MultiLstmParams::init(3, 4, 2, 3, 2, init_rng);
  const MultiLstmConfig config = small_config(3, 2, 4, 3);
  const Matrix xs = random_matrix(7, 3, rng);
  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, LstmState::zeros(4));
  MultiLstmGradients grads =
      multilstm_backward(params, fwd.cache, Matrix(7, 2, 0.0));
  for (const ParamView& v : gradient_views(grads))
    for (std::size_t i = 0; i < v.size; ++i) CHECK(v.data[i] == 0.0);
}

TEST_CASE("frozen one-hot attention reproduces lstm_backward gradients") {
  Rng rng(12);
  const LstmParams lstm = LstmParams::init(3, 4, 2, rng);
  Rng attn_rng = rng.split(1);
  const MultiLstmParams multi = MultiLstmParams::from_lstm(lstm, 5, attn_rng);
  const MultiLstmConfig config = small_config(1, 1, 4, 5);
  const Matrix xs = random_matrix(9, 3, rng);
  const Matrix dys = random_matrix(9, 2, rng);

  const LstmForwardResult base = lstm_forward(lstm, xs, LstmState::zeros(4));
  const LstmGradients base_grads = lstm_backward(lstm, base.cache, dys);

  const MultiLstmForwardResult fwd =
      multilstm_forward(multi, xs, config, LstmState::zeros(4));
  std::vector<std::vector<Vec>> dscores(9);
  for (int t = 0; t < 9; ++t) dscores[t] = {dys.row_vec(t)};
  MultiLstmGradients grads = multilstm_backward_scores(multi, fwd.cache, dscores);

  LstmParams base_holder;
  base_holder.gates = base_grads.gates;
  base_holder.head = base_grads.head;
  LstmParams multi_holder;
  multi_holder.gates = grads.gates;
  multi_holder.head = grads.heads[0];
  const Vec expect = flatten(param_views(base_holder));
  const Vec got = flatten(param_views(multi_holder));
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(std::abs(got[i] - expect[i]) <= 1e-12 * std::max(1.0, std::abs(expect[i])));

  // attention parameters receive exactly zero gradient through the
  // degenerate softmax
  for (const ParamView& v : param_views(grads.attention))
    for (std::size_t i = 0; i < v.size; ++i) CHECK(v.data[i] == 0.0);
}

TEST_CASE("gradient check suite on the acceptance dimensions") {
  const GradCheckReport report = run_gradcheck(7);
  for (const GradCheckEntry& e : report.entries) {
    INFO(e.component, " max rel err ", e.max_rel_error);
    CHECK(e.pass);
  }
  CHECK(report.all_pass());
}

TEST_CASE("multilstm_backward rejects mismatched cache") {
  Rng rng(13);
  Rng init_rng = rng.split(0);
  const MultiLstmParams params = MultiLstmParams::init(3, 4, 2, 3, 2, init_rng);
  Rng other_rng = rng.split(1);
  const MultiLstmParams other = MultiLstmParams::init(5, 4, 2, 3, 2, other_rng);
  const MultiLstmConfig config = small_config(3, 2, 4, 3);
  const Matrix xs = random_matrix(5, 3, rng);
  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, LstmState::zeros(4));
  CHECK_THROWS_AS(multilstm_backward(other, fwd.cache, Matrix(5, 2, 0.0)),
                  ConsistencyError);
}
