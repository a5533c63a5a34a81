#include "multilstm/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

namespace {

double stable_bce(double score, double label) {
  return std::max(score, 0.0) - score * label +
         std::log1p(std::exp(-std::abs(score)));
}

int feature_dim(const Dataset& dataset) {
  if (dataset.videos.empty()) throw ArgumentError("train: empty dataset");
  int dim = -1;
  for (const VideoRecord& v : dataset.videos) {
    if (!v.has_features()) throw DataError("train: video " + v.id + " has no features");
    if (dim < 0) dim = v.features.cols;
    if (v.features.cols != dim)
      throw DataError("train: video " + v.id + " has feature dim " +
                      std::to_string(v.features.cols) + ", expected " +
                      std::to_string(dim));
  }
  return dim;
}

void shuffle_order(std::vector<int>& order, Rng& rng) {
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(0, i)]);
}

Matrix slice_rows(const Matrix& m, int begin, int end) {
  Matrix out(end - begin, m.cols);
  for (int r = begin; r < end; ++r) out.set_row(r - begin, m.row(r));
  return out;
}

struct EpochTotals {
  double loss = 0.0;
  long frames = 0;
};

// One pass over one video: streamed minibatches with exact state/context
// carry. When `update` is set, a gradient step runs after every minibatch.
EpochTotals run_video_multilstm(MultiLstmParams& params,
                                const MultiLstmConfig& config,
                                const TrainConfig& tc, RmsPropState& opt,
                                const VideoRecord& video, bool update,
                                int epoch) {
  EpochTotals totals;
  const int frames = video.frames;
  const int classes = params.class_count();
  const Matrix labels = rasterize(video.intervals, frames, classes);
  const ShiftedLabels shifted = shift_labels(labels, config.offset);

  LstmState state = LstmState::zeros(config.hidden);
  Matrix context;
  for (int begin = 0; begin < frames; begin += tc.minibatch) {
    const int end = std::min(frames, begin + tc.minibatch);
    const Matrix chunk = slice_rows(video.features, begin, end);
    MultiLstmForwardResult fwd = multilstm_forward(
        params, chunk, config, state, context.rows > 0 ? &context : nullptr);

    long masked_frames = 0;
    for (int t = begin; t < end; ++t) masked_frames += shifted.mask[t] ? 1 : 0;

    double chunk_loss = 0.0;
    std::vector<std::vector<Vec>> dscores(fwd.cache.steps.size());
    const double norm = masked_frames > 0 ? 1.0 / masked_frames : 0.0;
    for (std::size_t i = 0; i < fwd.cache.steps.size(); ++i) {
      const MultiLstmStepRecord& rec = fwd.cache.steps[i];
      dscores[i].resize(rec.head_scores.size());
      for (std::size_t k = 0; k < rec.head_scores.size(); ++k) {
        const int target = begin + static_cast<int>(i) - static_cast<int>(k);
        Vec& ds = dscores[i][k];
        ds.assign(classes, 0.0);
        if (!shifted.mask[target]) continue;
        for (int c = 0; c < classes; ++c) {
          const double y = rec.head_scores[k][c];
          const double z = shifted.labels(target, c);
          chunk_loss += stable_bce(y, z);
          ds[c] = (sigmoid(y) - z) * norm;
        }
      }
    }
    if (!std::isfinite(chunk_loss))
      throw NumericError("training diverged: non-finite loss at epoch " +
                         std::to_string(epoch) + ", video " + video.id +
                         ", frame " + std::to_string(begin));
    totals.loss += chunk_loss;
    totals.frames += masked_frames;

    if (update && masked_frames > 0) {
      MultiLstmGradients grads =
          multilstm_backward_scores(params, fwd.cache, dscores);
      const std::vector<ParamView> grad_views = gradient_views(grads);
      clip_gradients(grad_views, tc.clip);
      rmsprop_update(param_views(params), grad_views, opt, tc.rmsprop);
    }

    state = fwd.final_state;
    if (config.window > 1) {
      const int tail_begin = std::max(0, end - (config.window - 1));
      context = slice_rows(video.features, tail_begin, end);
    }
  }
  return totals;
}

EpochTotals run_video_logistic(LogisticParams& params, int offset,
                               const TrainConfig& tc, RmsPropState& opt,
                               const VideoRecord& video, bool update,
                               int epoch) {
  EpochTotals totals;
  const int classes = params.W.rows;
  const Matrix labels = rasterize(video.intervals, video.frames, classes);
  const ShiftedLabels shifted = shift_labels(labels, offset);

  for (int begin = 0; begin < video.frames; begin += tc.minibatch) {
    const int end = std::min(video.frames, begin + tc.minibatch);
    long masked_frames = 0;
    for (int t = begin; t < end; ++t) masked_frames += shifted.mask[t] ? 1 : 0;
    const double norm = masked_frames > 0 ? 1.0 / masked_frames : 0.0;

    double chunk_loss = 0.0;
    LogisticParams grads = LogisticParams::zeros(params.W.cols, classes);
    for (int t = begin; t < end; ++t) {
      if (!shifted.mask[t]) continue;
      const Vec x = video.features.row_vec(t);
      Vec scores = matvec(params.W, x);
      for (int c = 0; c < classes; ++c) {
        scores[c] += params.b[c];
        const double z = shifted.labels(t, c);
        chunk_loss += stable_bce(scores[c], z);
        const double ds = (sigmoid(scores[c]) - z) * norm;
        grads.b[c] += ds;
        for (int j = 0; j < params.W.cols; ++j) grads.W(c, j) += ds * x[j];
      }
    }
    if (!std::isfinite(chunk_loss))
      throw NumericError("training diverged: non-finite loss at epoch " +
                         std::to_string(epoch) + ", video " + video.id +
                         ", frame " + std::to_string(begin));
    totals.loss += chunk_loss;
    totals.frames += masked_frames;

    if (update && masked_frames > 0) {
      const std::vector<ParamView> grad_views = param_views(grads);
      clip_gradients(grad_views, tc.clip);
      rmsprop_update(param_views(params), grad_views, opt, tc.rmsprop);
    }
  }
  return totals;
}

void validate_train_config(const TrainConfig& tc) {
  if (tc.minibatch < 1) throw ArgumentError("train: minibatch must be >= 1");
  if (tc.epochs < 0) throw ArgumentError("train: epochs must be >= 0");
  if (tc.clip <= 0.0) throw ArgumentError("train: clip must be > 0");
}

}  // namespace

TrainResult train_multilstm(const Dataset& train, const MultiLstmConfig& config,
                            const TrainConfig& train_config) {
  config.validate();
  validate_train_config(train_config);
  const int input_dim = feature_dim(train);
  const int classes = train.class_count();
  for (const VideoRecord& v : train.videos)
    if (std::abs(config.offset) >= v.frames)
      throw ArgumentError("train: offset " + std::to_string(config.offset) +
                          " out of range for video " + v.id);

  Rng rng(train_config.seed);
  Rng init_rng = rng.split(0);
  TrainResult result;
  result.checkpoint.kind = "multilstm";
  result.checkpoint.config = config;
  result.checkpoint.input_dim = input_dim;
  result.checkpoint.classes = train.classes;
  result.checkpoint.train_config = train_config;
  result.checkpoint.params =
      MultiLstmParams::init(input_dim, config.hidden, classes,
                            config.attention_units, config.outputs, init_rng);
  MultiLstmParams& params = result.checkpoint.params;
  result.checkpoint.opt = RmsPropState::init_like(param_views(params));

  std::vector<int> order(train.videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  EpochTotals init_totals;
  for (int v : order) {
    const EpochTotals r =
        run_video_multilstm(params, config, train_config, result.checkpoint.opt,
                            train.videos[v], false, 0);
    init_totals.loss += r.loss;
    init_totals.frames += r.frames;
  }
  result.epoch_loss.push_back(
      init_totals.frames > 0 ? init_totals.loss / init_totals.frames : 0.0);

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    Rng epoch_rng = rng.split(static_cast<std::uint64_t>(epoch));
    shuffle_order(order, epoch_rng);
    EpochTotals totals;
    for (int v : order) {
      const EpochTotals r =
          run_video_multilstm(params, config, train_config,
                              result.checkpoint.opt, train.videos[v], true, epoch);
      totals.loss += r.loss;
      totals.frames += r.frames;
    }
    result.epoch_loss.push_back(totals.frames > 0 ? totals.loss / totals.frames
                                                  : 0.0);
    result.checkpoint.epoch = epoch;
  }
  return result;
}

TrainResult train_logistic(const Dataset& train, int offset,
                           const TrainConfig& train_config) {
  validate_train_config(train_config);
  const int input_dim = feature_dim(train);
  const int classes = train.class_count();
  for (const VideoRecord& v : train.videos)
    if (std::abs(offset) >= v.frames)
      throw ArgumentError("train: offset " + std::to_string(offset) +
                          " out of range for video " + v.id);

  Rng rng(train_config.seed);
  TrainResult result;
  result.checkpoint.kind = "logistic";
  result.checkpoint.config = MultiLstmConfig{};
  result.checkpoint.config.window = 1;
  result.checkpoint.config.outputs = 1;
  result.checkpoint.config.hidden = 0;
  result.checkpoint.config.attention_units = 0;
  result.checkpoint.config.offset = offset;
  result.checkpoint.input_dim = input_dim;
  result.checkpoint.classes = train.classes;
  result.checkpoint.train_config = train_config;
  result.checkpoint.logistic = LogisticParams::zeros(input_dim, classes);
  LogisticParams& params = result.checkpoint.logistic;
  result.checkpoint.opt = RmsPropState::init_like(param_views(params));

  std::vector<int> order(train.videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  EpochTotals init_totals;
  for (int v : order) {
    const EpochTotals r = run_video_logistic(
        params, offset, train_config, result.checkpoint.opt, train.videos[v],
        false, 0);
    init_totals.loss += r.loss;
    init_totals.frames += r.frames;
  }
  result.epoch_loss.push_back(
      init_totals.frames > 0 ? init_totals.loss / init_totals.frames : 0.0);

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    Rng epoch_rng = rng.split(static_cast<std::uint64_t>(epoch));
    shuffle_order(order, epoch_rng);
    EpochTotals totals;
    for (int v : order) {
      const EpochTotals r = run_video_logistic(
          params, offset, train_config, result.checkpoint.opt, train.videos[v],
          true, epoch);
      totals.loss += r.loss;
      totals.frames += r.frames;
    }
    result.epoch_loss.push_back(totals.frames > 0 ? totals.loss / totals.frames
                                                  : 0.0);
    result.checkpoint.epoch = epoch;
  }
  return result;
}

Matrix predict_video(const Checkpoint& checkpoint, const Matrix& features) {
  if (features.cols != checkpoint.input_dim)
    throw ShapeError("predict_video: features " + features.shape_str() +
                     ", model expects " + std::to_string(checkpoint.input_dim) +
                     " dims");
  if (checkpoint.kind == "logistic") {
    const LogisticParams& p = checkpoint.logistic;
    Matrix out(features.rows, p.W.rows);
    for (int t = 0; t < features.rows; ++t) {
      Vec scores = matvec(p.W, features.row_vec(t));
      for (int c = 0; c < p.W.rows; ++c)
        out(t, c) = sigmoid(scores[c] + p.b[c]);
    }
    return out;
  }
  if (checkpoint.kind != "multilstm")
    throw DataError("predict_video: unknown kind '" + checkpoint.kind + "'");
  MultiLstmStream stream(checkpoint.params, checkpoint.config);
  const Matrix head = stream.push(features);
  const Matrix tail = stream.finish();
  Matrix out(head.rows + tail.rows, head.cols);
  for (int r = 0; r < head.rows; ++r) out.set_row(r, head.row(r));
  for (int r = 0; r < tail.rows; ++r) out.set_row(head.rows + r, tail.row(r));
  return out;
}

}  // namespace multilstm
