#include "multilstm/multilstm.hpp"

#include <algorithm>
#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

namespace {

Matrix uniform_matrix(int rows, int cols, int fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-s, s);
  return m;
}

Vec tanh_matvec(const Matrix& w, const Vec& x) {
  Vec out = matvec(w, x);
  for (double& v : out) v = std::tanh(v);
  return out;
}

// w_ae . [a_h . a_v], the unnormalized attention logit.
double attention_logit(const Vec& w_ae, const Vec& a_h,
                       std::span<const double> a_v) {
  double acc = 0.0;
  for (std::size_t a = 0; a < w_ae.size(); ++a) acc += w_ae[a] * a_h[a] * a_v[a];
  return acc;
}

void accumulate_scaled(Vec& acc, double scale, std::span<const double> v) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * v[j];
}

Vec head_scores_for(const OutputHead& head, const Vec& h) {
  Vec scores = matvec(head.W_hy, h);
  for (int c = 0; c < head.class_count(); ++c) scores[c] += head.b_y[c];
  return scores;
}

// One stable per-entry logistic loss term.
double bce_term(double y, double z) {
  return std::max(y, 0.0) - y * z + std::log1p(std::exp(-std::abs(y)));
}

}  // namespace

AttentionParams AttentionParams::zeros(int units, int hidden_dim,
                                       int input_dim) {
  AttentionParams a;
  a.w_ae = Vec(units, 0.0);
  a.W_ha = Matrix(units, hidden_dim);
  a.W_va = Matrix(units, input_dim);
  return a;
}

AttentionParams AttentionParams::init(int units, int hidden_dim, int input_dim,
                                      Rng& rng) {
  AttentionParams a;
  const double s = 1.0 / std::sqrt(static_cast<double>(units));
  a.w_ae = Vec(units);
  for (double& v : a.w_ae) v = rng.uniform(-s, s);
  a.W_ha = uniform_matrix(units, hidden_dim, hidden_dim, rng);
  a.W_va = uniform_matrix(units, input_dim, input_dim, rng);
  return a;
}

void AttentionParams::validate(int hidden_dim, int input_dim) const {
  if (W_ha.rows != units() || W_ha.cols != hidden_dim)
    throw ShapeError("W_ha is " + W_ha.shape_str() + ", expected " +
                     std::to_string(units()) + "x" + std::to_string(hidden_dim));
  if (W_va.rows != units() || W_va.cols != input_dim)
    throw ShapeError("W_va is " + W_va.shape_str() + ", expected " +
                     std::to_string(units()) + "x" + std::to_string(input_dim));
}

void MultiLstmConfig::validate() const {
  if (window < 1) throw ArgumentError("config: window must be >= 1");
  if (outputs < 1) throw ArgumentError("config: outputs must be >= 1");
  if (hidden < 1) throw ArgumentError("config: hidden must be >= 1");
  if (attention_units < 1)
    throw ArgumentError("config: attention_units must be >= 1");
  if (frame_rate <= 0.0) throw ArgumentError("config: frame_rate must be > 0");
}

MultiLstmParams MultiLstmParams::init(int input_dim, int hidden_dim,
                                      int class_count, int attention_units,
                                      int output_window, Rng& rng) {
  MultiLstmParams p;
  p.gates = GateParams::init(input_dim, hidden_dim, rng);
  p.heads.reserve(output_window);
  for (int k = 0; k < output_window; ++k)
    p.heads.push_back(OutputHead::init(hidden_dim, class_count, rng));
  p.attention = AttentionParams::init(attention_units, hidden_dim, input_dim, rng);
  return p;
}

MultiLstmParams MultiLstmParams::from_lstm(const LstmParams& lstm,
                                           int attention_units,
                                           Rng& attention_rng) {
  MultiLstmParams p;
  p.gates = lstm.gates;
  p.heads = {lstm.head};
  p.attention = AttentionParams::init(attention_units, lstm.hidden_dim(),
                                      lstm.input_dim(), attention_rng);
  return p;
}

void MultiLstmParams::validate() const {
  gates.validate();
  if (heads.empty()) throw ShapeError("MultiLstmParams: no output heads");
  for (const OutputHead& h : heads) {
    if (h.W_hy.cols != hidden_dim())
      throw ShapeError("head W_hy is " + h.W_hy.shape_str() +
                       ", expected cols " + std::to_string(hidden_dim()));
    if (h.class_count() != class_count())
      throw ShapeError("heads disagree on class count");
    if (static_cast<int>(h.b_y.size()) != h.class_count())
      throw ShapeError("head b_y length mismatch");
  }
  attention.validate(hidden_dim(), input_dim());
}

std::vector<ParamView> param_views(AttentionParams& a) {
  return {
      {"w_ae", a.w_ae.data(), a.w_ae.size()},
      {"W_ha", a.W_ha.data.data(), a.W_ha.data.size()},
      {"W_va", a.W_va.data.data(), a.W_va.data.size()},
  };
}

namespace {

template <typename P>
std::vector<ParamView> multilstm_views(P& p) {
  std::vector<ParamView> views = param_views(p.gates);
  for (std::size_t k = 0; k < p.heads.size(); ++k) {
    const std::string suffix = std::to_string(k);
    views.push_back({"W_hy" + suffix, p.heads[k].W_hy.data.data(),
                     p.heads[k].W_hy.data.size()});
    views.push_back(
        {"b_y" + suffix, p.heads[k].b_y.data(), p.heads[k].b_y.size()});
  }
  auto attn = param_views(p.attention);
  views.insert(views.end(), attn.begin(), attn.end());
  return views;
}

}  // namespace

std::vector<ParamView> param_views(MultiLstmParams& p) {
  return multilstm_views(p);
}

std::vector<ParamView> gradient_views(MultiLstmGradients& g) {
  return multilstm_views(g);
}

Vec attention_weights(const AttentionParams& attn, const Vec& h_prev,
                      const std::vector<std::span<const double>>& window) {
  if (window.empty()) throw ArgumentError("attention_weights: empty window");
  if (static_cast<int>(h_prev.size()) != attn.W_ha.cols)
    throw ShapeError("attention_weights: h_prev length " +
                     std::to_string(h_prev.size()) + ", expected " +
                     std::to_string(attn.W_ha.cols));
  const Vec a_h = tanh_matvec(attn.W_ha, h_prev);
  Vec logits(window.size());
  for (std::size_t t = 0; t < window.size(); ++t) {
    if (static_cast<int>(window[t].size()) != attn.W_va.cols)
      throw ShapeError("attention_weights: frame length " +
                       std::to_string(window[t].size()) + ", expected " +
                       std::to_string(attn.W_va.cols));
    const Vec a_v = tanh_matvec(attn.W_va, Vec(window[t].begin(), window[t].end()));
    logits[t] = attention_logit(attn.w_ae, a_h, a_v);
  }
  return softmax(logits);
}

Vec attended_input(const Vec& alpha,
                   const std::vector<std::span<const double>>& window) {
  if (alpha.size() != window.size())
    throw ShapeError("attended_input: " + std::to_string(alpha.size()) +
                     " weights over " + std::to_string(window.size()) +
                     " frames");
  if (window.empty()) throw ArgumentError("attended_input: empty window");
  Vec x(window[0].size(), 0.0);
  for (std::size_t t = 0; t < window.size(); ++t) {
    if (window[t].size() != x.size())
      throw ShapeError("attended_input: ragged window frames");
    accumulate_scaled(x, alpha[t], window[t]);
  }
  return x;
}

Matrix consolidate_outputs(const std::vector<std::vector<Vec>>& per_step,
                           int total_frames, int class_count) {
  Matrix sums(total_frames, class_count, 0.0);
  Vec counts(total_frames, 0.0);
  for (int i = 0; i < static_cast<int>(per_step.size()); ++i) {
    if (i >= total_frames)
      throw ArgumentError("consolidate_outputs: more steps than frames");
    for (int k = 0; k < static_cast<int>(per_step[i].size()); ++k) {
      const int frame = i - k;
      if (frame < 0)
        throw ArgumentError("consolidate_outputs: step " + std::to_string(i) +
                            " emits prediction for frame " +
                            std::to_string(frame));
      const Vec& p = per_step[i][k];
      if (static_cast<int>(p.size()) != class_count)
        throw ShapeError("consolidate_outputs: prediction length " +
                         std::to_string(p.size()) + ", expected " +
                         std::to_string(class_count));
      for (int c = 0; c < class_count; ++c) sums(frame, c) += p[c];
      counts[frame] += 1.0;
    }
  }
  for (int t = 0; t < total_frames; ++t) {
    if (counts[t] == 0.0)
      throw ArgumentError("consolidate_outputs: frame " + std::to_string(t) +
                          " received no predictions");
    for (int c = 0; c < class_count; ++c) sums(t, c) /= counts[t];
  }
  return sums;
}

namespace {

void check_forward_args(const MultiLstmParams& params, const Matrix& features,
                        const MultiLstmConfig& config, const LstmState& init) {
  config.validate();
  params.validate();
  if (features.rows < 1) throw ArgumentError("multilstm_forward: empty sequence");
  if (features.cols != params.input_dim())
    throw ShapeError("multilstm_forward: features " + features.shape_str() +
                     ", expected cols " + std::to_string(params.input_dim()));
  if (params.hidden_dim() != config.hidden)
    throw ShapeError("multilstm_forward: params hidden " +
                     std::to_string(params.hidden_dim()) + " vs config " +
                     std::to_string(config.hidden));
  if (params.output_window() != config.outputs)
    throw ShapeError("multilstm_forward: params have " +
                     std::to_string(params.output_window()) +
                     " heads, config expects " + std::to_string(config.outputs));
  if (params.attention.units() != config.attention_units)
    throw ShapeError("multilstm_forward: attention units mismatch");
  if (static_cast<int>(init.h.size()) != config.hidden ||
      static_cast<int>(init.c.size()) != config.hidden)
    throw ShapeError("multilstm_forward: init state dimension " +
                     std::to_string(init.h.size()));
}

}  // namespace

MultiLstmForwardResult multilstm_forward(const MultiLstmParams& params,
                                         const Matrix& features,
                                         const MultiLstmConfig& config,
                                         const LstmState& init,
                                         const Matrix* context) {
  check_forward_args(params, features, config, init);
  const int frames = features.rows;
  const int input_dim = features.cols;
  const int class_count = params.class_count();
  const int window = config.window;
  const int outputs = config.outputs;

  int context_rows = 0;
  if (context != nullptr && context->rows > 0) {
    if (context->cols != input_dim)
      throw ShapeError("multilstm_forward: context " + context->shape_str() +
                       " vs features " + features.shape_str());
    context_rows = std::min(context->rows, window - 1);
  }

  MultiLstmCache cache;
  cache.context_rows = context_rows;
  cache.window = window;
  cache.outputs = outputs;
  cache.frames_ext = Matrix(context_rows + frames, input_dim);
  for (int r = 0; r < context_rows; ++r)
    cache.frames_ext.set_row(r, context->row(context->rows - context_rows + r));
  for (int t = 0; t < frames; ++t)
    cache.frames_ext.set_row(context_rows + t, features.row(t));

  const int ext_rows = cache.frames_ext.rows;
  cache.a_v = Matrix(ext_rows, params.attention.units());
  for (int r = 0; r < ext_rows; ++r)
    cache.a_v.set_row(r,
                      tanh_matvec(params.attention.W_va, cache.frames_ext.row_vec(r)));

  Matrix sums(frames, class_count, 0.0);
  cache.counts = Vec(frames, 0.0);
  cache.steps.reserve(frames);

  LstmState state = init;
  for (int i = 0; i < frames; ++i) {
    const int current = context_rows + i;
    const int window_begin = std::max(0, current - window + 1);

    MultiLstmStepRecord rec;
    rec.window_begin = window_begin;
    rec.a_h = tanh_matvec(params.attention.W_ha, state.h);

    Vec logits(current - window_begin + 1);
    for (int r = window_begin; r <= current; ++r)
      logits[r - window_begin] =
          attention_logit(params.attention.w_ae, rec.a_h, cache.a_v.row(r));
    rec.alpha = softmax(logits);

    Vec x(input_dim, 0.0);
    for (int r = window_begin; r <= current; ++r)
      accumulate_scaled(x, rec.alpha[r - window_begin], cache.frames_ext.row(r));

    rec.lstm = detail::gate_step(params.gates, x, state);
    state.h = rec.lstm.h;
    state.c = rec.lstm.c;

    const int valid_heads = std::min(outputs, i + 1);
    rec.head_scores.reserve(valid_heads);
    for (int k = 0; k < valid_heads; ++k) {
      Vec scores = head_scores_for(params.heads[k], state.h);
      const int frame = i - k;
      for (int c = 0; c < class_count; ++c) sums(frame, c) += sigmoid(scores[c]);
      cache.counts[frame] += 1.0;
      rec.head_scores.push_back(std::move(scores));
    }
    cache.steps.push_back(std::move(rec));
  }

  MultiLstmForwardResult result;
  result.predictions = Matrix(frames, class_count);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < class_count; ++c)
      result.predictions(t, c) = sums(t, c) / cache.counts[t];
  result.final_state = std::move(state);
  result.cache = std::move(cache);
  return result;
}

MultiLstmGradients MultiLstmGradients::zeros(const MultiLstmParams& params) {
  MultiLstmGradients g;
  g.gates = GateParams::zeros(params.input_dim(), params.hidden_dim());
  g.heads.reserve(params.heads.size());
  for (std::size_t k = 0; k < params.heads.size(); ++k)
    g.heads.push_back(
        OutputHead::zeros(params.hidden_dim(), params.class_count()));
  g.attention = AttentionParams::zeros(params.attention.units(),
                                       params.hidden_dim(), params.input_dim());
  g.init_state = LstmState::zeros(params.hidden_dim());
  return g;
}

namespace {

void check_cache(const MultiLstmParams& params, const MultiLstmCache& cache) {
  if (cache.steps.empty())
    throw ConsistencyError("multilstm_backward: empty cache");
  if (cache.outputs != params.output_window() ||
      cache.frames_ext.cols != params.input_dim() ||
      cache.a_v.cols != params.attention.units())
    throw ConsistencyError(
        "multilstm_backward: cache does not match parameters");
  for (const MultiLstmStepRecord& rec : cache.steps)
    if (static_cast<int>(rec.lstm.h.size()) != params.hidden_dim())
      throw ConsistencyError(
          "multilstm_backward: cache does not match parameters");
}

}  // namespace

MultiLstmGradients multilstm_backward_scores(
    const MultiLstmParams& params, const MultiLstmCache& cache,
    const std::vector<std::vector<Vec>>& dscores) {
  check_cache(params, cache);
  const int steps = static_cast<int>(cache.steps.size());
  if (static_cast<int>(dscores.size()) != steps)
    throw ShapeError("multilstm_backward: " + std::to_string(dscores.size()) +
                     " upstream steps, cache has " + std::to_string(steps));
  const int hidden = params.hidden_dim();
  const int units = params.attention.units();
  const int class_count = params.class_count();

  MultiLstmGradients grads = MultiLstmGradients::zeros(params);
  Matrix da_v_acc(cache.frames_ext.rows, units, 0.0);
  Vec dh_next(hidden, 0.0), dc_next(hidden, 0.0);
  Vec dx, dh_prev, dc_prev;

  for (int i = steps - 1; i >= 0; --i) {
    const MultiLstmStepRecord& rec = cache.steps[i];
    if (dscores[i].size() != rec.head_scores.size())
      throw ShapeError("multilstm_backward: step " + std::to_string(i) +
                       " has " + std::to_string(dscores[i].size()) +
                       " head gradients, cache has " +
                       std::to_string(rec.head_scores.size()));

    Vec dh = dh_next;
    for (std::size_t k = 0; k < dscores[i].size(); ++k) {
      const Vec& ds = dscores[i][k];
      if (static_cast<int>(ds.size()) != class_count)
        throw ShapeError("multilstm_backward: head gradient length " +
                         std::to_string(ds.size()));
      const Vec dh_head = tmatvec(params.heads[k].W_hy, ds);
      for (int j = 0; j < hidden; ++j) dh[j] += dh_head[j];
      add_outer(grads.heads[k].W_hy, ds, rec.lstm.h);
      for (int c = 0; c < class_count; ++c) grads.heads[k].b_y[c] += ds[c];
    }

    detail::gate_step_backward(params.gates, rec.lstm, dh, dc_next, grads.gates,
                               dx, dh_prev, dc_prev);

    // Attention: x = sum_r alpha_r v_r with alpha = softmax(logits), and
    // logit_r = w_ae . [a_h . a_v(r)].
    const int window_len = static_cast<int>(rec.alpha.size());
    Vec dalpha(window_len);
    for (int r = 0; r < window_len; ++r)
      dalpha[r] =
          dot(std::span<const double>(dx.data(), dx.size()),
              cache.frames_ext.row(rec.window_begin + r));
    double weighted = 0.0;
    for (int r = 0; r < window_len; ++r) weighted += rec.alpha[r] * dalpha[r];

    Vec da_h(units, 0.0);
    for (int r = 0; r < window_len; ++r) {
      const double de = rec.alpha[r] * (dalpha[r] - weighted);
      if (de == 0.0) continue;
      const int row = rec.window_begin + r;
      const std::span<const double> a_v = cache.a_v.row(row);
      double* da_v_row =
          da_v_acc.data.data() + static_cast<std::size_t>(row) * units;
      for (int a = 0; a < units; ++a) {
        grads.attention.w_ae[a] += de * rec.a_h[a] * a_v[a];
        da_h[a] += de * params.attention.w_ae[a] * a_v[a];
        da_v_row[a] += de * params.attention.w_ae[a] * rec.a_h[a];
      }
    }
    Vec dz_h(units);
    for (int a = 0; a < units; ++a)
      dz_h[a] = da_h[a] * (1.0 - rec.a_h[a] * rec.a_h[a]);
    add_outer(grads.attention.W_ha, dz_h, rec.lstm.h_prev);
    const Vec dh_attn = tmatvec(params.attention.W_ha, dz_h);

    dh_next = std::move(dh_prev);
    for (int j = 0; j < hidden; ++j) dh_next[j] += dh_attn[j];
    dc_next = std::move(dc_prev);
    dh_prev = Vec();
    dc_prev = Vec();
  }
  grads.init_state.h = std::move(dh_next);
  grads.init_state.c = std::move(dc_next);

  // Fold the accumulated a_v gradients through tanh(W_va v) once per frame.
  for (int r = 0; r < cache.frames_ext.rows; ++r) {
    Vec dz_v(units);
    bool any = false;
    const std::span<const double> a_v = cache.a_v.row(r);
    for (int a = 0; a < units; ++a) {
      dz_v[a] = da_v_acc(r, a) * (1.0 - a_v[a] * a_v[a]);
      any = any || dz_v[a] != 0.0;
    }
    if (any)
      add_outer(grads.attention.W_va, dz_v, cache.frames_ext.row_vec(r));
  }
  return grads;
}

MultiLstmGradients multilstm_backward(const MultiLstmParams& params,
                                      const MultiLstmCache& cache,
                                      const Matrix& dpredictions) {
  check_cache(params, cache);
  const int steps = static_cast<int>(cache.steps.size());
  const int class_count = params.class_count();
  if (dpredictions.rows != steps || dpredictions.cols != class_count)
    throw ShapeError("multilstm_backward: upstream gradient " +
                     dpredictions.shape_str() + ", expected " +
                     std::to_string(steps) + "x" + std::to_string(class_count));

  // Through the count-based mean and the per-head sigmoid.
  std::vector<std::vector<Vec>> dscores(steps);
  for (int i = 0; i < steps; ++i) {
    const MultiLstmStepRecord& rec = cache.steps[i];
    dscores[i].reserve(rec.head_scores.size());
    for (std::size_t k = 0; k < rec.head_scores.size(); ++k) {
      const int frame = i - static_cast<int>(k);
      Vec ds(class_count);
      for (int c = 0; c < class_count; ++c) {
        const double p = sigmoid(rec.head_scores[k][c]);
        ds[c] = dpredictions(frame, c) / cache.counts[frame] * p * (1.0 - p);
      }
      dscores[i].push_back(std::move(ds));
    }
  }
  return multilstm_backward_scores(params, cache, dscores);
}

MultiLstmStream::MultiLstmStream(const MultiLstmParams& params,
                                 const MultiLstmConfig& config)
    : params_(params), config_(config) {
  config_.validate();
  params_.validate();
  if (params_.hidden_dim() != config_.hidden ||
      params_.output_window() != config_.outputs ||
      params_.attention.units() != config_.attention_units)
    throw ShapeError("MultiLstmStream: params do not match config");
  state_ = LstmState::zeros(config_.hidden);
}

Matrix MultiLstmStream::push(const Matrix& frames) {
  if (frames.cols != params_.input_dim())
    throw ShapeError("MultiLstmStream: frames " + frames.shape_str() +
                     ", expected cols " + std::to_string(params_.input_dim()));
  const int class_count = params_.class_count();
  const int window = config_.window;
  const int outputs = config_.outputs;

  std::vector<Vec> finalized;
  for (int t = 0; t < frames.rows; ++t) {
    const Vec frame = frames.row_vec(t);
    const Vec a_v_cur = tanh_matvec(params_.attention.W_va, frame);
    const Vec a_h = tanh_matvec(params_.attention.W_ha, state_.h);

    // Window: oldest tail frame first, current frame last.
    const int tail_len = static_cast<int>(tail_frames_.size());
    Vec logits(tail_len + 1);
    for (int r = 0; r < tail_len; ++r)
      logits[r] = attention_logit(params_.attention.w_ae, a_h, tail_a_v_[r]);
    logits[tail_len] = attention_logit(params_.attention.w_ae, a_h, a_v_cur);
    const Vec alpha = softmax(logits);

    Vec x(params_.input_dim(), 0.0);
    for (int r = 0; r < tail_len; ++r)
      accumulate_scaled(x, alpha[r], tail_frames_[r]);
    accumulate_scaled(x, alpha[tail_len], frame);

    const LstmStepCache step = detail::gate_step(params_.gates, x, state_);
    state_.h = step.h;
    state_.c = step.c;

    pending_sums_.push_back(Vec(class_count, 0.0));
    pending_counts_.push_back(0);

    const long global = frames_seen_;
    const int valid_heads =
        static_cast<int>(std::min<long>(outputs, global + 1));
    for (int k = 0; k < valid_heads; ++k) {
      const Vec scores = head_scores_for(params_.heads[k], state_.h);
      const std::size_t slot = pending_sums_.size() - 1 - k;
      for (int c = 0; c < class_count; ++c)
        pending_sums_[slot][c] += sigmoid(scores[c]);
      pending_counts_[slot] += 1;
    }
    ++frames_seen_;

    // A frame is final once no future step can still predict it.
    while (!pending_sums_.empty() &&
           static_cast<long>(pending_sums_.size()) > outputs - 1) {
      Vec row = std::move(pending_sums_.front());
      const int count = pending_counts_.front();
      pending_sums_.erase(pending_sums_.begin());
      pending_counts_.erase(pending_counts_.begin());
      for (int c = 0; c < class_count; ++c) row[c] /= count;
      finalized.push_back(std::move(row));
    }

    tail_frames_.push_back(frame);
    tail_a_v_.push_back(a_v_cur);
    if (static_cast<int>(tail_frames_.size()) > window - 1) {
      tail_frames_.erase(tail_frames_.begin());
      tail_a_v_.erase(tail_a_v_.begin());
    }
  }

  Matrix out(static_cast<int>(finalized.size()), class_count);
  for (int r = 0; r < out.rows; ++r) out.set_row(r, finalized[r]);
  return out;
}

Matrix MultiLstmStream::finish() {
  const int class_count = params_.class_count();
  Matrix out(static_cast<int>(pending_sums_.size()), class_count);
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < class_count; ++c)
      out(r, c) = pending_sums_[r][c] / pending_counts_[r];
  }
  pending_sums_.clear();
  pending_counts_.clear();
  tail_frames_.clear();
  tail_a_v_.clear();
  state_ = LstmState::zeros(config_.hidden);
  frames_seen_ = 0;
  return out;
}

MultilabelLossResult multilabel_loss(const Matrix& scores, const Matrix& labels,
                                     const std::vector<std::uint8_t>& mask) {
  if (!scores.same_shape(labels))
    throw ShapeError("multilabel_loss: scores " + scores.shape_str() +
                     " vs labels " + labels.shape_str());
  if (static_cast<int>(mask.size()) != scores.rows)
    throw ShapeError("multilabel_loss: mask length " +
                     std::to_string(mask.size()) + " vs " +
                     std::to_string(scores.rows) + " frames");
  MultilabelLossResult result;
  result.dscores = Matrix(scores.rows, scores.cols, 0.0);
  for (int t = 0; t < scores.rows; ++t) {
    if (!mask[t]) continue;
    for (int c = 0; c < scores.cols; ++c) {
      const double y = scores(t, c);
      const double z = labels(t, c);
      result.loss += bce_term(y, z);
      result.dscores(t, c) = sigmoid(y) - z;
    }
  }
  return result;
}

ShiftedLabels shift_labels(const Matrix& labels, int offset) {
  const int frames = labels.rows;
  if (std::abs(offset) >= frames)
    throw ArgumentError("shift_labels: |offset| " +
                        std::to_string(std::abs(offset)) +
                        " >= sequence length " + std::to_string(frames));
  ShiftedLabels out;
  out.labels = Matrix(frames, labels.cols, 0.0);
  out.mask.assign(frames, 0);
  for (int t = 0; t < frames; ++t) {
    const int src = t + offset;
    if (src < 0 || src >= frames) continue;
    out.labels.set_row(t, labels.row(src));
    out.mask[t] = 1;
  }
  return out;
}

}  // namespace multilstm
