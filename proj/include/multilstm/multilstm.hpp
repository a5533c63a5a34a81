#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "multilstm/lstm.hpp"
#include "multilstm/matrix.hpp"

namespace multilstm {

// Weights of the input soft-attention:
//   alpha_t proportional to exp( w_ae . [ tanh(W_ha h_prev) . tanh(W_va v_t) ] )
// normalized with a softmax over the input window.
struct AttentionParams {
  Vec w_ae;     // length A
  Matrix W_ha;  // A x H
  Matrix W_va;  // A x D

  int units() const { return static_cast<int>(w_ae.size()); }

  static AttentionParams zeros(int units, int hidden_dim, int input_dim);
  static AttentionParams init(int units, int hidden_dim, int input_dim,
                              Rng& rng);
  void validate(int hidden_dim, int input_dim) const;
};

struct MultiLstmConfig {
  int window = 15;           // W: current frame plus W-1 previous frames
  int outputs = 15;          // N: heads predicting frames i .. i-N+1
  int hidden = 512;          // H
  int attention_units = 50;  // A
  int offset = 0;            // s: row t of the output predicts labels at t+s
  double frame_rate = 10.0;  // frames per second

  void validate() const;
};

// LSTM gates plus N per-offset output heads plus the attention weights.
// heads[k] scores frame i-k from the step-i hidden state; with N = 1 only
// head 0 remains and the model collapses to the plain LSTM.
struct MultiLstmParams {
  GateParams gates;
  std::vector<OutputHead> heads;
  AttentionParams attention;

  int input_dim() const { return gates.input_dim(); }
  int hidden_dim() const { return gates.hidden_dim(); }
  int class_count() const { return heads.empty() ? 0 : heads[0].class_count(); }
  int output_window() const { return static_cast<int>(heads.size()); }

  static MultiLstmParams init(int input_dim, int hidden_dim, int class_count,
                              int attention_units, int output_window, Rng& rng);
  // Gate weights and head 0 copied from a plain LSTM; used by the reduction
  // tests (window = outputs = 1 must reproduce the LSTM bit for bit).
  static MultiLstmParams from_lstm(const LstmParams& lstm, int attention_units,
                                   Rng& attention_rng);
  void validate() const;
};

std::vector<ParamView> param_views(AttentionParams& a);
std::vector<ParamView> param_views(MultiLstmParams& p);

// Attention over a window of at most W frames; nonnegative, sums to 1,
// one weight per window frame. Empty window -> ArgumentError.
Vec attention_weights(const AttentionParams& attn, const Vec& h_prev,
                      const std::vector<std::span<const double>>& window);

// x = sum_t alpha_t v_t.
Vec attended_input(const Vec& alpha,
                   const std::vector<std::span<const double>>& window);

// per_step[i][k] is the probability vector step i emits for frame i-k; inner
// vectors are shorter near the sequence start where i-k < 0. Entry (t,c) of
// the result is the mean over all steps that predicted frame t.
Matrix consolidate_outputs(const std::vector<std::vector<Vec>>& per_step,
                           int total_frames, int class_count);

struct MultiLstmStepRecord {
  int window_begin;  // index into the cache's extended frame array
  Vec alpha;
  Vec a_h;  // tanh(W_ha h_prev)
  LstmStepCache lstm;
  std::vector<Vec> head_scores;  // raw scores, head_scores[k] for frame i-k
};

struct MultiLstmCache {
  int context_rows = 0;  // leading frames carried in from an earlier chunk
  Matrix frames_ext;     // (context_rows + T) x D
  Matrix a_v;            // tanh(W_va v) per extended frame, (context_rows+T) x A
  std::vector<MultiLstmStepRecord> steps;
  Vec counts;  // contributions per local frame
  int window = 0;
  int outputs = 0;
};

struct MultiLstmForwardResult {
  Matrix predictions;  // T x C consolidated probabilities in (0,1)
  LstmState final_state;
  MultiLstmCache cache;
};

// Full forward pass: per step, attention over the last `window` frames,
// one LSTM update, sigmoid scores from every valid head, count-based
// averaging into per-frame predictions. `context` optionally supplies up to
// window-1 trailing frames of the previous chunk so streamed chunks see the
// same attention windows as a full pass; head predictions into the previous
// chunk are not emitted (backprop is confined to the chunk anyway).
MultiLstmForwardResult multilstm_forward(const MultiLstmParams& params,
                                         const Matrix& features,
                                         const MultiLstmConfig& config,
                                         const LstmState& init,
                                         const Matrix* context = nullptr);

struct MultiLstmGradients {
  GateParams gates;
  std::vector<OutputHead> heads;
  AttentionParams attention;
  LstmState init_state;

  static MultiLstmGradients zeros(const MultiLstmParams& params);
};

std::vector<ParamView> gradient_views(MultiLstmGradients& g);

// Backward from the consolidated predictions, through the 1/count averaging,
// the per-head sigmoids, the LSTM recurrence, and the attention softmax
// Jacobian (including w_ae, W_ha, W_va).
MultiLstmGradients multilstm_backward(const MultiLstmParams& params,
                                      const MultiLstmCache& cache,
                                      const Matrix& dpredictions);

// Backward from raw head scores (same ragged layout as the cache's
// head_scores); the training loss attaches here.
MultiLstmGradients multilstm_backward_scores(
    const MultiLstmParams& params, const MultiLstmCache& cache,
    const std::vector<std::vector<Vec>>& dscores);

// Streaming inference with exact carryover: hidden/cell state, the trailing
// window-1 frames, and partially-consolidated head sums all carry across
// push() calls, so chunked output equals a single full-sequence forward bit
// for bit.
class MultiLstmStream {
 public:
  MultiLstmStream(const MultiLstmParams& params, const MultiLstmConfig& config);

  // Consume frames; returns the prediction rows finalized by this push.
  Matrix push(const Matrix& frames);
  // Flush the still-pending rows; the stream then starts a fresh sequence.
  Matrix finish();

  const LstmState& state() const { return state_; }

 private:
  const MultiLstmParams& params_;
  MultiLstmConfig config_;
  LstmState state_;
  std::vector<Vec> tail_frames_;  // last window-1 frames
  std::vector<Vec> tail_a_v_;
  std::vector<Vec> pending_sums_;  // per not-yet-final frame
  std::vector<int> pending_counts_;
  long frames_seen_ = 0;
};

// Summed per-class logistic losses over unmasked frames:
//   loss = sum max(y,0) - y z + log(1 + exp(-|y|)),  d loss / dy = sigma(y) - z.
// Stable for |y| up to 500 and beyond. mask[t] == 0 excludes frame t.
struct MultilabelLossResult {
  double loss = 0.0;
  Matrix dscores;
};

MultilabelLossResult multilabel_loss(const Matrix& scores, const Matrix& labels,
                                     const std::vector<std::uint8_t>& mask);

// Offset training targets: shifted[t] = labels[t+offset] where that lands in
// range; boundary frames get mask 0. |offset| >= T -> ArgumentError.
struct ShiftedLabels {
  Matrix labels;
  std::vector<std::uint8_t> mask;
};

ShiftedLabels shift_labels(const Matrix& labels, int offset);

}  // namespace multilstm
