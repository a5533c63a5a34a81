#pragma once

#include <string>
#include <vector>

#include "multilstm/matrix.hpp"
#include "multilstm/rng.hpp"

namespace multilstm {

// Gate weights and biases shared by the plain LSTM and the MultiLSTM:
//   i = sigma(W_xi x + W_hi h + b_i)      f = sigma(W_xf x + W_hf h + b_f)
//   o = sigma(W_xo x + W_ho h + b_o)      g = tanh(W_xc x + W_hc h + b_c)
//   c' = f.c + i.g                        h' = o.tanh(c')
struct GateParams {
  Matrix W_xi, W_hi;
  Vec b_i;
  Matrix W_xf, W_hf;
  Vec b_f;
  Matrix W_xo, W_ho;
  Vec b_o;
  Matrix W_xc, W_hc;
  Vec b_c;

  int input_dim() const { return W_xi.cols; }
  int hidden_dim() const { return W_xi.rows; }

  static GateParams zeros(int input_dim, int hidden_dim);
  // Uniform in [-s, s] with s = 1/sqrt(fan-in); forget bias starts at 1.
  static GateParams init(int input_dim, int hidden_dim, Rng& rng);
  void validate() const;
};

// Output projection y = W_hy h + b_y.
struct OutputHead {
  Matrix W_hy;
  Vec b_y;

  int class_count() const { return W_hy.rows; }

  static OutputHead zeros(int hidden_dim, int class_count);
  static OutputHead init(int hidden_dim, int class_count, Rng& rng);
};

struct LstmParams {
  GateParams gates;
  OutputHead head;

  int input_dim() const { return gates.input_dim(); }
  int hidden_dim() const { return gates.hidden_dim(); }
  int class_count() const { return head.class_count(); }

  static LstmParams zeros(int input_dim, int hidden_dim, int class_count);
  static LstmParams init(int input_dim, int hidden_dim, int class_count,
                         Rng& rng);
  void validate() const;
};

// Hidden vector h and cell memory c. |h| entries stay below 1 since h is a
// product of a gate in (0,1) and a tanh in (-1,1).
struct LstmState {
  Vec h, c;

  static LstmState zeros(int hidden_dim);
};

// Per-step activations kept for the backward pass.
struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, o, g;
  Vec c, tanh_c, h;
};

struct LstmStepResult {
  LstmState state;
  Vec scores;  // W_hy h' + b_y
  LstmStepCache cache;
};

LstmStepResult lstm_step(const LstmParams& params, const Vec& x,
                         const LstmState& state);

struct LstmForwardResult {
  Matrix scores;  // T x C raw scores
  LstmState final_state;
  std::vector<LstmStepCache> cache;
};

// Iterated lstm_step over the rows of xs. The final state is returned so a
// caller can stream a long sequence in chunks and get bit-identical scores.
LstmForwardResult lstm_forward(const LstmParams& params, const Matrix& xs,
                               const LstmState& init);

// Gradient holder mirroring LstmParams, plus the gradient w.r.t. the incoming
// state and the inputs. The trainer never propagates the state gradient
// across minibatch boundaries (truncated backprop); the input gradient feeds
// the attention path of the MultiLSTM.
struct LstmGradients {
  GateParams gates;
  OutputHead head;
  LstmState init_state;
  Matrix inputs;  // T x D

  static LstmGradients zeros(const LstmParams& params, int steps);
};

LstmGradients lstm_backward(const LstmParams& params,
                            const std::vector<LstmStepCache>& cache,
                            const Matrix& dscores);

// Flat named view over every learnable coordinate; the one canonical tensor
// order used by the optimizer, the gradient check and the checkpoint format.
struct ParamView {
  std::string name;
  double* data;
  std::size_t size;
};

std::vector<ParamView> param_views(GateParams& g);
std::vector<ParamView> param_views(LstmParams& p);

Vec flatten(const std::vector<ParamView>& views);
void unflatten(std::span<const double> flat, const std::vector<ParamView>& views);

namespace detail {

// One LSTM cell update without the output projection; shared by the plain
// LSTM and the MultiLSTM.
LstmStepCache gate_step(const GateParams& params, const Vec& x,
                        const LstmState& state);

// One step of gate backprop. Accumulates parameter gradients into `grads`,
// writes gradients w.r.t. the step input and incoming state.
void gate_step_backward(const GateParams& params, const LstmStepCache& cache,
                        const Vec& dh, const Vec& dc_in, GateParams& grads,
                        Vec& dx, Vec& dh_prev, Vec& dc_prev);

}  // namespace detail

}  // namespace multilstm
