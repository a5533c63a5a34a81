#include "multilstm/verify.hpp"

#include <cmath>

#include "multilstm/gradcheck.hpp"
#include "multilstm/multilstm.hpp"

namespace multilstm {

namespace {

constexpr double kTolerance = 1e-4;

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

Matrix random_labels(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return m;
}

// Probability-level cross entropy used only to drive the consolidated-path
// check; the analytic gradient w.r.t. a prediction p is (p - z) / (p (1 - p)).
double prob_bce(const Matrix& predictions, const Matrix& labels) {
  double loss = 0.0;
  for (int t = 0; t < predictions.rows; ++t)
    for (int c = 0; c < predictions.cols; ++c) {
      const double p = predictions(t, c);
      const double z = labels(t, c);
      loss += -(z * std::log(p) + (1.0 - z) * std::log(1.0 - p));
    }
  return loss;
}

GradCheckEntry check(const std::string& component, const Vec& analytic,
                     const Vec& numeric) {
  GradCheckEntry entry;
  entry.component = component;
  entry.tolerance = kTolerance;
  entry.max_rel_error = max_relative_error(analytic, numeric);
  entry.pass = entry.max_rel_error < kTolerance;
  return entry;
}

GradCheckEntry check_lstm(std::uint64_t seed, const GradCheckDims& dims,
                          GradCheckEntry* init_state_entry) {
  Rng rng(seed);
  Rng init_rng = rng.split(1);
  LstmParams params =
      LstmParams::init(dims.input_dim, dims.hidden, dims.classes, init_rng);
  const Matrix xs = random_matrix(dims.frames, dims.input_dim, rng);
  const Matrix labels = random_labels(dims.frames, dims.classes, rng);
  LstmState init = LstmState::zeros(dims.hidden);
  for (double& v : init.h) v = rng.uniform(-0.5, 0.5);
  for (double& v : init.c) v = rng.uniform(-0.5, 0.5);
  const std::vector<std::uint8_t> mask(dims.frames, 1);

  auto loss_at = [&](std::span<const double> flat) {
    LstmParams probe = params;
    unflatten(flat, param_views(probe));
    const LstmForwardResult fwd = lstm_forward(probe, xs, init);
    return multilabel_loss(fwd.scores, labels, mask).loss;
  };

  const LstmForwardResult fwd = lstm_forward(params, xs, init);
  const MultilabelLossResult loss = multilabel_loss(fwd.scores, labels, mask);
  LstmGradients grads = lstm_backward(params, fwd.cache, loss.dscores);

  LstmParams grad_holder;
  grad_holder.gates = grads.gates;
  grad_holder.head = grads.head;
  const Vec analytic = flatten(param_views(grad_holder));
  const Vec theta = flatten(param_views(params));
  const Vec numeric = finite_diff_gradient(loss_at, theta);
  GradCheckEntry entry = check("lstm_backward", analytic, numeric);

  if (init_state_entry != nullptr) {
    // Same scalar as a function of the incoming state.
    auto loss_at_state = [&](std::span<const double> flat) {
      LstmState probe;
      probe.h.assign(flat.begin(), flat.begin() + dims.hidden);
      probe.c.assign(flat.begin() + dims.hidden, flat.end());
      const LstmForwardResult f = lstm_forward(params, xs, probe);
      return multilabel_loss(f.scores, labels, mask).loss;
    };
    Vec state_flat(init.h);
    state_flat.insert(state_flat.end(), init.c.begin(), init.c.end());
    Vec state_analytic(grads.init_state.h);
    state_analytic.insert(state_analytic.end(), grads.init_state.c.begin(),
                          grads.init_state.c.end());
    const Vec state_numeric = finite_diff_gradient(loss_at_state, state_flat);
    *init_state_entry =
        check("lstm_backward_init_state", state_analytic, state_numeric);
  }
  return entry;
}

MultiLstmConfig config_for(const GradCheckDims& dims) {
  MultiLstmConfig config;
  config.window = dims.window;
  config.outputs = dims.outputs;
  config.hidden = dims.hidden;
  config.attention_units = dims.attention_units;
  return config;
}

GradCheckEntry check_multilstm_predictions(std::uint64_t seed,
                                           const GradCheckDims& dims) {
  Rng rng(seed);
  Rng init_rng = rng.split(2);
  const MultiLstmConfig config = config_for(dims);
  MultiLstmParams params =
      MultiLstmParams::init(dims.input_dim, dims.hidden, dims.classes,
                            dims.attention_units, dims.outputs, init_rng);
  const Matrix xs = random_matrix(dims.frames, dims.input_dim, rng);
  const Matrix labels = random_labels(dims.frames, dims.classes, rng);
  LstmState init = LstmState::zeros(dims.hidden);
  for (double& v : init.h) v = rng.uniform(-0.5, 0.5);
  for (double& v : init.c) v = rng.uniform(-0.5, 0.5);

  auto loss_at = [&](std::span<const double> flat) {
    MultiLstmParams probe = params;
    unflatten(flat, param_views(probe));
    return prob_bce(multilstm_forward(probe, xs, config, init).predictions,
                    labels);
  };

  const MultiLstmForwardResult fwd = multilstm_forward(params, xs, config, init);
  Matrix dpred(dims.frames, dims.classes);
  for (int t = 0; t < dims.frames; ++t)
    for (int c = 0; c < dims.classes; ++c) {
      const double p = fwd.predictions(t, c);
      dpred(t, c) = (p - labels(t, c)) / (p * (1.0 - p));
    }
  MultiLstmGradients grads = multilstm_backward(params, fwd.cache, dpred);

  const Vec analytic = flatten(gradient_views(grads));
  const Vec theta = flatten(param_views(params));
  const Vec numeric = finite_diff_gradient(loss_at, theta);
  return check("multilstm_backward_predictions", analytic, numeric);
}

// The masked per-head training loss, with and without carried context.
GradCheckEntry check_multilstm_training(std::uint64_t seed,
                                        const GradCheckDims& dims,
                                        bool with_context) {
  Rng rng(seed);
  Rng init_rng = rng.split(3);
  const MultiLstmConfig config = config_for(dims);
  MultiLstmParams params =
      MultiLstmParams::init(dims.input_dim, dims.hidden, dims.classes,
                            dims.attention_units, dims.outputs, init_rng);
  const Matrix xs = random_matrix(dims.frames, dims.input_dim, rng);
  const Matrix labels = random_labels(dims.frames, dims.classes, rng);
  const Matrix context =
      random_matrix(std::max(1, dims.window - 1), dims.input_dim, rng);
  LstmState init = LstmState::zeros(dims.hidden);
  for (double& v : init.h) v = rng.uniform(-0.5, 0.5);
  for (double& v : init.c) v = rng.uniform(-0.5, 0.5);
  std::vector<std::uint8_t> mask(dims.frames, 1);
  mask[0] = 0;
  mask[dims.frames - 1] = 0;

  auto head_loss = [&](const MultiLstmCache& cache,
                       std::vector<std::vector<Vec>>* dscores) {
    double total = 0.0;
    for (std::size_t i = 0; i < cache.steps.size(); ++i) {
      const MultiLstmStepRecord& rec = cache.steps[i];
      if (dscores != nullptr) (*dscores)[i].resize(rec.head_scores.size());
      for (std::size_t k = 0; k < rec.head_scores.size(); ++k) {
        const int target = static_cast<int>(i) - static_cast<int>(k);
        if (dscores != nullptr)
          (*dscores)[i][k].assign(dims.classes, 0.0);
        if (!mask[target]) continue;
        for (int c = 0; c < dims.classes; ++c) {
          const double y = rec.head_scores[k][c];
          const double z = labels(target, c);
          total += std::max(y, 0.0) - y * z + std::log1p(std::exp(-std::abs(y)));
          if (dscores != nullptr)
            (*dscores)[i][k][c] = sigmoid(y) - z;
        }
      }
    }
    return total;
  };

  const Matrix* ctx = with_context ? &context : nullptr;
  auto loss_at = [&](std::span<const double> flat) {
    MultiLstmParams probe = params;
    unflatten(flat, param_views(probe));
    return head_loss(multilstm_forward(probe, xs, config, init, ctx).cache,
                     nullptr);
  };

  const MultiLstmForwardResult fwd =
      multilstm_forward(params, xs, config, init, ctx);
  std::vector<std::vector<Vec>> dscores(fwd.cache.steps.size());
  head_loss(fwd.cache, &dscores);
  MultiLstmGradients grads =
      multilstm_backward_scores(params, fwd.cache, dscores);

  const Vec analytic = flatten(gradient_views(grads));
  const Vec theta = flatten(param_views(params));
  const Vec numeric = finite_diff_gradient(loss_at, theta);
  return check(with_context ? "multilstm_backward_chunk_context"
                            : "multilstm_backward_training_loss",
               analytic, numeric);
}

}  // namespace

bool GradCheckReport::all_pass() const {
  for (const GradCheckEntry& e : entries)
    if (!e.pass) return false;
  return !entries.empty();
}

GradCheckReport run_gradcheck(std::uint64_t seed, const GradCheckDims& dims) {
  GradCheckReport report;
  GradCheckEntry init_state;
  report.entries.push_back(check_lstm(seed, dims, &init_state));
  report.entries.push_back(init_state);
  report.entries.push_back(check_multilstm_predictions(seed, dims));
  report.entries.push_back(check_multilstm_training(seed, dims, false));
  report.entries.push_back(check_multilstm_training(seed, dims, true));
  return report;
}

}  // namespace multilstm
