#include "multilstm/lstm.hpp"

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

Vec uniform_vec(int n, int fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Vec v(n);
  for (double& e : v) e = rng.uniform(-s, s);
  return v;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

}  // namespace

GateParams GateParams::zeros(int input_dim, int hidden_dim) {
  GateParams g;
  g.W_xi = Matrix(hidden_dim, input_dim);
  g.W_hi = Matrix(hidden_dim, hidden_dim);
  g.b_i = Vec(hidden_dim, 0.0);
  g.W_xf = Matrix(hidden_dim, input_dim);
  g.W_hf = Matrix(hidden_dim, hidden_dim);
  g.b_f = Vec(hidden_dim, 0.0);
  g.W_xo = Matrix(hidden_dim, input_dim);
  g.W_ho = Matrix(hidden_dim, hidden_dim);
  g.b_o = Vec(hidden_dim, 0.0);
  g.W_xc = Matrix(hidden_dim, input_dim);
  g.W_hc = Matrix(hidden_dim, hidden_dim);
  g.b_c = Vec(hidden_dim, 0.0);
  return g;
}

GateParams GateParams::init(int input_dim, int hidden_dim, Rng& rng) {
  GateParams g;
  g.W_xi = uniform_matrix(hidden_dim, input_dim, input_dim, rng);
  g.W_hi = uniform_matrix(hidden_dim, hidden_dim, hidden_dim, rng);
  g.b_i = Vec(hidden_dim, 0.0);
  g.W_xf = uniform_matrix(hidden_dim, input_dim, input_dim, rng);
  g.W_hf = uniform_matrix(hidden_dim, hidden_dim, hidden_dim, rng);
  g.b_f = Vec(hidden_dim, 1.0);  // retain memory early in training
  g.W_xo = uniform_matrix(hidden_dim, input_dim, input_dim, rng);
  g.W_ho = uniform_matrix(hidden_dim, hidden_dim, hidden_dim, rng);
  g.b_o = Vec(hidden_dim, 0.0);
  g.W_xc = uniform_matrix(hidden_dim, input_dim, input_dim, rng);
  g.W_hc = uniform_matrix(hidden_dim, hidden_dim, hidden_dim, rng);
  g.b_c = Vec(hidden_dim, 0.0);
  return g;
}

void GateParams::validate() const {
  const int d = input_dim();
  const int h = hidden_dim();
  auto shp = [&](const Matrix& m, int r, int c, const char* name) {
    require(m.rows == r && m.cols == c,
            std::string(name) + " is " + m.shape_str() + ", expected " +
                std::to_string(r) + "x" + std::to_string(c));
  };
  shp(W_xi, h, d, "W_xi");
  shp(W_hi, h, h, "W_hi");
  shp(W_xf, h, d, "W_xf");
  shp(W_hf, h, h, "W_hf");
  shp(W_xo, h, d, "W_xo");
  shp(W_ho, h, h, "W_ho");
  shp(W_xc, h, d, "W_xc");
  shp(W_hc, h, h, "W_hc");
  require(static_cast<int>(b_i.size()) == h && static_cast<int>(b_f.size()) == h &&
              static_cast<int>(b_o.size()) == h && static_cast<int>(b_c.size()) == h,
          "gate biases must have length " + std::to_string(h));
}

OutputHead OutputHead::zeros(int hidden_dim, int class_count) {
  OutputHead o;
  o.W_hy = Matrix(class_count, hidden_dim);
  o.b_y = Vec(class_count, 0.0);
  return o;
}

OutputHead OutputHead::init(int hidden_dim, int class_count, Rng& rng) {
  OutputHead o;
  o.W_hy = uniform_matrix(class_count, hidden_dim, hidden_dim, rng);
  o.b_y = uniform_vec(class_count, hidden_dim, rng);
  return o;
}

LstmParams LstmParams::zeros(int input_dim, int hidden_dim, int class_count) {
  return {GateParams::zeros(input_dim, hidden_dim),
          OutputHead::zeros(hidden_dim, class_count)};
}

LstmParams LstmParams::init(int input_dim, int hidden_dim, int class_count,
                            Rng& rng) {
  return {GateParams::init(input_dim, hidden_dim, rng),
          OutputHead::init(hidden_dim, class_count, rng)};
}

void LstmParams::validate() const {
  gates.validate();
  require(head.W_hy.cols == hidden_dim(),
          "W_hy is " + head.W_hy.shape_str() + ", expected cols " +
              std::to_string(hidden_dim()));
  require(static_cast<int>(head.b_y.size()) == class_count(),
          "b_y must have length " + std::to_string(class_count()));
}

LstmState LstmState::zeros(int hidden_dim) {
  return {Vec(hidden_dim, 0.0), Vec(hidden_dim, 0.0)};
}

namespace detail {

LstmStepCache gate_step(const GateParams& g, const Vec& x,
                        const LstmState& state) {
  const int h_dim = g.hidden_dim();
  if (static_cast<int>(x.size()) != g.input_dim())
    throw ShapeError("lstm_step: input length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(g.input_dim()));
  if (static_cast<int>(state.h.size()) != h_dim ||
      static_cast<int>(state.c.size()) != h_dim)
    throw ShapeError("lstm_step: state dimension " +
                     std::to_string(state.h.size()) + ", expected " +
                     std::to_string(h_dim));

  LstmStepCache cache;
  cache.x = x;
  cache.h_prev = state.h;
  cache.c_prev = state.c;

  Vec ai = matvec(g.W_xi, x);
  Vec af = matvec(g.W_xf, x);
  Vec ao = matvec(g.W_xo, x);
  Vec ag = matvec(g.W_xc, x);
  const Vec hi = matvec(g.W_hi, state.h);
  const Vec hf = matvec(g.W_hf, state.h);
  const Vec ho = matvec(g.W_ho, state.h);
  const Vec hg = matvec(g.W_hc, state.h);

  cache.i.resize(h_dim);
  cache.f.resize(h_dim);
  cache.o.resize(h_dim);
  cache.g.resize(h_dim);
  cache.c.resize(h_dim);
  cache.tanh_c.resize(h_dim);
  cache.h.resize(h_dim);
  for (int k = 0; k < h_dim; ++k) {
    cache.i[k] = sigmoid(ai[k] + hi[k] + g.b_i[k]);
    cache.f[k] = sigmoid(af[k] + hf[k] + g.b_f[k]);
    cache.o[k] = sigmoid(ao[k] + ho[k] + g.b_o[k]);
    cache.g[k] = std::tanh(ag[k] + hg[k] + g.b_c[k]);
    cache.c[k] = cache.f[k] * state.c[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = cache.o[k] * cache.tanh_c[k];
  }
  return cache;
}

}  // namespace detail

LstmStepResult lstm_step(const LstmParams& params, const Vec& x,
                         const LstmState& state) {
  LstmStepResult result;
  LstmStepCache cache = detail::gate_step(params.gates, x, state);
  result.state = {cache.h, cache.c};
  result.scores = matvec(params.head.W_hy, cache.h);
  for (int c = 0; c < params.class_count(); ++c)
    result.scores[c] += params.head.b_y[c];
  result.cache = std::move(cache);
  return result;
}

LstmForwardResult lstm_forward(const LstmParams& params, const Matrix& xs,
                               const LstmState& init) {
  if (xs.rows < 1) throw ArgumentError("lstm_forward: empty sequence");
  LstmForwardResult result;
  result.scores = Matrix(xs.rows, params.class_count());
  result.cache.reserve(xs.rows);
  LstmState state = init;
  for (int t = 0; t < xs.rows; ++t) {
    LstmStepResult step = lstm_step(params, xs.row_vec(t), state);
    result.scores.set_row(t, step.scores);
    state = std::move(step.state);
    result.cache.push_back(std::move(step.cache));
  }
  result.final_state = std::move(state);
  return result;
}

LstmGradients LstmGradients::zeros(const LstmParams& params, int steps) {
  LstmGradients grads;
  grads.gates = GateParams::zeros(params.input_dim(), params.hidden_dim());
  grads.head = OutputHead::zeros(params.hidden_dim(), params.class_count());
  grads.init_state = LstmState::zeros(params.hidden_dim());
  grads.inputs = Matrix(steps, params.input_dim());
  return grads;
}

namespace detail {

void gate_step_backward(const GateParams& params, const LstmStepCache& cache,
                        const Vec& dh, const Vec& dc_in, GateParams& grads,
                        Vec& dx, Vec& dh_prev, Vec& dc_prev) {
  const int h_dim = params.hidden_dim();
  Vec da_i(h_dim), da_f(h_dim), da_o(h_dim), da_g(h_dim);
  dc_prev.assign(h_dim, 0.0);
  for (int k = 0; k < h_dim; ++k) {
    const double do_k = dh[k] * cache.tanh_c[k];
    const double dc_k =
        dc_in[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double di_k = dc_k * cache.g[k];
    const double df_k = dc_k * cache.c_prev[k];
    const double dg_k = dc_k * cache.i[k];
    dc_prev[k] = dc_k * cache.f[k];
    da_i[k] = di_k * cache.i[k] * (1.0 - cache.i[k]);
    da_f[k] = df_k * cache.f[k] * (1.0 - cache.f[k]);
    da_o[k] = do_k * cache.o[k] * (1.0 - cache.o[k]);
    da_g[k] = dg_k * (1.0 - cache.g[k] * cache.g[k]);
    grads.b_i[k] += da_i[k];
    grads.b_f[k] += da_f[k];
    grads.b_o[k] += da_o[k];
    grads.b_c[k] += da_g[k];
  }
  add_outer(grads.W_xi, da_i, cache.x);
  add_outer(grads.W_xf, da_f, cache.x);
  add_outer(grads.W_xo, da_o, cache.x);
  add_outer(grads.W_xc, da_g, cache.x);
  add_outer(grads.W_hi, da_i, cache.h_prev);
  add_outer(grads.W_hf, da_f, cache.h_prev);
  add_outer(grads.W_ho, da_o, cache.h_prev);
  add_outer(grads.W_hc, da_g, cache.h_prev);

  dx = tmatvec(params.W_xi, da_i);
  dh_prev = tmatvec(params.W_hi, da_i);
  const Vec dxf = tmatvec(params.W_xf, da_f);
  const Vec dhf = tmatvec(params.W_hf, da_f);
  const Vec dxo = tmatvec(params.W_xo, da_o);
  const Vec dho = tmatvec(params.W_ho, da_o);
  const Vec dxg = tmatvec(params.W_xc, da_g);
  const Vec dhg = tmatvec(params.W_hc, da_g);
  for (int j = 0; j < params.input_dim(); ++j) dx[j] += dxf[j] + dxo[j] + dxg[j];
  for (int k = 0; k < h_dim; ++k) dh_prev[k] += dhf[k] + dho[k] + dhg[k];
}

}  // namespace detail

LstmGradients lstm_backward(const LstmParams& params,
                            const std::vector<LstmStepCache>& cache,
                            const Matrix& dscores) {
  const int steps = static_cast<int>(cache.size());
  if (steps == 0) throw ArgumentError("lstm_backward: empty cache");
  if (dscores.rows != steps || dscores.cols != params.class_count())
    throw ShapeError("lstm_backward: upstream gradient " + dscores.shape_str() +
                     ", expected " + std::to_string(steps) + "x" +
                     std::to_string(params.class_count()));
  for (const LstmStepCache& c : cache)
    if (static_cast<int>(c.x.size()) != params.input_dim() ||
        static_cast<int>(c.h.size()) != params.hidden_dim())
      throw ConsistencyError("lstm_backward: cache does not match parameters");

  LstmGradients grads = LstmGradients::zeros(params, steps);
  const int h_dim = params.hidden_dim();
  Vec dh_next(h_dim, 0.0), dc_next(h_dim, 0.0);
  Vec dx, dh_prev, dc_prev;
  for (int t = steps - 1; t >= 0; --t) {
    const Vec dy = dscores.row_vec(t);
    Vec dh = tmatvec(params.head.W_hy, dy);
    for (int k = 0; k < h_dim; ++k) dh[k] += dh_next[k];
    add_outer(grads.head.W_hy, dy, cache[t].h);
    for (int c = 0; c < params.class_count(); ++c) grads.head.b_y[c] += dy[c];

    detail::gate_step_backward(params.gates, cache[t], dh, dc_next, grads.gates,
                               dx, dh_prev, dc_prev);
    grads.inputs.set_row(t, dx);
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
    dc_prev = Vec();
  }
  grads.init_state.h = std::move(dh_next);
  grads.init_state.c = std::move(dc_next);
  return grads;
}

std::vector<ParamView> param_views(GateParams& g) {
  return {
      {"W_xi", g.W_xi.data.data(), g.W_xi.data.size()},
      {"W_hi", g.W_hi.data.data(), g.W_hi.data.size()},
      {"b_i", g.b_i.data(), g.b_i.size()},
      {"W_xf", g.W_xf.data.data(), g.W_xf.data.size()},
      {"W_hf", g.W_hf.data.data(), g.W_hf.data.size()},
      {"b_f", g.b_f.data(), g.b_f.size()},
      {"W_xo", g.W_xo.data.data(), g.W_xo.data.size()},
      {"W_ho", g.W_ho.data.data(), g.W_ho.data.size()},
      {"b_o", g.b_o.data(), g.b_o.size()},
      {"W_xc", g.W_xc.data.data(), g.W_xc.data.size()},
      {"W_hc", g.W_hc.data.data(), g.W_hc.data.size()},
      {"b_c", g.b_c.data(), g.b_c.size()},
  };
}

std::vector<ParamView> param_views(LstmParams& p) {
  std::vector<ParamView> views = param_views(p.gates);
  views.push_back({"W_hy", p.head.W_hy.data.data(), p.head.W_hy.data.size()});
  views.push_back({"b_y", p.head.b_y.data(), p.head.b_y.size()});
  return views;
}

Vec flatten(const std::vector<ParamView>& views) {
  std::size_t total = 0;
  for (const auto& v : views) total += v.size;
  Vec flat;
  flat.reserve(total);
  for (const auto& v : views) flat.insert(flat.end(), v.data, v.data + v.size);
  return flat;
}

void unflatten(std::span<const double> flat, const std::vector<ParamView>& views) {
  std::size_t total = 0;
  for (const auto& v : views) total += v.size;
  if (flat.size() != total)
    throw ShapeError("unflatten: " + std::to_string(flat.size()) +
                     " values into views of total size " + std::to_string(total));
  std::size_t offset = 0;
  for (const auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i) v.data[i] = flat[offset + i];
    offset += v.size;
  }
}

}  // namespace multilstm
