#include "multilstm/optim.hpp"

#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

RmsPropState RmsPropState::init_like(const std::vector<ParamView>& params) {
  RmsPropState state;
  state.cache.reserve(params.size());
  for (const ParamView& p : params) state.cache.emplace_back(p.size, 0.0);
  return state;
}

void RmsPropState::validate_against(const std::vector<ParamView>& params) const {
  if (cache.size() != params.size())
    throw ShapeError("rmsprop: cache has " + std::to_string(cache.size()) +
                     " tensors, parameters have " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    if (cache[i].size() != params[i].size)
      throw ShapeError("rmsprop: cache tensor " + params[i].name + " has " +
                       std::to_string(cache[i].size()) + " entries, expected " +
                       std::to_string(params[i].size));
}

void rmsprop_update(const std::vector<ParamView>& params,
                    const std::vector<ParamView>& grads, RmsPropState& state,
                    const RmsPropOptions& options) {
  if (params.size() != grads.size())
    throw ShapeError("rmsprop_update: " + std::to_string(params.size()) +
                     " parameter tensors vs " + std::to_string(grads.size()) +
                     " gradient tensors");
  state.validate_against(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size)
      throw ShapeError("rmsprop_update: tensor " + params[i].name + " has " +
                       std::to_string(params[i].size) + " entries, gradient " +
                       std::to_string(grads[i].size));
    Vec& cache = state.cache[i];
    for (std::size_t j = 0; j < params[i].size; ++j) {
      const double g = grads[i].data[j];
      cache[j] = options.decay * cache[j] + (1.0 - options.decay) * g * g;
      params[i].data[j] -=
          options.learning_rate * g / (std::sqrt(cache[j]) + options.epsilon);
    }
  }
}

double global_norm(const std::vector<ParamView>& views) {
  double sq = 0.0;
  for (const ParamView& v : views)
    for (std::size_t j = 0; j < v.size; ++j) sq += v.data[j] * v.data[j];
  return std::sqrt(sq);
}

double clip_gradients(const std::vector<ParamView>& grads, double threshold) {
  if (threshold <= 0.0) throw ArgumentError("clip_gradients: threshold must be > 0");
  const double norm = global_norm(grads);
  if (norm > threshold) {
    const double scale = threshold / norm;
    for (const ParamView& v : grads)
      for (std::size_t j = 0; j < v.size; ++j) v.data[j] *= scale;
  }
  return norm;
}

}  // namespace multilstm
