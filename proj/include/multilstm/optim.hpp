#pragma once

#include <vector>

#include "multilstm/lstm.hpp"
#include "multilstm/matrix.hpp"

namespace multilstm {

struct RmsPropOptions {
  double learning_rate = 1e-3;  // eta
  double decay = 0.95;          // rho
  double epsilon = 1e-8;
};

// Per-parameter squared-gradient cache, aligned with the canonical
// param_views order. Entries are always >= 0.
struct RmsPropState {
  std::vector<Vec> cache;

  static RmsPropState init_like(const std::vector<ParamView>& params);
  void validate_against(const std::vector<ParamView>& params) const;
};

// cache <- rho * cache + (1 - rho) * g^2 ; theta <- theta - eta * g / (sqrt(cache) + eps).
void rmsprop_update(const std::vector<ParamView>& params,
                    const std::vector<ParamView>& grads, RmsPropState& state,
                    const RmsPropOptions& options);

// Scales all gradients so the global L2 norm is at most `threshold`.
// Returns the pre-clip norm.
double clip_gradients(const std::vector<ParamView>& grads, double threshold);

double global_norm(const std::vector<ParamView>& views);

}  // namespace multilstm
