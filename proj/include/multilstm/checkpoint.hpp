#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "multilstm/multilstm.hpp"
#include "multilstm/optim.hpp"

namespace multilstm {

// Single-frame logistic baseline: per-class score W x + b.
struct LogisticParams {
  Matrix W;  // C x D
  Vec b;     // C

  static LogisticParams zeros(int input_dim, int class_count);
};

std::vector<ParamView> param_views(LogisticParams& p);

struct TrainConfig {
  int minibatch = 32;
  int epochs = 1;
  std::uint64_t seed = 0;
  double clip = 5.0;  // global-norm gradient clip
  RmsPropOptions rmsprop;
};

// Everything needed to resume or evaluate a run: model kind and config, the
// class vocabulary, training hyperparameters, epoch counter, all parameter
// tensors and the optimizer cache. Round-trips bit-exactly through
// save/load: a versioned text header (format id, config, tensor directory)
// followed by raw little-endian 64-bit floats in the declared tensor order,
// parameters first, then the optimizer cache in the same order.
struct Checkpoint {
  std::string kind;  // "multilstm" or "logistic"
  MultiLstmConfig config;
  int input_dim = 0;
  std::vector<std::string> classes;
  TrainConfig train_config;
  int epoch = 0;
  MultiLstmParams params;    // kind == "multilstm"
  LogisticParams logistic;   // kind == "logistic"
  RmsPropState opt;

  std::vector<ParamView> parameter_views();
};

void save_checkpoint(const std::filesystem::path& path, Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Shortest text rendering that parses back to the same double.
std::string format_double(double value);

}  // namespace multilstm
