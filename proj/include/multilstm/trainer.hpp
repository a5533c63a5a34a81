#pragma once

#include "multilstm/checkpoint.hpp"
#include "multilstm/dataset.hpp"

namespace multilstm {

struct TrainResult {
  Checkpoint checkpoint;
  // epoch_loss[0] is the mean per-frame loss at initialization, then one
  // entry per trained epoch.
  std::vector<double> epoch_loss;
};

// RMSProp with stateful minibatch streaming: per video, fixed-length frame
// minibatches in order, carrying hidden/cell state and the trailing window-1
// frames across chunks (exact forward); gradients are confined to each
// minibatch and the incoming-state gradient is discarded (truncated
// backprop); state resets at video boundaries; video order reshuffles per
// epoch from the seed. Per-head logistic losses against offset-shifted
// labels, normalized by the chunk's unmasked frame count, clipped by global
// norm. Deterministic given (dataset, config, seed).
TrainResult train_multilstm(const Dataset& train, const MultiLstmConfig& config,
                            const TrainConfig& train_config);

// Same streaming loop for the single-frame logistic baseline.
TrainResult train_logistic(const Dataset& train, int offset,
                           const TrainConfig& train_config);

// Full-video probabilities from a checkpoint (streamed for the MultiLSTM,
// row-wise for the logistic baseline). Row t is the prediction the model
// makes about label frame t + offset.
Matrix predict_video(const Checkpoint& checkpoint, const Matrix& features);

}  // namespace multilstm
