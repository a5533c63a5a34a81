#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace multilstm {

struct GradCheckDims {
  int input_dim = 4;
  int hidden = 5;
  int classes = 3;
  int attention_units = 4;
  int window = 3;
  int outputs = 2;
  int frames = 9;
};

struct GradCheckEntry {
  std::string component;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool all_pass() const;
};

// Checks every parameter coordinate of the LSTM and MultiLSTM backward
// passes against the central finite-difference oracle at 1e-4 relative
// tolerance: the plain LSTM under the multilabel loss, the MultiLSTM through
// the consolidated predictions, the MultiLSTM under the masked training
// loss, and a chunked call with carried context frames.
GradCheckReport run_gradcheck(std::uint64_t seed,
                              const GradCheckDims& dims = GradCheckDims{});

}  // namespace multilstm
