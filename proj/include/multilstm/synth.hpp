#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "multilstm/dataset.hpp"
#include "multilstm/rng.hpp"

namespace multilstm {

struct DurationRange {
  int min_frames = 1;
  int max_frames = 1;
  bool match_trigger = false;  // consequence copies the trigger's length
};

// Planted temporal structure. Every rule is a constructive guarantee the
// generated annotations satisfy with zero violations:
//   follows  - each trigger instance is echoed by a consequence instance
//              starting exactly `lag` frames after the trigger start;
//   cooccur  - the partner spans the same interval as each trigger instance;
//   parent   - the parent spans every child instance (union containment).
struct SynthRule {
  enum class Kind { Follows, Cooccur, Parent };
  Kind kind = Kind::Follows;
  int trigger = -1;
  int consequence = -1;
  int lag = 1;
  DurationRange duration;
  int partner = -1;
  int parent = -1;
  std::vector<int> children;
};

struct SynthSpec {
  std::vector<std::string> classes;
  int feature_dim = 32;
  int train_videos = 1;
  int test_videos = 0;
  int frames_per_video = 300;
  double frame_rate = 10.0;
  double noise = 0.0;       // isotropic feature noise level
  double spawn_rate = 0.02; // per-frame chance a base class starts an instance
  DurationRange base_duration{4, 8, false};
  // Classes that spawn spontaneously; default (empty) means every class that
  // no rule produces.
  std::vector<int> base_classes;
  std::string embeddings = "orthonormal";  // or "gaussian"
  std::vector<SynthRule> rules;

  int class_count() const { return static_cast<int>(classes.size()); }
  void validate() const;
};

SynthSpec parse_synth_spec(const std::filesystem::path& path);

struct SynthResult {
  Dataset train;
  Dataset test;
  // One embedding row per class, quantized to float32 so on-disk features
  // reproduce noise-free frames exactly.
  Matrix embeddings;
};

// Background frames plus planted events; frame features are the sum of the
// active classes' embeddings plus isotropic noise. Identical seed gives a
// byte-identical dataset tree.
SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace multilstm
