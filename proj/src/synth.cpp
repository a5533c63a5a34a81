#include "multilstm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

#include <json.hpp>

#include "multilstm/error.hpp"

namespace multilstm {

using nlohmann::json;

namespace {

int max_duration(const SynthSpec& spec, const SynthRule* rule, int trigger_max) {
  if (rule == nullptr) return spec.base_duration.max_frames;
  if (rule->duration.match_trigger) return trigger_max;
  return rule->duration.max_frames;
}

// Longest span from an instance start of `cls` to the end of anything the
// rules transitively plant from it. Used to keep spawns clear of video ends.
int reach(const SynthSpec& spec, int cls, int own_max_duration, int depth) {
  if (depth > spec.class_count())
    throw DataError("synth: rule cycle involving class " +
                    spec.classes.at(cls));
  int best = own_max_duration;
  for (const SynthRule& rule : spec.rules) {
    if (rule.kind != SynthRule::Kind::Follows || rule.trigger != cls) continue;
    const int cons_max = max_duration(spec, &rule, own_max_duration);
    best = std::max(best,
                    rule.lag + reach(spec, rule.consequence, cons_max, depth + 1));
  }
  return best;
}

std::vector<int> default_base_classes(const SynthSpec& spec) {
  std::vector<bool> produced(spec.class_count(), false);
  for (const SynthRule& rule : spec.rules) {
    switch (rule.kind) {
      case SynthRule::Kind::Follows: produced[rule.consequence] = true; break;
      case SynthRule::Kind::Cooccur: produced[rule.partner] = true; break;
      case SynthRule::Kind::Parent: produced[rule.parent] = true; break;
    }
  }
  std::vector<int> base;
  for (int c = 0; c < spec.class_count(); ++c)
    if (!produced[c]) base.push_back(c);
  return base;
}

Matrix draw_embeddings(const SynthSpec& spec, Rng& rng) {
  const int classes = spec.class_count();
  const int dim = spec.feature_dim;
  Matrix emb(classes, dim);
  for (double& v : emb.data) v = rng.normal();
  if (spec.embeddings == "orthonormal") {
    if (dim < classes)
      throw DataError("synth: orthonormal embeddings need feature_dim >= classes");
    // Gram-Schmidt, rows in order.
    for (int c = 0; c < classes; ++c) {
      for (int p = 0; p < c; ++p) {
        double proj = 0.0;
        for (int j = 0; j < dim; ++j) proj += emb(c, j) * emb(p, j);
        for (int j = 0; j < dim; ++j) emb(c, j) -= proj * emb(p, j);
      }
      double norm = 0.0;
      for (int j = 0; j < dim; ++j) norm += emb(c, j) * emb(c, j);
      norm = std::sqrt(norm);
      if (norm < 1e-9) throw DataError("synth: degenerate embedding draw");
      for (int j = 0; j < dim; ++j) emb(c, j) /= norm;
    }
  } else if (spec.embeddings != "gaussian") {
    throw DataError("synth: unknown embedding kind '" + spec.embeddings + "'");
  }
  // Quantize so on-disk float32 features reproduce clean frames exactly.
  for (double& v : emb.data)
    v = static_cast<double>(static_cast<float>(v));
  return emb;
}

int draw_duration(const DurationRange& range, int trigger_len, Rng& rng) {
  if (range.match_trigger) return trigger_len;
  if (range.min_frames == range.max_frames) return range.min_frames;
  return rng.uniform_int(range.min_frames, range.max_frames);
}

VideoRecord generate_video(const SynthSpec& spec, const Matrix& embeddings,
                           const std::string& id,
                           const std::vector<int>& base_classes, Rng& rng) {
  const int frames = spec.frames_per_video;
  VideoRecord video;
  video.id = id;
  video.frames = frames;
  video.frame_rate = spec.frame_rate;

  // Spawn base instances, keeping the full planted chain inside the video.
  std::deque<LabelInterval> worklist;
  for (int cls : base_classes) {
    const int limit = frames - reach(spec, cls, spec.base_duration.max_frames, 0);
    if (limit < 0)
      throw DataError("synth: rule chain from class " + spec.classes[cls] +
                      " exceeds video length " + std::to_string(frames));
    int t = 0;
    while (t <= limit) {
      if (rng.uniform() < spec.spawn_rate) {
        const int len = draw_duration(spec.base_duration, 0, rng);
        worklist.push_back({cls, t, t + len});
        t += len + 1;  // keep same-class instances separated
      } else {
        ++t;
      }
    }
  }

  // Apply rules transitively; every planted event can itself trigger rules.
  while (!worklist.empty()) {
    const LabelInterval event = worklist.front();
    worklist.pop_front();
    video.intervals.push_back(event);
    for (const SynthRule& rule : spec.rules) {
      switch (rule.kind) {
        case SynthRule::Kind::Follows: {
          if (rule.trigger != event.class_id) break;
          const int len =
              draw_duration(rule.duration, event.end - event.start, rng);
          const int start = event.start + rule.lag;
          if (start + len > frames)
            throw DataError("synth: consequence of " +
                            spec.classes[event.class_id] + " at frame " +
                            std::to_string(event.start) + " exceeds video");
          worklist.push_back({rule.consequence, start, start + len});
          break;
        }
        case SynthRule::Kind::Cooccur:
          if (rule.trigger == event.class_id)
            worklist.push_back({rule.partner, event.start, event.end});
          break;
        case SynthRule::Kind::Parent:
          if (std::find(rule.children.begin(), rule.children.end(),
                        event.class_id) != rule.children.end())
            worklist.push_back({rule.parent, event.start, event.end});
          break;
      }
    }
  }
  std::sort(video.intervals.begin(), video.intervals.end(),
            [](const LabelInterval& a, const LabelInterval& b) {
              if (a.class_id != b.class_id) return a.class_id < b.class_id;
              if (a.start != b.start) return a.start < b.start;
              return a.end < b.end;
            });

  // Features: sum of active-class embeddings plus isotropic noise.
  const Matrix labels = rasterize(video.intervals, frames, spec.class_count());
  video.features = Matrix(frames, spec.feature_dim, 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < spec.class_count(); ++c)
      if (labels(t, c) != 0.0)
        for (int j = 0; j < spec.feature_dim; ++j)
          video.features(t, j) += embeddings(c, j);
    if (spec.noise > 0.0)
      for (int j = 0; j < spec.feature_dim; ++j)
        video.features(t, j) += spec.noise * rng.normal();
  }
  return video;
}

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

void SynthSpec::validate() const {
  if (classes.empty()) throw DataError("synth spec: no classes");
  if (feature_dim < 1) throw DataError("synth spec: feature_dim must be >= 1");
  if (train_videos < 0 || test_videos < 0 || train_videos + test_videos < 1)
    throw DataError("synth spec: need at least one video");
  if (frames_per_video < 1)
    throw DataError("synth spec: frames_per_video must be >= 1");
  if (noise < 0.0) throw DataError("synth spec: noise must be >= 0");
  if (spawn_rate < 0.0 || spawn_rate > 1.0)
    throw DataError("synth spec: spawn_rate must be in [0,1]");
  auto check_class = [&](int c, const char* what) {
    if (c < 0 || c >= class_count())
      throw DataError(std::string("synth spec: ") + what + " class " +
                      std::to_string(c) + " out of range");
  };
  auto check_duration = [&](const DurationRange& d) {
    if (d.match_trigger) return;
    if (d.min_frames < 1 || d.max_frames < d.min_frames)
      throw DataError("synth spec: durations must be >= 1 with min <= max");
  };
  check_duration(base_duration);
  for (int c : base_classes) check_class(c, "base");
  for (const SynthRule& rule : rules) {
    switch (rule.kind) {
      case SynthRule::Kind::Follows:
        check_class(rule.trigger, "trigger");
        check_class(rule.consequence, "consequence");
        if (rule.lag < 1) throw DataError("synth spec: lag must be >= 1");
        check_duration(rule.duration);
        break;
      case SynthRule::Kind::Cooccur:
        check_class(rule.trigger, "trigger");
        check_class(rule.partner, "partner");
        break;
      case SynthRule::Kind::Parent:
        check_class(rule.parent, "parent");
        if (rule.children.empty())
          throw DataError("synth spec: parent rule with no children");
        for (int c : rule.children) check_class(c, "child");
        break;
    }
  }
  // Feasibility: the reach computation also rejects rule cycles.
  for (int c = 0; c < class_count(); ++c) {
    const int r = reach(*this, c, base_duration.max_frames, 0);
    if (r > frames_per_video)
      throw DataError("synth spec: rule chain from class " + classes[c] +
                      " needs " + std::to_string(r) + " frames, video has " +
                      std::to_string(frames_per_video));
  }
}

SynthSpec parse_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }

  SynthSpec spec;
  try {
    if (doc.at("classes").is_number_integer()) {
      const int n = doc.at("classes").get<int>();
      for (int c = 0; c < n; ++c) spec.classes.push_back("act" + padded(c, 2));
    } else {
      spec.classes = doc.at("classes").get<std::vector<std::string>>();
    }
    spec.feature_dim = doc.at("feature_dim").get<int>();
    spec.train_videos = doc.at("train_videos").get<int>();
    spec.test_videos = doc.value("test_videos", 0);
    spec.frames_per_video = doc.at("frames_per_video").get<int>();
    spec.frame_rate = doc.value("frame_rate", 10.0);
    spec.noise = doc.value("noise", 0.0);
    spec.spawn_rate = doc.value("spawn_rate", 0.02);
    spec.embeddings = doc.value("embeddings", std::string("orthonormal"));

    auto parse_duration = [](const json& j) {
      DurationRange d;
      if (j.is_string() && j.get<std::string>() == "match") {
        d.match_trigger = true;
      } else if (j.is_number_integer()) {
        d.min_frames = d.max_frames = j.get<int>();
      } else {
        d.min_frames = j.at(0).get<int>();
        d.max_frames = j.at(1).get<int>();
      }
      return d;
    };
    if (doc.contains("base_duration"))
      spec.base_duration = parse_duration(doc.at("base_duration"));

    auto class_index = [&](const json& j) {
      if (j.is_number_integer()) return j.get<int>();
      const std::string name = j.get<std::string>();
      const auto it = std::find(spec.classes.begin(), spec.classes.end(), name);
      if (it == spec.classes.end())
        throw DataError("synth spec: unknown class '" + name + "'");
      return static_cast<int>(it - spec.classes.begin());
    };
    if (doc.contains("base_classes"))
      for (const json& j : doc.at("base_classes"))
        spec.base_classes.push_back(class_index(j));

    for (const json& j : doc.value("rules", json::array())) {
      SynthRule rule;
      const std::string type = j.at("type").get<std::string>();
      if (type == "follows") {
        rule.kind = SynthRule::Kind::Follows;
        rule.trigger = class_index(j.at("trigger"));
        rule.consequence = class_index(j.at("consequence"));
        rule.lag = j.at("lag").get<int>();
        rule.duration = j.contains("duration") ? parse_duration(j.at("duration"))
                                               : DurationRange{1, 1, true};
      } else if (type == "cooccur") {
        rule.kind = SynthRule::Kind::Cooccur;
        rule.trigger = class_index(j.at("trigger"));
        rule.partner = class_index(j.at("partner"));
      } else if (type == "parent") {
        rule.kind = SynthRule::Kind::Parent;
        rule.parent = class_index(j.at("parent"));
        for (const json& c : j.at("children"))
          rule.children.push_back(class_index(c));
      } else {
        throw DataError("synth spec: unknown rule type '" + type + "'");
      }
      spec.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng root(seed);
  SynthResult result;
  Rng emb_rng = root.split(0);
  result.embeddings = draw_embeddings(spec, emb_rng);

  std::vector<int> base = spec.base_classes.empty() ? default_base_classes(spec)
                                                    : spec.base_classes;
  if (base.empty()) throw DataError("synth: no base classes to spawn");

  result.train.classes = spec.classes;
  result.test.classes = spec.classes;
  const int width = 4;
  for (int v = 0; v < spec.train_videos; ++v) {
    Rng video_rng = root.split(1000 + v);
    result.train.videos.push_back(generate_video(
        spec, result.embeddings, "train_" + padded(v, width), base, video_rng));
  }
  for (int v = 0; v < spec.test_videos; ++v) {
    Rng video_rng = root.split(2000000 + v);
    result.test.videos.push_back(generate_video(
        spec, result.embeddings, "test_" + padded(v, width), base, video_rng));
  }
  return result;
}

}  // namespace multilstm
