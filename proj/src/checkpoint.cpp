#include "multilstm/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "multilstm/error.hpp"

namespace multilstm {

namespace {

constexpr const char* kFormatId = "MLSTMCK1";

void write_doubles(std::ofstream& out, const ParamView& view) {
  out.write(reinterpret_cast<const char*>(view.data),
            static_cast<std::streamsize>(view.size * sizeof(double)));
}

void read_doubles(std::ifstream& in, const ParamView& view) {
  in.read(reinterpret_cast<char*>(view.data),
          static_cast<std::streamsize>(view.size * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated tensor payload");
}

std::string join_classes(const std::vector<std::string>& classes) {
  std::string joined;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].find(',') != std::string::npos ||
        classes[i].find('\n') != std::string::npos)
      throw DataError("checkpoint: class name '" + classes[i] +
                      "' contains a separator");
    if (i) joined += ',';
    joined += classes[i];
  }
  return joined;
}

std::vector<std::string> split_classes(const std::string& joined) {
  std::vector<std::string> classes;
  std::string current;
  for (char ch : joined) {
    if (ch == ',') {
      classes.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  classes.push_back(current);
  return classes;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

LogisticParams LogisticParams::zeros(int input_dim, int class_count) {
  LogisticParams p;
  p.W = Matrix(class_count, input_dim);
  p.b = Vec(class_count, 0.0);
  return p;
}

std::vector<ParamView> param_views(LogisticParams& p) {
  return {{"W", p.W.data.data(), p.W.data.size()},
          {"b", p.b.data(), p.b.size()}};
}

std::vector<ParamView> Checkpoint::parameter_views() {
  if (kind == "multilstm") return param_views(params);
  if (kind == "logistic") return param_views(logistic);
  throw DataError("checkpoint: unknown kind '" + kind + "'");
}

void save_checkpoint(const std::filesystem::path& path, Checkpoint& ck) {
  std::vector<ParamView> views = ck.parameter_views();
  ck.opt.validate_against(views);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kFormatId << "\n";
  out << "kind " << ck.kind << "\n";
  out << "epoch " << ck.epoch << "\n";
  out << "input_dim " << ck.input_dim << "\n";
  out << "classes " << join_classes(ck.classes) << "\n";
  out << "window " << ck.config.window << "\n";
  out << "outputs " << ck.config.outputs << "\n";
  out << "hidden " << ck.config.hidden << "\n";
  out << "attention_units " << ck.config.attention_units << "\n";
  out << "offset " << ck.config.offset << "\n";
  out << "frame_rate " << format_double(ck.config.frame_rate) << "\n";
  out << "minibatch " << ck.train_config.minibatch << "\n";
  out << "epochs " << ck.train_config.epochs << "\n";
  out << "seed " << ck.train_config.seed << "\n";
  out << "clip " << format_double(ck.train_config.clip) << "\n";
  out << "learning_rate " << format_double(ck.train_config.rmsprop.learning_rate)
      << "\n";
  out << "decay " << format_double(ck.train_config.rmsprop.decay) << "\n";
  out << "epsilon " << format_double(ck.train_config.rmsprop.epsilon) << "\n";
  out << "optimizer rmsprop\n";
  out << "tensors " << views.size() << "\n";
  for (const ParamView& v : views) out << v.name << " " << v.size << "\n";
  out << "end\n";
  for (const ParamView& v : views) write_doubles(out, v);
  for (std::size_t i = 0; i < views.size(); ++i)
    out.write(reinterpret_cast<const char*>(ck.opt.cache[i].data()),
              static_cast<std::streamsize>(ck.opt.cache[i].size() * sizeof(double)));
  if (!out) throw DataError("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kFormatId)
    throw DataError(path.string() + ": not a " + std::string(kFormatId) +
                    " checkpoint");

  std::map<std::string, std::string> header;
  std::vector<std::pair<std::string, std::size_t>> tensor_dir;
  long declared_tensors = -1;
  while (std::getline(in, line)) {
    if (line == "end") break;
    const std::size_t space = line.find(' ');
    if (space == std::string::npos)
      throw DataError(path.string() + ": malformed header line '" + line + "'");
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (declared_tensors >= 0) {
      tensor_dir.emplace_back(key, std::stoul(value));
    } else if (key == "tensors") {
      declared_tensors = std::stol(value);
    } else {
      header[key] = value;
    }
  }
  if (declared_tensors < 0 ||
      tensor_dir.size() != static_cast<std::size_t>(declared_tensors))
    throw DataError(path.string() + ": tensor directory mismatch");

  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end())
      throw DataError(path.string() + ": missing header field '" + key + "'");
    return it->second;
  };

  Checkpoint ck;
  ck.kind = get("kind");
  ck.epoch = std::stoi(get("epoch"));
  ck.input_dim = std::stoi(get("input_dim"));
  ck.classes = split_classes(get("classes"));
  ck.config.window = std::stoi(get("window"));
  ck.config.outputs = std::stoi(get("outputs"));
  ck.config.hidden = std::stoi(get("hidden"));
  ck.config.attention_units = std::stoi(get("attention_units"));
  ck.config.offset = std::stoi(get("offset"));
  ck.config.frame_rate = std::stod(get("frame_rate"));
  ck.train_config.minibatch = std::stoi(get("minibatch"));
  ck.train_config.epochs = std::stoi(get("epochs"));
  ck.train_config.seed = std::stoull(get("seed"));
  ck.train_config.clip = std::stod(get("clip"));
  ck.train_config.rmsprop.learning_rate = std::stod(get("learning_rate"));
  ck.train_config.rmsprop.decay = std::stod(get("decay"));
  ck.train_config.rmsprop.epsilon = std::stod(get("epsilon"));

  const int classes = static_cast<int>(ck.classes.size());
  if (ck.kind == "multilstm") {
    ck.params.gates = GateParams::zeros(ck.input_dim, ck.config.hidden);
    ck.params.heads.assign(ck.config.outputs,
                           OutputHead::zeros(ck.config.hidden, classes));
    ck.params.attention = AttentionParams::zeros(ck.config.attention_units,
                                                 ck.config.hidden, ck.input_dim);
  } else if (ck.kind == "logistic") {
    ck.logistic = LogisticParams::zeros(ck.input_dim, classes);
  } else {
    throw DataError(path.string() + ": unknown kind '" + ck.kind + "'");
  }

  std::vector<ParamView> views = ck.parameter_views();
  if (views.size() != tensor_dir.size())
    throw DataError(path.string() + ": expected " +
                    std::to_string(views.size()) + " tensors, header lists " +
                    std::to_string(tensor_dir.size()));
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].name != tensor_dir[i].first ||
        views[i].size != tensor_dir[i].second)
      throw DataError(path.string() + ": tensor " + std::to_string(i) +
                      " is " + tensor_dir[i].first + "[" +
                      std::to_string(tensor_dir[i].second) + "], expected " +
                      views[i].name + "[" + std::to_string(views[i].size) + "]");
    read_doubles(in, views[i]);
  }
  ck.opt = RmsPropState::init_like(views);
  for (std::size_t i = 0; i < views.size(); ++i) {
    in.read(reinterpret_cast<char*>(ck.opt.cache[i].data()),
            static_cast<std::streamsize>(ck.opt.cache[i].size() * sizeof(double)));
    if (!in) throw DataError(path.string() + ": truncated optimizer payload");
  }
  return ck;
}

}  // namespace multilstm
