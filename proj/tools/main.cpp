// Command-line entry point: dataset synthesis, statistics, training,
// evaluation, detection, offset sweeps, retrieval, and the gradient-check
// self-verification. All numeric outputs are CSV; logs go to stderr; every
// run writes its fully resolved configuration next to its outputs.
//
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "multilstm/checkpoint.hpp"
#include "multilstm/dataset.hpp"
#include "multilstm/error.hpp"
#include "multilstm/eval.hpp"
#include "multilstm/retrieval.hpp"
#include "multilstm/stats.hpp"
#include "multilstm/synth.hpp"
#include "multilstm/trainer.hpp"
#include "multilstm/verify.hpp"

namespace fs = std::filesystem;
using namespace multilstm;

namespace {

// Fully resolved configuration in the same key=value format the --config
// option reads back, so a run can be reproduced from the file it wrote.
// Flags given on the command line override file values.
void write_run_config(const fs::path& out_dir, const std::string& subcommand,
                      const std::map<std::string, std::string>& entries) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "run_config.txt");
  out << "# multilstm " << subcommand << " --config <this file>\n";
  out << "[" << subcommand << "]\n";
  for (const auto& [key, value] : entries) out << key << "=" << value << "\n";
}

// Per-video predictions, optionally across worker threads (results are
// positionally assigned, so the worker count never changes the output).
std::vector<Matrix> predict_dataset(const Checkpoint& ck, const Dataset& ds,
                                    int workers) {
  std::vector<Matrix> predictions(ds.videos.size());
  if (workers <= 1) {
    for (std::size_t v = 0; v < ds.videos.size(); ++v)
      predictions[v] = predict_video(ck, ds.videos[v].features);
    return predictions;
  }
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex mutex;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t v;
        {
          std::lock_guard<std::mutex> lock(mutex);
          if (next >= ds.videos.size()) return;
          v = next++;
        }
        predictions[v] = predict_video(ck, ds.videos[v].features);
      }
    });
  for (std::thread& t : pool) t.join();
  return predictions;
}

std::vector<Matrix> rasterize_dataset(const Dataset& ds) {
  std::vector<Matrix> labels(ds.videos.size());
  for (std::size_t v = 0; v < ds.videos.size(); ++v)
    labels[v] = rasterize(ds.videos[v].intervals, ds.videos[v].frames,
                          ds.class_count());
  return labels;
}

std::vector<EvalPair> eval_pairs(const std::vector<Matrix>& predictions,
                                 const std::vector<Matrix>& labels) {
  std::vector<EvalPair> pairs;
  for (std::size_t v = 0; v < predictions.size(); ++v)
    pairs.push_back({&predictions[v], &labels[v]});
  return pairs;
}

void write_ap_tables(const fs::path& out_dir, const Dataset& ds,
                     const MeanApResult& result) {
  std::ofstream per_class(out_dir / "per_class_ap.csv");
  per_class << "class,ap\n";
  for (std::size_t c = 0; c < result.per_class.size(); ++c) {
    per_class << ds.classes[c] << ",";
    if (result.per_class[c])
      per_class << format_double(*result.per_class[c]);
    else
      per_class << "undefined";
    per_class << "\n";
  }
  std::ofstream summary(out_dir / "summary.csv");
  summary << "metric,value\n";
  summary << "map," << format_double(result.map) << "\n";
  summary << "defined_classes," << result.defined_classes << "\n";
}

int class_id_or_throw(const Dataset& ds, const std::string& name) {
  const int id = ds.class_id(name);
  if (id < 0)
    throw DataError("unknown class '" + name + "'; vocabulary: " +
                    [&] {
                      std::string all;
                      for (const std::string& c : ds.classes)
                        all += (all.empty() ? "" : ",") + c;
                      return all;
                    }());
  return id;
}

int run_synth(const std::string& spec_path, const std::string& out,
              std::uint64_t seed) {
  const SynthSpec spec = parse_synth_spec(spec_path);
  const SynthResult result = synth_generate(spec, seed);
  const fs::path out_dir(out);
  write_dataset(out_dir / "train", result.train);
  if (!result.test.videos.empty()) write_dataset(out_dir / "test", result.test);
  write_run_config(out_dir, "synth",
                   {{"spec", spec_path},
                    {"out", out},
                    {"seed", std::to_string(seed)}});
  std::cerr << "synth: wrote " << result.train.videos.size() << " train / "
            << result.test.videos.size() << " test videos to " << out << "\n";
  return 0;
}

int run_stats(const std::string& data, const std::string& out) {
  const Dataset ds = load_dataset(data, false);
  const DatasetStats stats = dataset_stats(ds);
  write_stats_csv(stats, ds.classes, out);
  write_run_config(out, "stats", {{"data", data}, {"out", out}});
  std::cerr << "stats: " << stats.video_count << " videos, "
            << stats.total_frames << " frames, mean labels/frame "
            << stats.mean_labels_per_frame << "\n";
  return 0;
}

struct TrainCli {
  std::string data, out, model = "multilstm";
  MultiLstmConfig config;
  TrainConfig tc;
  bool outputs_given = false;
};

int run_train(TrainCli& cli) {
  const Dataset ds = load_dataset(cli.data, true);
  if (!cli.outputs_given) cli.config.outputs = cli.config.window;
  if (cli.model == "lstm") {
    cli.config.window = 1;
    cli.config.outputs = 1;
  }

  TrainResult result;
  if (cli.model == "logistic") {
    result = train_logistic(ds, cli.config.offset, cli.tc);
  } else if (cli.model == "multilstm" || cli.model == "lstm") {
    result = train_multilstm(ds, cli.config, cli.tc);
  } else {
    throw ArgumentError("unknown model '" + cli.model +
                        "' (multilstm, lstm, logistic)");
  }

  const fs::path out_dir(cli.out);
  fs::create_directories(out_dir);
  save_checkpoint(out_dir / "checkpoint.mlck", result.checkpoint);
  {
    std::ofstream log(out_dir / "loss_log.csv");
    log << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
      log << e << "," << format_double(result.epoch_loss[e]) << "\n";
  }
  write_run_config(
      out_dir, "train",
      {{"data", cli.data},
       {"out", cli.out},
       {"model", cli.model},
       {"window", std::to_string(result.checkpoint.config.window)},
       {"outputs", std::to_string(result.checkpoint.config.outputs)},
       {"hidden", std::to_string(result.checkpoint.config.hidden)},
       {"attention-units",
        std::to_string(result.checkpoint.config.attention_units)},
       {"offset", std::to_string(result.checkpoint.config.offset)},
       {"minibatch", std::to_string(cli.tc.minibatch)},
       {"epochs", std::to_string(cli.tc.epochs)},
       {"seed", std::to_string(cli.tc.seed)},
       {"clip", format_double(cli.tc.clip)},
       {"lr", format_double(cli.tc.rmsprop.learning_rate)},
       {"decay", format_double(cli.tc.rmsprop.decay)},
       {"epsilon", format_double(cli.tc.rmsprop.epsilon)}});
  std::cerr << "train: final mean loss " << result.epoch_loss.back() << " after "
            << result.checkpoint.epoch << " epochs\n";
  return 0;
}

int run_eval(const std::string& data, const std::string& checkpoint,
             const std::string& out, bool oracle_labels, int workers) {
  const Dataset ds = load_dataset(data, !oracle_labels);
  const std::vector<Matrix> labels = rasterize_dataset(ds);
  std::vector<Matrix> predictions;
  int offset = 0;
  if (oracle_labels) {
    predictions = labels;
  } else {
    const Checkpoint ck = load_checkpoint(checkpoint);
    if (ck.classes != ds.classes)
      throw DataError("checkpoint vocabulary differs from dataset");
    offset = ck.config.offset;
    predictions = predict_dataset(ck, ds, workers);
  }
  const MeanApResult result = mean_ap(eval_pairs(predictions, labels), offset);
  for (std::size_t c = 0; c < result.per_class.size(); ++c)
    if (!result.per_class[c])
      std::cerr << "eval: class " << ds.classes[c]
                << " has no positives, skipped in mAP\n";
  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  write_ap_tables(out_dir, ds, result);
  std::map<std::string, std::string> resolved{{"data", data},
                                              {"out", out},
                                              {"workers", std::to_string(workers)}};
  if (oracle_labels)
    resolved["oracle-labels"] = "true";
  else
    resolved["checkpoint"] = checkpoint;
  write_run_config(out_dir, "eval", resolved);
  std::cout << "map," << format_double(result.map) << "\n";
  std::cerr << "eval: mAP " << result.map << " over " << result.defined_classes
            << " classes\n";
  return 0;
}

int run_detect(const std::string& data, const std::string& checkpoint,
               const std::string& train_data, const std::string& out,
               double lambda, double alpha_det, double iou, int workers) {
  const Dataset ds = load_dataset(data, true);
  const Dataset train = load_dataset(train_data, false);
  if (train.classes != ds.classes)
    throw DataError("training vocabulary differs from evaluation dataset");
  const Checkpoint ck = load_checkpoint(checkpoint);
  if (ck.classes != ds.classes)
    throw DataError("checkpoint vocabulary differs from dataset");
  const ClassLengthStats stats = compute_length_stats(train);
  const std::vector<Matrix> predictions = predict_dataset(ck, ds, workers);

  std::vector<Detection> all;
  for (std::size_t v = 0; v < ds.videos.size(); ++v) {
    std::vector<Detection> dets = detect_video(ds.videos[v].id, predictions[v],
                                               lambda, stats, alpha_det);
    all.insert(all.end(), dets.begin(), dets.end());
  }
  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "detections.csv");
    csv << "video,class,start,end,score\n";
    for (const Detection& d : all)
      csv << d.video << "," << ds.classes[d.class_id] << "," << d.start << ","
          << d.end << "," << format_double(d.score) << "\n";
  }
  {
    std::ofstream csv(out_dir / "detection_ap.csv");
    csv << "class,ap\n";
    double sum = 0.0;
    int defined = 0;
    for (int c = 0; c < ds.class_count(); ++c) {
      std::vector<Detection> class_dets;
      for (const Detection& d : all)
        if (d.class_id == c) class_dets.push_back(d);
      const std::optional<double> ap =
          detection_ap(class_dets, gt_instances(ds, c), iou);
      csv << ds.classes[c] << ",";
      if (ap) {
        csv << format_double(*ap);
        sum += *ap;
        ++defined;
      } else {
        csv << "undefined";
        std::cerr << "detect: class " << ds.classes[c]
                  << " has no instances, skipped\n";
      }
      csv << "\n";
    }
    csv << "mean," << format_double(defined > 0 ? sum / defined : 0.0) << "\n";
    std::cout << "detection_map," << format_double(defined > 0 ? sum / defined : 0.0)
              << "\n";
  }
  write_run_config(out_dir, "detect",
                   {{"data", data},
                    {"train-data", train_data},
                    {"checkpoint", checkpoint},
                    {"lambda", format_double(lambda)},
                    {"alpha", format_double(alpha_det)},
                    {"iou", format_double(iou)},
                    {"workers", std::to_string(workers)},
                    {"out", out}});
  return 0;
}

int run_sweep(const std::string& data, const std::vector<std::string>& paths,
              const std::vector<int>& wanted_offsets, const std::string& out,
              int workers) {
  const Dataset ds = load_dataset(data, true);
  const std::vector<Matrix> labels = rasterize_dataset(ds);

  std::map<int, Checkpoint> by_offset;
  for (const std::string& path : paths) {
    Checkpoint ck = load_checkpoint(path);
    if (ck.classes != ds.classes)
      throw DataError(path + ": checkpoint vocabulary differs from dataset");
    if (by_offset.count(ck.config.offset))
      throw DataError("two checkpoints both trained at offset " +
                      std::to_string(ck.config.offset));
    by_offset.emplace(ck.config.offset, std::move(ck));
  }
  if (!wanted_offsets.empty())
    for (int s : wanted_offsets)
      if (!by_offset.count(s))
        throw DataError("missing checkpoint for offset " + std::to_string(s));

  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "offset_map.csv");
  csv << "offset_frames,offset_seconds,map\n";
  for (auto& [offset, ck] : by_offset) {
    if (!wanted_offsets.empty() &&
        std::find(wanted_offsets.begin(), wanted_offsets.end(), offset) ==
            wanted_offsets.end())
      continue;
    const std::vector<Matrix> predictions = predict_dataset(ck, ds, workers);
    const MeanApResult result = mean_ap(eval_pairs(predictions, labels), offset);
    csv << offset << "," << format_double(offset / ck.config.frame_rate) << ","
        << format_double(result.map) << "\n";
    std::cerr << "sweep: offset " << offset << " -> mAP " << result.map << "\n";
  }
  std::string joined;
  for (const std::string& p : paths) joined += (joined.empty() ? "" : ",") + p;
  write_run_config(out_dir, "sweep-offsets",
                   {{"data", data},
                    {"checkpoints", joined},
                    {"workers", std::to_string(workers)},
                    {"out", out}});
  return 0;
}

int run_retrieve(const std::string& data, const std::string& checkpoint,
                 bool oracle_labels, const std::string& mode,
                 const std::string& first, const std::string& second, int gap,
                 int top_k, bool no_suppress, const std::string& out,
                 int workers) {
  const Dataset ds = load_dataset(data, !oracle_labels && mode != "pmi");
  const std::vector<Matrix> labels = rasterize_dataset(ds);
  const fs::path out_dir(out);
  fs::create_directories(out_dir);

  if (mode == "pmi") {
    std::vector<const Matrix*> label_ptrs;
    for (const Matrix& m : labels) label_ptrs.push_back(&m);
    const Matrix pmi = cooccurrence_pmi(label_ptrs);
    std::ofstream csv(out_dir / "pmi.csv");
    csv << "class";
    for (const std::string& c : ds.classes) csv << "," << c;
    csv << "\n";
    for (int a = 0; a < pmi.rows; ++a) {
      csv << ds.classes[a];
      for (int b = 0; b < pmi.cols; ++b) csv << "," << format_double(pmi(a, b));
      csv << "\n";
    }
    write_run_config(out_dir, "retrieve",
                     {{"mode", "pmi"}, {"data", data}, {"out", out}});
    return 0;
  }

  std::vector<Matrix> predictions;
  if (oracle_labels) {
    predictions = labels;
  } else {
    const Checkpoint ck = load_checkpoint(checkpoint);
    if (ck.classes != ds.classes)
      throw DataError("checkpoint vocabulary differs from dataset");
    predictions = predict_dataset(ck, ds, workers);
  }
  std::vector<VideoPredictions> vp;
  for (std::size_t v = 0; v < ds.videos.size(); ++v)
    vp.push_back({ds.videos[v].id, &predictions[v]});

  const int class_a = class_id_or_throw(ds, first);
  if (mode == "sequential") {
    SequentialQuery query;
    query.first_class = class_a;
    query.second_class = class_id_or_throw(ds, second);
    query.max_gap = gap;
    query.top_k = top_k;
    query.suppress = !no_suppress;
    const std::vector<SequentialHit> hits = retrieve_sequential(vp, query);
    std::ofstream csv(out_dir / "sequential.csv");
    csv << "video,t_first,t_second,score\n";
    for (const SequentialHit& h : hits)
      csv << h.video << "," << h.t_first << "," << h.t_second << ","
          << format_double(h.score) << "\n";
  } else if (mode == "cooccur") {
    const std::vector<CooccurrenceHit> hits =
        retrieve_cooccurring(vp, class_a, class_id_or_throw(ds, second), top_k);
    std::ofstream csv(out_dir / "cooccurring.csv");
    csv << "video,frame,score\n";
    for (const CooccurrenceHit& h : hits)
      csv << h.video << "," << h.frame << "," << format_double(h.score) << "\n";
  } else {
    throw ArgumentError("unknown retrieve mode '" + mode +
                        "' (sequential, cooccur, pmi)");
  }
  std::map<std::string, std::string> resolved{
      {"mode", mode},       {"data", data},
      {"first", first},     {"second", second},
      {"gap", std::to_string(gap)}, {"top-k", std::to_string(top_k)},
      {"out", out}};
  if (oracle_labels)
    resolved["oracle-labels"] = "true";
  else
    resolved["checkpoint"] = checkpoint;
  if (no_suppress) resolved["no-suppress"] = "true";
  write_run_config(out_dir, "retrieve", resolved);
  return 0;
}

int run_gradcheck_cmd(std::uint64_t seed, const GradCheckDims& dims) {
  const GradCheckReport report = run_gradcheck(seed, dims);
  std::cout << "component,max_rel_error,tolerance,status\n";
  for (const GradCheckEntry& e : report.entries)
    std::cout << e.component << "," << format_double(e.max_rel_error) << ","
              << format_double(e.tolerance) << ","
              << (e.pass ? "pass" : "FAIL") << "\n";
  if (!report.all_pass())
    throw NumericError("gradient check failed");
  std::cerr << "gradcheck: all components within tolerance\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MultiLSTM dense multilabel sequence labeling"};
  app.require_subcommand(1);
  app.fallthrough(true);
  // reads the same [subcommand] key=value format the tool writes as
  // run_config.txt; explicit flags override file values
  app.set_config("--config", "",
                 "key=value config file; command-line flags override");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_spec, synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--spec", synth_spec, "synth spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");

  // stats
  auto* stats = app.add_subcommand("stats", "dataset statistics tables");
  std::string stats_data, stats_out;
  stats->add_option("--data", stats_data, "dataset directory")->required();
  stats->add_option("--out", stats_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train a model");
  TrainCli train_cli;
  train->add_option("--data", train_cli.data, "training dataset")->required();
  train->add_option("--out", train_cli.out, "output directory")->required();
  train->add_option("--model", train_cli.model, "multilstm | lstm | logistic");
  train->add_option("--window", train_cli.config.window, "input window W");
  auto* outputs_opt =
      train->add_option("--outputs", train_cli.config.outputs,
                        "output window N (default: same as --window)");
  train->add_option("--hidden", train_cli.config.hidden, "hidden units");
  train->add_option("--attention-units", train_cli.config.attention_units,
                    "attention units");
  train->add_option("--offset", train_cli.config.offset, "label offset s");
  train->add_option("--minibatch", train_cli.tc.minibatch, "frames per minibatch");
  train->add_option("--epochs", train_cli.tc.epochs, "training epochs");
  train->add_option("--seed", train_cli.tc.seed, "training seed");
  train->add_option("--clip", train_cli.tc.clip, "global-norm gradient clip");
  train->add_option("--lr", train_cli.tc.rmsprop.learning_rate, "learning rate");
  train->add_option("--decay", train_cli.tc.rmsprop.decay, "rmsprop decay");
  train->add_option("--epsilon", train_cli.tc.rmsprop.epsilon, "rmsprop epsilon");

  // eval
  auto* eval = app.add_subcommand("eval", "frame-level AP / mAP");
  std::string eval_data, eval_ck, eval_out;
  bool eval_oracle = false;
  int eval_workers = 1;
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--checkpoint", eval_ck, "model checkpoint");
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_flag("--oracle-labels", eval_oracle,
                 "use ground-truth labels as predictions");
  eval->add_option("--workers", eval_workers, "parallel videos (default 1)");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "detection post-processing");
  std::string det_data, det_ck, det_train, det_out;
  double det_lambda = 0.1, det_alpha = 0.01, det_iou = 0.1;
  int det_workers = 1;
  detect_cmd->add_option("--data", det_data, "evaluation dataset")->required();
  detect_cmd->add_option("--checkpoint", det_ck, "model checkpoint")->required();
  detect_cmd->add_option("--train-data", det_train,
                         "training dataset for length statistics")->required();
  detect_cmd->add_option("--out", det_out, "output directory")->required();
  detect_cmd->add_option("--lambda", det_lambda, "confidence threshold");
  detect_cmd->add_option("--alpha", det_alpha, "length penalty alpha");
  detect_cmd->add_option("--iou", det_iou, "overlap threshold for detection AP");
  detect_cmd->add_option("--workers", det_workers, "parallel videos");

  // sweep-offsets
  auto* sweep = app.add_subcommand("sweep-offsets", "mAP vs offset curve");
  std::string sweep_data, sweep_out;
  std::vector<std::string> sweep_cks;
  std::vector<int> sweep_offsets;
  int sweep_workers = 1;
  sweep->add_option("--data", sweep_data, "dataset directory")->required();
  sweep->add_option("--checkpoints", sweep_cks, "one checkpoint per offset")
      ->required()
      ->expected(-1);
  sweep->add_option("--offsets", sweep_offsets,
                    "offsets that must be present (default: all found)");
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--workers", sweep_workers, "parallel videos");

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "structured queries");
  std::string ret_data, ret_ck, ret_mode = "sequential", ret_first, ret_second,
              ret_out;
  int ret_gap = 10, ret_topk = 10, ret_workers = 1;
  bool ret_oracle = false, ret_no_suppress = false;
  retrieve->add_option("--data", ret_data, "dataset directory")->required();
  retrieve->add_option("--checkpoint", ret_ck, "model checkpoint");
  retrieve->add_flag("--oracle-labels", ret_oracle,
                     "query ground-truth labels instead of a model");
  retrieve->add_option("--mode", ret_mode, "sequential | cooccur | pmi");
  retrieve->add_option("--first", ret_first, "first class name");
  retrieve->add_option("--second", ret_second, "second class name");
  retrieve->add_option("--gap", ret_gap, "max frames between the actions");
  retrieve->add_option("--top-k", ret_topk, "results to keep");
  retrieve->add_flag("--no-suppress", ret_no_suppress,
                     "disable near-duplicate suppression");
  retrieve->add_option("--out", ret_out, "output directory")->required();
  retrieve->add_option("--workers", ret_workers, "parallel videos");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference verification of all backward passes");
  std::uint64_t gc_seed = 7;
  GradCheckDims gc_dims;
  gradcheck->add_option("--seed", gc_seed, "seed");
  gradcheck->add_option("--input-dim", gc_dims.input_dim, "D");
  gradcheck->add_option("--hidden", gc_dims.hidden, "H");
  gradcheck->add_option("--classes", gc_dims.classes, "C");
  gradcheck->add_option("--attention-units", gc_dims.attention_units, "A");
  gradcheck->add_option("--window", gc_dims.window, "W");
  gradcheck->add_option("--outputs", gc_dims.outputs, "N");
  gradcheck->add_option("--frames", gc_dims.frames, "T");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth) return run_synth(synth_spec, synth_out, synth_seed);
    if (*stats) return run_stats(stats_data, stats_out);
    if (*train) {
      train_cli.outputs_given = outputs_opt->count() > 0;
      return run_train(train_cli);
    }
    if (*eval) {
      if (!eval_oracle && eval_ck.empty())
        throw ArgumentError("eval: --checkpoint or --oracle-labels required");
      return run_eval(eval_data, eval_ck, eval_out, eval_oracle, eval_workers);
    }
    if (*detect_cmd)
      return run_detect(det_data, det_ck, det_train, det_out, det_lambda,
                        det_alpha, det_iou, det_workers);
    if (*sweep)
      return run_sweep(sweep_data, sweep_cks, sweep_offsets, sweep_out,
                       sweep_workers);
    if (*retrieve) {
      if (!ret_oracle && ret_mode != "pmi" && ret_ck.empty())
        throw ArgumentError("retrieve: --checkpoint or --oracle-labels required");
      return run_retrieve(ret_data, ret_ck, ret_oracle, ret_mode, ret_first,
                          ret_second, ret_gap, ret_topk, ret_no_suppress,
                          ret_out, ret_workers);
    }
    if (*gradcheck) return run_gradcheck_cmd(gc_seed, gc_dims);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
