#include "dropnet/api.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "dropnet/checkpoint.hpp"
#include "dropnet/error.hpp"

namespace dropnet {

namespace {

LoadResult load_split(const std::string& key, const std::string& path,
                      CorpusFormat format) {
  if (path.empty()) throw ConfigError("missing required config key '" + key + "'");
  if (!std::filesystem::exists(path)) {
    throw ConfigError(key + ": no such file '" + path + "'");
  }
  return load_examples(path, format);
}

int resolve_num_classes(const RunConfig& config, const LoadResult& train_split) {
  if (config.num_classes == 0) return train_split.num_classes();
  if (config.num_classes != train_split.num_classes()) {
    throw ConfigError("num_classes = " + std::to_string(config.num_classes) +
                      " but the training labels are " +
                      std::to_string(train_split.num_classes()) + "-way");
  }
  return config.num_classes;
}

void check_family(const std::string& key, const LoadResult& split,
                  const LoadResult& train_split) {
  if (split.family != train_split.family) {
    throw DataError(key + ": label inventory does not match the training split");
  }
}

struct PreparedData {
  LoadResult train;
  LoadResult val;
  std::optional<LoadResult> test;
  Vocabulary vocab;
  std::optional<EmbeddingTable> pretrained;
  int num_classes = 0;
};

PreparedData prepare_data(const RunConfig& config) {
  PreparedData data;
  data.train = load_split("train_path", config.train_path, config.format);
  data.val = load_split("val_path", config.val_path, config.format);
  check_family("val_path", data.val, data.train);
  if (!config.test_path.empty()) {
    data.test = load_split("test_path", config.test_path, config.format);
    check_family("test_path", *data.test, data.train);
  }
  data.num_classes = resolve_num_classes(config, data.train);
  data.vocab = Vocabulary::build(data.train.examples, config.min_count);
  if (!config.embeddings_path.empty()) {
    if (!std::filesystem::exists(config.embeddings_path)) {
      throw ConfigError("embeddings_path: no such file '" + config.embeddings_path +
                        "'");
    }
    Rng rng(mix_seed(config.seed, 0x1));
    PretrainedResult loaded =
        load_pretrained(config.embeddings_path, data.vocab, config.embedding_dim,
                        rng, config.trainable_embeddings);
    std::cerr << "embeddings: " << loaded.found << " found, " << loaded.missing
              << " randomly initialised\n";
    data.pretrained = std::move(loaded.table);
  }
  return data;
}

}  // namespace

TrainOutcome run_train(const RunConfig& config) {
  PreparedData data = prepare_data(config);

  ModelConfig model_config = config.model_config();
  model_config.num_classes = data.num_classes;
  std::optional<NliModel> model;
  if (data.pretrained.has_value()) {
    model.emplace(model_config, std::move(*data.pretrained));
  } else {
    model.emplace(model_config, data.vocab.size());
  }

  const TrainReport report =
      train(*model, data.train.examples, data.val.examples, data.vocab,
            config.train_config());

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  TrainOutcome outcome;
  outcome.best_epoch = report.best_epoch;
  outcome.best_val_acc = report.best_val_acc;
  outcome.metrics_path = out_dir / "metrics.csv";
  write_metrics_csv(outcome.metrics_path, report.epochs);
  outcome.checkpoint_path = out_dir / "checkpoint.dnet";
  save_checkpoint(outcome.checkpoint_path, *model, data.vocab);

  const std::vector<Example>& test_examples =
      data.test.has_value() ? data.test->examples : data.val.examples;
  outcome.test_is_validation = !data.test.has_value();
  const EvalResult test = evaluate(*model, test_examples, data.vocab);
  outcome.test_acc = test.accuracy;
  outcome.test_loss = test.mean_loss;

  nlohmann::json summary;
  summary["best_epoch"] = outcome.best_epoch;
  summary["best_val_acc"] = outcome.best_val_acc;
  summary["test_acc"] = outcome.test_acc;
  summary["test_loss"] = outcome.test_loss;
  summary["test_split"] = outcome.test_is_validation ? "validation" : "test";
  summary["epochs_run"] = report.epochs.size();
  nlohmann::json echo;
  echo["train_path"] = config.train_path;
  echo["val_path"] = config.val_path;
  echo["test_path"] = config.test_path;
  echo["embeddings_path"] = config.embeddings_path;
  echo["format"] = config.format == CorpusFormat::jsonl ? "jsonl" : "tsv";
  echo["min_count"] = config.min_count;
  echo["embedding_dim"] = config.embedding_dim;
  echo["hidden_units"] = config.hidden_units;
  echo["num_classes"] = data.num_classes;
  echo["placement"] = config.placement.to_string();
  echo["drop_rate"] = config.drop_rate;
  echo["inverted_dropout"] = config.inverted_dropout;
  echo["trainable_embeddings"] = config.trainable_embeddings;
  echo["l2_lambda"] = config.l2_lambda;
  echo["epochs"] = config.epochs;
  echo["batch_size"] = config.batch_size;
  echo["learning_rate"] = config.learning_rate;
  echo["patience"] = config.patience;
  echo["seed"] = config.seed;
  echo["out_dir"] = config.out_dir;
  echo["metrics_timing"] = config.wall_clock ? "wall" : "none";
  summary["config"] = echo;

  outcome.summary_path = out_dir / "summary.json";
  std::ofstream summary_out(outcome.summary_path);
  if (!summary_out) {
    throw DataError("cannot write summary " + outcome.summary_path.string());
  }
  summary_out << summary.dump(2) << '\n';
  return outcome;
}

EvalOutcome run_eval(const std::filesystem::path& checkpoint_path,
                     const std::filesystem::path& data_path, CorpusFormat format) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  const LoadResult split = load_examples(data_path, format);
  if (split.num_classes() != loaded.model.config().num_classes) {
    throw DataError(data_path.string() + ": labels are " +
                    std::to_string(split.num_classes()) +
                    "-way but the checkpoint expects " +
                    std::to_string(loaded.model.config().num_classes));
  }
  const EvalResult result = evaluate(loaded.model, split.examples, loaded.vocab);
  return {result.accuracy, result.mean_loss};
}

GridResult run_grid(const RunConfig& config, const GridSpec& spec) {
  PreparedData data = prepare_data(config);
  ModelConfig model_config = config.model_config();
  model_config.num_classes = data.num_classes;

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);
  const EmbeddingTable* pretrained =
      data.pretrained.has_value() ? &*data.pretrained : nullptr;
  GridResult result =
      grid_search(model_config, config.train_config(), data.train.examples,
                  data.val.examples, data.vocab, pretrained, spec, out_dir);
  write_grid_csv(out_dir / "grid.csv", result);
  return result;
}

}  // namespace dropnet
