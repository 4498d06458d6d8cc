#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dropnet/api.hpp"
#include "dropnet/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;   // config or data problems
constexpr int kExitNumeric = 2;  // non-finite loss or failed gradient check

// "1..13" or "2,5,9"
std::vector<int> parse_model_ids(const std::string& text) {
  std::vector<int> ids;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const int first = std::stoi(text.substr(0, range));
    const int last = std::stoi(text.substr(range + 2));
    for (int id = first; id <= last; ++id) ids.push_back(id);
    return ids;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) ids.push_back(std::stoi(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return ids;
}

// "0.1..0.5" walks in steps of 0.1; otherwise a comma list
std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> rates;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const int first = static_cast<int>(std::lround(std::stod(text.substr(0, range)) * 10));
    const int last = static_cast<int>(std::lround(std::stod(text.substr(range + 2)) * 10));
    for (int tenth = first; tenth <= last; ++tenth) {
      rates.push_back(tenth / 10.0);
    }
    return rates;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) rates.push_back(std::stod(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return rates;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dropnet - BiLSTM attention model for sentence-pair inference\n"
               "with dropout routable to five layer sites"};
  app.require_subcommand(1);
  app.footer(dropnet::config_help() +
             "\nThe DROPNET_SEED environment variable overrides the seed, "
             "after file and --set values.\nExit codes: 0 ok, 1 config/data "
             "error, 2 numerical failure.");

  std::string config_path;
  std::vector<std::string> overrides;

  auto* cmd_train = app.add_subcommand("train", "train one model from a config file");
  cmd_train->add_option("-c,--config", config_path, "config file")->required();
  cmd_train->add_option("--set", overrides, "override, key=value; repeatable");

  std::string models_arg = "1..13";
  std::string rates_arg = "0.1..0.5";
  int parallel = 1;
  auto* cmd_grid =
      app.add_subcommand("grid", "sweep preset placements against dropout rates");
  cmd_grid->add_option("-c,--config", config_path, "config file")->required();
  cmd_grid->add_option("--set", overrides, "override, key=value; repeatable");
  cmd_grid->add_option("--models", models_arg, "preset ids, e.g. 1..13 or 2,5");
  cmd_grid->add_option("--rates", rates_arg, "dropout rates, e.g. 0.1..0.5 or 0.2,0.4");
  cmd_grid->add_option("--parallel", parallel, "concurrent grid cells");

  std::string checkpoint_path;
  std::string data_path;
  std::string format_name = "jsonl";
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  cmd_eval->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
  cmd_eval->add_option("data", data_path, "corpus file")->required();
  cmd_eval->add_option("--format", format_name, "jsonl or tsv");

  std::string size = "small";
  auto* cmd_gradcheck = app.add_subcommand(
      "gradcheck", "compare tape gradients against finite differences");
  cmd_gradcheck->add_option("--size", size, "fixture size (small)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_train->parsed()) {
      const dropnet::RunConfig config =
          dropnet::load_run_config(config_path, overrides);
      const dropnet::TrainOutcome outcome = dropnet::run_train(config);
      std::printf("val_acc=%.4f test_acc=%.4f\n", outcome.best_val_acc,
                  outcome.test_acc);
      return kExitOk;
    }
    if (cmd_grid->parsed()) {
      const dropnet::RunConfig config =
          dropnet::load_run_config(config_path, overrides);
      dropnet::GridSpec spec;
      spec.model_ids = parse_model_ids(models_arg);
      spec.rates = parse_rates(rates_arg);
      spec.parallel = parallel;
      const dropnet::GridResult result = dropnet::run_grid(config, spec);
      int failed = 0;
      for (const auto& row : result.cells) {
        for (const auto& cell : row) {
          if (!cell.ok) ++failed;
        }
      }
      std::printf("grid complete: %zu rows x %zu rates, %d failed cells\n",
                  result.model_ids.size(), result.rates.size(), failed);
      return kExitOk;
    }
    if (cmd_eval->parsed()) {
      const dropnet::EvalOutcome outcome = dropnet::run_eval(
          checkpoint_path, data_path, dropnet::parse_corpus_format(format_name));
      std::printf("accuracy=%.4f loss=%.6f\n", outcome.accuracy, outcome.mean_loss);
      return kExitOk;
    }
    if (cmd_gradcheck->parsed()) {
      if (size != "small") {
        throw dropnet::ConfigError("unknown gradcheck size '" + size + "'");
      }
      const dropnet::GradcheckReport report = dropnet::gradcheck_small_model();
      for (const dropnet::GradcheckGroup& group : report.groups) {
        std::printf("%-32s max_rel_err=%.3e\n", group.name.c_str(),
                    group.max_rel_err);
      }
      std::printf("worst=%.3e tolerance=%.1e %s\n", report.worst, report.tolerance,
                  report.passed() ? "ok" : "FAILED");
      return report.passed() ? kExitOk : kExitNumeric;
    }
  } catch (const dropnet::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const dropnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
