#include "dropnet/grid.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

struct CellJob {
  std::size_t row;
  std::size_t col;  // column to fill; the baseline fills the whole row
  int model_id;
  double rate;
  bool whole_row;
};

}  // namespace

std::string format_rate(double rate) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", rate);
  return buffer;
}

GridResult grid_search(const ModelConfig& base_model, const TrainConfig& base_train,
                       const std::vector<Example>& train_data,
                       const std::vector<Example>& val_data, const Vocabulary& vocab,
                       const EmbeddingTable* pretrained, const GridSpec& spec,
                       const std::filesystem::path& out_dir) {
  if (spec.model_ids.empty() || spec.rates.empty()) {
    throw ConfigError("grid needs at least one model id and one rate");
  }
  std::filesystem::create_directories(out_dir);

  GridResult result;
  result.model_ids = spec.model_ids;
  result.rates = spec.rates;
  result.cells.assign(spec.model_ids.size(),
                      std::vector<GridCell>(spec.rates.size()));

  std::vector<CellJob> jobs;
  for (std::size_t row = 0; row < spec.model_ids.size(); ++row) {
    const int id = spec.model_ids[row];
    if (id == 1) {
      // the no-dropout baseline ignores the rate axis
      jobs.push_back({row, 0, id, 0.0, true});
    } else {
      for (std::size_t col = 0; col < spec.rates.size(); ++col) {
        jobs.push_back({row, col, id, spec.rates[col], false});
      }
    }
  }

  auto run_job = [&](const CellJob& job) {
    GridCell cell;
    cell.model_id = job.model_id;
    cell.rate = job.rate;
    try {
      ModelConfig model_config = base_model;
      model_config.placement = placement_for_model(job.model_id);
      model_config.drop_rate = job.rate;
      model_config.seed = cell_seed(base_model.seed, job.model_id, job.rate);

      TrainConfig train_config = base_train;
      train_config.seed = model_config.seed;

      std::optional<NliModel> model;
      if (pretrained != nullptr) {
        model.emplace(model_config, pretrained->clone());
      } else {
        model.emplace(model_config, vocab.size());
      }
      const TrainReport report =
          train(*model, train_data, val_data, vocab, train_config);

      const std::filesystem::path cell_dir =
          out_dir / ("cell_model" + std::to_string(job.model_id) + "_dr" +
                     format_rate(job.rate));
      std::filesystem::create_directories(cell_dir);
      write_metrics_csv(cell_dir / "metrics.csv", report.epochs);

      cell.ok = true;
      cell.best_val_acc = report.best_val_acc;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    if (job.whole_row) {
      for (GridCell& slot : result.cells[job.row]) {
        slot = cell;
        slot.rate = 0.0;
      }
    } else {
      result.cells[job.row][job.col] = cell;
    }
  };

  const int workers = std::max(1, spec.parallel);
  if (workers == 1 || jobs.size() <= 1) {
    for (const CellJob& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t at = next.fetch_add(1);
        if (at >= jobs.size()) return;
        run_job(jobs[at]);
      }
    };
    std::vector<std::thread> pool;
    const int used = std::min<int>(workers, static_cast<int>(jobs.size()));
    pool.reserve(static_cast<std::size_t>(used));
    for (int i = 0; i < used; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return result;
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write grid file " + path.string());
  out << "model_id";
  for (double rate : result.rates) out << ",dr_" << format_rate(rate);
  out << '\n';
  for (std::size_t row = 0; row < result.model_ids.size(); ++row) {
    out << result.model_ids[row];
    for (const GridCell& cell : result.cells[row]) {
      if (cell.ok) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%.6f", cell.best_val_acc);
        out << ',' << buffer;
      } else {
        out << ",failed";
      }
    }
    out << '\n';
  }
}

}  // namespace dropnet
