#include "dropnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

constexpr const char* kVersionTag = "dropnet-checkpoint v1";

static_assert(std::endian::native == std::endian::little,
              "checkpoint values are written little-endian");

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

[[noreturn]] void bad_checkpoint(const std::filesystem::path& path,
                                 const std::string& what) {
  throw CheckpointError(path.string() + ": " + what);
}

std::string expect_line(std::ifstream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) bad_checkpoint(path, "truncated header");
  return line;
}

// "key = value" with a fixed key
std::string expect_field(std::ifstream& in, const std::filesystem::path& path,
                         const std::string& key) {
  const std::string line = expect_line(in, path);
  const std::string prefix = key + " = ";
  if (line.rfind(prefix, 0) != 0) {
    bad_checkpoint(path, "expected '" + key + "' field, got '" + line + "'");
  }
  return line.substr(prefix.size());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NliModel& model,
                     const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());

  const ModelConfig& config = model.config();
  out << kVersionTag << '\n';
  out << "embedding_dim = " << config.embedding_dim << '\n';
  out << "hidden_units = " << config.hidden_units << '\n';
  out << "num_classes = " << config.num_classes << '\n';
  out << "placement = " << config.placement.to_string() << '\n';
  out << "drop_rate = " << format_double(config.drop_rate) << '\n';
  out << "inverted_dropout = " << (config.inverted_dropout ? 1 : 0) << '\n';
  out << "trainable_embeddings = " << (config.trainable_embeddings ? 1 : 0) << '\n';
  out << "seed = " << config.seed << '\n';
  out << "vocab " << vocab.size() << '\n';
  for (const std::string& token : vocab.tokens()) out << token << '\n';
  out << "tensors " << model.parameters().size() << '\n';
  for (const NamedParam& param : model.parameters()) {
    out << param.name << ' ' << param.value.rank();
    for (int extent : param.value.shape()) out << ' ' << extent;
    out << '\n';
  }
  out << "binary\n";
  for (const NamedParam& param : model.parameters()) {
    auto values = param.value.values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed for checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());

  const std::string version = expect_line(in, path);
  if (version != kVersionTag) {
    bad_checkpoint(path, "version mismatch: got '" + version + "', expected '" +
                             std::string(kVersionTag) + "'");
  }

  ModelConfig config;
  try {
    config.embedding_dim = std::stoi(expect_field(in, path, "embedding_dim"));
    config.hidden_units = std::stoi(expect_field(in, path, "hidden_units"));
    config.num_classes = std::stoi(expect_field(in, path, "num_classes"));
    config.placement = PlacementSet::parse(expect_field(in, path, "placement"));
    config.drop_rate = std::stod(expect_field(in, path, "drop_rate"));
    config.inverted_dropout = expect_field(in, path, "inverted_dropout") == "1";
    config.trainable_embeddings =
        expect_field(in, path, "trainable_embeddings") == "1";
    config.seed = std::stoull(expect_field(in, path, "seed"));
  } catch (const ConfigError& e) {
    bad_checkpoint(path, e.what());
  } catch (const std::exception&) {
    bad_checkpoint(path, "malformed config field");
  }

  std::string word;
  int count = 0;
  {
    std::istringstream header(expect_line(in, path));
    if (!(header >> word >> count) || word != "vocab" || count < 2) {
      bad_checkpoint(path, "malformed vocab header");
    }
  }
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) tokens.push_back(expect_line(in, path));
  Vocabulary vocab = Vocabulary::from_tokens(std::move(tokens));

  {
    std::istringstream header(expect_line(in, path));
    if (!(header >> word >> count) || word != "tensors" || count < 1) {
      bad_checkpoint(path, "malformed tensor manifest header");
    }
  }
  struct ManifestEntry {
    std::string name;
    std::vector<int> shape;
  };
  std::vector<ManifestEntry> manifest;
  manifest.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::istringstream entry(expect_line(in, path));
    ManifestEntry item;
    int rank = 0;
    if (!(entry >> item.name >> rank) || rank < 1) {
      bad_checkpoint(path, "malformed manifest entry " + std::to_string(i));
    }
    item.shape.resize(static_cast<std::size_t>(rank));
    for (int d = 0; d < rank; ++d) {
      if (!(entry >> item.shape[static_cast<std::size_t>(d)])) {
        bad_checkpoint(path, "malformed manifest entry " + std::to_string(i));
      }
    }
    manifest.push_back(std::move(item));
  }
  if (expect_line(in, path) != "binary") {
    bad_checkpoint(path, "missing binary section marker");
  }

  NliModel model(config, vocab.size());
  if (model.parameters().size() != manifest.size()) {
    bad_checkpoint(path, "manifest lists " + std::to_string(manifest.size()) +
                             " tensors, model has " +
                             std::to_string(model.parameters().size()));
  }
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    NamedParam& param = model.parameters()[i];
    if (param.name != manifest[i].name || param.value.shape() != manifest[i].shape) {
      bad_checkpoint(path, "manifest entry '" + manifest[i].name +
                               "' does not match model tensor '" + param.name + "'");
    }
    auto values = param.value.values();
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (in.gcount() !=
        static_cast<std::streamsize>(values.size() * sizeof(double))) {
      bad_checkpoint(path, "truncated tensor data for '" + param.name + "'");
    }
  }
  return {std::move(model), std::move(vocab)};
}

}  // namespace dropnet
