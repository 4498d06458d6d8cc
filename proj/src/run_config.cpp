#include "dropnet/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

struct KeyDef {
  const char* key;
  const char* type;
  const char* preset;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> apply;
};

std::string trim(const std::string& s) {
  const char* ws = " \t";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  return s.substr(begin, s.find_last_not_of(ws) - begin + 1);
}

int parse_int(const std::string& key, const std::string& value, int min_value) {
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    if (parsed < min_value) {
      throw ConfigError(key + " must be >= " + std::to_string(min_value) +
                        ", got " + value);
    }
    return parsed;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + " expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError(key + " expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + " expects true/false, got '" + value + "'");
}

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> defs = {
      {"train_path", "path", "", "training corpus",
       [](RunConfig& c, const std::string& v) { c.train_path = v; }},
      {"val_path", "path", "", "validation corpus",
       [](RunConfig& c, const std::string& v) { c.val_path = v; }},
      {"test_path", "path", "", "test corpus; validation is reused when empty",
       [](RunConfig& c, const std::string& v) { c.test_path = v; }},
      {"embeddings_path", "path", "", "pretrained embedding text file; random init when empty",
       [](RunConfig& c, const std::string& v) { c.embeddings_path = v; }},
      {"format", "jsonl|tsv", "jsonl", "corpus file format",
       [](RunConfig& c, const std::string& v) { c.format = parse_corpus_format(v); }},
      {"min_count", "int>=1", "1", "vocabulary frequency threshold",
       [](RunConfig& c, const std::string& v) { c.min_count = parse_int("min_count", v, 1); }},
      {"embedding_dim", "int>=1", "300", "word vector width",
       [](RunConfig& c, const std::string& v) { c.embedding_dim = parse_int("embedding_dim", v, 1); }},
      {"hidden_units", "int>=1", "100", "LSTM units per direction",
       [](RunConfig& c, const std::string& v) { c.hidden_units = parse_int("hidden_units", v, 1); }},
      {"num_classes", "int", "0", "class count; 0 derives it from the data labels",
       [](RunConfig& c, const std::string& v) { c.num_classes = parse_int("num_classes", v, 0); }},
      {"placement", "sites", "none",
       "dropout sites: comma list of embedding,recurrent,intra_attention,"
       "inter_attention,mlp; or model_1..model_13; or none",
       [](RunConfig& c, const std::string& v) { c.placement = PlacementSet::parse(v); }},
      {"drop_rate", "float in [0,1)", "0.0", "probability a unit is dropped",
       [](RunConfig& c, const std::string& v) {
         c.drop_rate = parse_double("drop_rate", v);
         if (!(c.drop_rate >= 0.0) || c.drop_rate >= 1.0) {
           throw ConfigError("drop_rate must lie in [0, 1), got " + v);
         }
       }},
      {"inverted_dropout", "bool", "false",
       "scale by 1/(1-drop_rate) at train time instead of rescaling at eval",
       [](RunConfig& c, const std::string& v) {
         c.inverted_dropout = parse_bool("inverted_dropout", v);
       }},
      {"trainable_embeddings", "bool", "true", "update the embedding table during training",
       [](RunConfig& c, const std::string& v) {
         c.trainable_embeddings = parse_bool("trainable_embeddings", v);
       }},
      {"l2_lambda", "float>=0", "0.0", "L2 penalty weight over weight matrices",
       [](RunConfig& c, const std::string& v) {
         c.l2_lambda = parse_double("l2_lambda", v);
         if (c.l2_lambda < 0.0) throw ConfigError("l2_lambda must be >= 0, got " + v);
       }},
      {"epochs", "int>=1", "50", "maximum training epochs",
       [](RunConfig& c, const std::string& v) { c.epochs = parse_int("epochs", v, 1); }},
      {"batch_size", "int>=1", "32", "examples per optimiser step",
       [](RunConfig& c, const std::string& v) { c.batch_size = parse_int("batch_size", v, 1); }},
      {"learning_rate", "float>0", "0.001", "Adam step size",
       [](RunConfig& c, const std::string& v) {
         c.learning_rate = parse_double("learning_rate", v);
         if (!(c.learning_rate > 0.0)) {
           throw ConfigError("learning_rate must be > 0, got " + v);
         }
       }},
      {"patience", "int>=1", "5", "epochs without validation improvement before stopping",
       [](RunConfig& c, const std::string& v) { c.patience = parse_int("patience", v, 1); }},
      {"seed", "uint64", "1", "master seed; DROPNET_SEED overrides it",
       [](RunConfig& c, const std::string& v) {
         try {
           std::size_t used = 0;
           c.seed = std::stoull(v, &used);
           if (used != v.size()) throw std::invalid_argument(v);
         } catch (const std::exception&) {
           throw ConfigError("seed expects an unsigned integer, got '" + v + "'");
         }
       }},
      {"out_dir", "path", "out", "directory for metrics, summary and checkpoint",
       [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"metrics_timing", "wall|none", "wall",
       "seconds column source; none writes 0.000 and keeps metrics byte-reproducible",
       [](RunConfig& c, const std::string& v) {
         if (v == "wall") {
           c.wall_clock = true;
         } else if (v == "none") {
           c.wall_clock = false;
         } else {
           throw ConfigError("metrics_timing expects wall or none, got '" + v + "'");
         }
       }},
  };
  return defs;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value,
               const std::string& where) {
  for (const KeyDef& def : schema()) {
    if (key == def.key) {
      def.apply(config, value);
      return;
    }
  }
  throw ConfigError(where + ": unknown key '" + key + "'");
}

void apply_line(RunConfig& config, const std::string& raw, const std::string& where) {
  std::string line = raw;
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(where + ": expected 'key = value', got '" + trim(raw) + "'");
  }
  apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
}

}  // namespace

ModelConfig RunConfig::model_config() const {
  ModelConfig mc;
  mc.embedding_dim = embedding_dim;
  mc.hidden_units = hidden_units;
  mc.num_classes = num_classes;
  mc.placement = placement;
  mc.drop_rate = drop_rate;
  mc.inverted_dropout = inverted_dropout;
  mc.trainable_embeddings = trainable_embeddings;
  mc.seed = seed;
  return mc;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch_size;
  tc.learning_rate = learning_rate;
  tc.l2_lambda = l2_lambda;
  tc.patience = patience;
  tc.seed = seed;
  tc.wall_clock = wall_clock;
  return tc;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    apply_line(config, line, path.string() + ":" + std::to_string(line_no));
  }
  for (const std::string& override_kv : overrides) {
    const auto eq = override_kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + override_kv + "' is not key=value");
    }
    apply_key(config, trim(override_kv.substr(0, eq)),
              trim(override_kv.substr(eq + 1)), "override");
  }
  if (const char* env_seed = std::getenv("DROPNET_SEED")) {
    apply_key(config, "seed", env_seed, "DROPNET_SEED");
  }
  return config;
}

RunConfig run_config_from_map(const std::map<std::string, std::string>& values) {
  RunConfig config;
  for (const auto& [key, value] : values) {
    apply_key(config, key, value, "config");
  }
  if (const char* env_seed = std::getenv("DROPNET_SEED")) {
    apply_key(config, "seed", env_seed, "DROPNET_SEED");
  }
  return config;
}

std::string config_help() {
  std::ostringstream out;
  out << "Configuration keys (key = value per line, '#' comments):\n";
  for (const KeyDef& def : schema()) {
    out << "  " << def.key << " (" << def.type << ", default: "
        << (def.preset[0] ? def.preset : "empty") << ") - " << def.help << '\n';
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const KeyDef& def : schema()) keys.emplace_back(def.key);
  return keys;
}

}  // namespace dropnet
