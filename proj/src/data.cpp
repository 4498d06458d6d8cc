#include "dropnet/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

const std::vector<std::string> kThreeWay = {"entailment", "contradiction", "neutral"};
const std::vector<std::string> kTwoWay = {"entails", "neutral"};

struct RawRecord {
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;
  std::string label;
  int line = 0;
};

[[noreturn]] void data_error(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

int label_index(const std::vector<std::string>& names, const std::string& label) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == label) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "tsv") return CorpusFormat::tsv;
  throw ConfigError("unknown corpus format '" + name + "' (expected jsonl or tsv)");
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (std::ispunct(ch)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(ch));
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return tokens;
}

LoadResult load_examples(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());

  std::vector<RawRecord> records;
  std::vector<std::string> seen_labels;  // in encounter order, for error messages
  int skipped = 0;
  bool saw_two_way_label = false;
  bool saw_three_way_only_label = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RawRecord record;
    record.line = line_no;
    if (format == CorpusFormat::jsonl) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        data_error(path, line_no, std::string("bad json: ") + e.what());
      }
      if (!parsed.contains("sentence1") || !parsed.contains("sentence2") ||
          !parsed.contains("gold_label")) {
        data_error(path, line_no,
                   "record needs sentence1, sentence2 and gold_label fields");
      }
      if (!parsed["sentence1"].is_string() || !parsed["sentence2"].is_string() ||
          !parsed["gold_label"].is_string()) {
        data_error(path, line_no, "sentence and label fields must be strings");
      }
      record.premise = tokenize(parsed["sentence1"].get<std::string>());
      record.hypothesis = tokenize(parsed["sentence2"].get<std::string>());
      record.label = parsed["gold_label"].get<std::string>();
    } else {
      std::vector<std::string> fields;
      std::stringstream stream(line);
      std::string field;
      while (std::getline(stream, field, '\t')) fields.push_back(field);
      if (fields.size() != 3) {
        data_error(path, line_no,
                   "expected 3 tab-separated columns, got " +
                       std::to_string(fields.size()));
      }
      record.premise = tokenize(fields[0]);
      record.hypothesis = tokenize(fields[1]);
      record.label = fields[2];
    }

    if (record.label == "-") {  // annotators reached no consensus
      ++skipped;
      continue;
    }
    if (record.premise.empty() || record.hypothesis.empty()) {
      data_error(path, line_no, "empty premise or hypothesis after tokenization");
    }
    if (std::find(seen_labels.begin(), seen_labels.end(), record.label) ==
        seen_labels.end()) {
      seen_labels.push_back(record.label);
    }
    if (label_index(kTwoWay, record.label) == 0) {
      saw_two_way_label = true;  // "entails"
    } else if (record.label == "entailment" || record.label == "contradiction") {
      saw_three_way_only_label = true;
    } else if (record.label != "neutral") {
      std::string inventory;
      for (const std::string& l : seen_labels) {
        if (!inventory.empty()) inventory += ", ";
        inventory += l;
      }
      data_error(path, line_no,
                 "unknown label '" + record.label + "' (labels seen so far: " +
                     inventory + ")");
    }
    records.push_back(std::move(record));
  }

  if (saw_two_way_label && saw_three_way_only_label) {
    throw DataError(path.string() + ": mixes two-way and three-way labels");
  }

  LoadResult result;
  result.skipped = skipped;
  result.family = saw_two_way_label ? LabelFamily::two_way : LabelFamily::three_way;
  result.label_names = saw_two_way_label ? kTwoWay : kThreeWay;
  result.examples.reserve(records.size());
  for (RawRecord& record : records) {
    Example example;
    example.premise = std::move(record.premise);
    example.hypothesis = std::move(record.hypothesis);
    example.label = label_index(result.label_names, record.label);
    result.examples.push_back(std::move(example));
  }
  return result;
}

Vocabulary Vocabulary::build(const std::vector<Example>& examples, int min_count) {
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> order;
  auto tally = [&](const std::vector<std::string>& tokens) {
    for (const std::string& token : tokens) {
      if (++counts[token] == 1) order.push_back(token);
    }
  };
  for (const Example& example : examples) {
    tally(example.premise);
    tally(example.hypothesis);
  }
  Vocabulary vocab;
  vocab.tokens_ = {"<pad>", "<unk>"};
  for (const std::string& token : order) {
    if (counts[token] >= min_count) vocab.tokens_.push_back(token);
  }
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    vocab.index_[vocab.tokens_[i]] = static_cast<int>(i);
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2) {
    throw DataError("vocabulary needs at least the two reserved tokens");
  }
  Vocabulary vocab;
  vocab.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    vocab.index_[vocab.tokens_[i]] = static_cast<int>(i);
  }
  return vocab;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int index) const {
  if (index < 0 || index >= size()) {
    throw IndexError("vocabulary index " + std::to_string(index) +
                     " out of range [0, " + std::to_string(size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(index)];
}

PretrainedResult load_pretrained(const std::filesystem::path& path,
                                 const Vocabulary& vocab, int dim, Rng& rng,
                                 bool trainable) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());

  PretrainedResult result;
  result.table = EmbeddingTable::random(vocab.size(), dim, rng, trainable);
  std::vector<bool> covered(static_cast<std::size_t>(vocab.size()), false);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream stream(line);
    std::string token;
    stream >> token;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(dim));
    double v = 0.0;
    while (stream >> v) values.push_back(v);
    if (!stream.eof()) {
      data_error(path, line_no, "malformed number in embedding row");
    }
    if (static_cast<int>(values.size()) != dim) {
      data_error(path, line_no,
                 "embedding row has " + std::to_string(values.size()) +
                     " values, configured dimension is " + std::to_string(dim));
    }
    const int row = vocab.lookup(token);
    if (row == Vocabulary::kUnk && token != vocab.token(Vocabulary::kUnk)) continue;
    if (row == result.table.pad_index) continue;
    if (covered[static_cast<std::size_t>(row)]) continue;  // first occurrence wins
    covered[static_cast<std::size_t>(row)] = true;
    auto table = result.table.table.values();
    for (int c = 0; c < dim; ++c) {
      table[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim) +
            static_cast<std::size_t>(c)] = values[static_cast<std::size_t>(c)];
    }
  }

  for (int row = 0; row < vocab.size(); ++row) {
    if (row == result.table.pad_index) continue;
    if (covered[static_cast<std::size_t>(row)]) {
      ++result.found;
    } else {
      ++result.missing;
    }
  }
  return result;
}

std::vector<Batch> batchify(const std::vector<Example>& examples,
                            const Vocabulary& vocab, int batch_size,
                            std::uint64_t shuffle_seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(shuffle_seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    Batch batch;
    std::size_t max_premise = 1, max_hypothesis = 1;
    for (std::size_t i = start; i < stop; ++i) {
      const Example& example = examples[order[i]];
      max_premise = std::max(max_premise, example.premise.size());
      max_hypothesis = std::max(max_hypothesis, example.hypothesis.size());
    }
    auto pad_row = [&vocab](const std::vector<std::string>& tokens,
                            std::size_t width, std::vector<int>& ids, Mask& mask) {
      ids.assign(width, Vocabulary::kPad);
      mask.assign(width, 0);
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        ids[t] = vocab.lookup(tokens[t]);
        mask[t] = 1;
      }
    };
    for (std::size_t i = start; i < stop; ++i) {
      const Example& example = examples[order[i]];
      std::vector<int> ids;
      Mask mask;
      pad_row(example.premise, max_premise, ids, mask);
      batch.premise.push_back(std::move(ids));
      batch.premise_mask.push_back(std::move(mask));
      pad_row(example.hypothesis, max_hypothesis, ids, mask);
      batch.hypothesis.push_back(std::move(ids));
      batch.hypothesis_mask.push_back(std::move(mask));
      batch.labels.push_back(example.label);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace dropnet
