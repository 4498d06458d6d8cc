#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dropnet/layers.hpp"
#include "dropnet/rng.hpp"
#include "dropnet/tensor.hpp"

namespace dropnet {

struct Example {
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;
  int label = 0;
};

enum class CorpusFormat { jsonl, tsv };
CorpusFormat parse_corpus_format(const std::string& name);

// Which canonical label inventory a corpus uses.
//   three_way: entailment=0, contradiction=1, neutral=2
//   two_way:   entails=0, neutral=1
enum class LabelFamily { three_way, two_way };

struct LoadResult {
  std::vector<Example> examples;
  int skipped = 0;  // records whose gold label is "-"
  LabelFamily family = LabelFamily::three_way;
  std::vector<std::string> label_names;  // canonical order

  int num_classes() const { return static_cast<int>(label_names.size()); }
};

// Lowercases, splits punctuation characters into their own tokens, then
// splits on whitespace.
std::vector<std::string> tokenize(const std::string& text);

// jsonl: one object per line with sentence1 / sentence2 / gold_label.
// tsv: premise \t hypothesis \t label, no header.
LoadResult load_examples(const std::filesystem::path& path, CorpusFormat format);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  // Tokens with corpus frequency >= min_count, indexed in first-appearance
  // order after the reserved slots.
  static Vocabulary build(const std::vector<Example>& examples, int min_count);
  // Rebuilds from an index->token list whose first two entries are the
  // reserved pad/unk tokens (checkpoint loading).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int lookup(const std::string& token) const;  // kUnk when absent
  const std::string& token(int index) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct PretrainedResult {
  EmbeddingTable table;
  int found = 0;    // vocabulary tokens covered by the file
  int missing = 0;  // vocabulary tokens left on their random init
};

// Text format: `token v1 v2 ... v<dim>` per line. Vocabulary rows present in
// the file are copied verbatim; absent rows keep the seeded uniform init;
// the pad row stays zero.
PretrainedResult load_pretrained(const std::filesystem::path& path,
                                 const Vocabulary& vocab, int dim, Rng& rng,
                                 bool trainable);

struct Batch {
  // B rows, padded per batch to that batch's own maximum lengths.
  std::vector<std::vector<int>> premise;
  std::vector<std::vector<int>> hypothesis;
  std::vector<Mask> premise_mask;
  std::vector<Mask> hypothesis_mask;
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

// Shuffles by seed, groups, pads each group to its own maxima; the final
// partial batch is kept.
std::vector<Batch> batchify(const std::vector<Example>& examples,
                            const Vocabulary& vocab, int batch_size,
                            std::uint64_t shuffle_seed);

}  // namespace dropnet
