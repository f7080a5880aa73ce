#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphotok/corpus.h"

namespace morphotok {

using WordCounts = std::map<std::string, std::uint64_t>;
using Segmentation = std::vector<std::string>;

enum class SegmenterSource { kExternalAnalyzer, kExternalMorfessor, kMdlTrained };

std::string_view SegmenterSourceName(SegmenterSource s);
SegmenterSource ParseSegmenterSource(std::string_view name);

// Counts whitespace-delimited words over a corpus.
WordCounts CountWords(const Corpus& corpus);

// Lookup statistics; lexicons are immutable, so callers own the counters.
struct SegmentStats {
  std::size_t lookups = 0;
  std::size_t misses = 0;
};

class SegmentationLexicon {
 public:
  SegmentationLexicon() = default;
  SegmentationLexicon(std::map<std::string, Segmentation> entries,
                      SegmenterSource source,
                      std::size_t duplicate_overrides = 0,
                      std::size_t skipped_nonconcatenating = 0);

  const std::map<std::string, Segmentation>& entries() const {
    return entries_;
  }
  SegmenterSource source() const { return source_; }
  std::size_t size() const { return entries_.size(); }

  // Lines whose word was already present; the later line wins.
  std::size_t duplicate_overrides() const { return duplicate_overrides_; }
  // Entries whose segments do not concatenate to the word; not loaded.
  std::size_t skipped_nonconcatenating() const { return skipped_; }

  // Returns [word] on a miss.
  Segmentation Segment(std::string_view word, SegmentStats* stats = nullptr) const;

 private:
  std::map<std::string, Segmentation> entries_;
  SegmenterSource source_ = SegmenterSource::kExternalAnalyzer;
  std::size_t duplicate_overrides_ = 0;
  std::size_t skipped_ = 0;
};

// Reads `word<TAB>seg1 seg2 ...` lines. Blank lines are skipped.
SegmentationLexicon LoadLexicon(
    const std::filesystem::path& path,
    SegmenterSource source = SegmenterSource::kExternalAnalyzer,
    Normalization normalization = Normalization::kNfc);

struct MdlConfig {
  int epochs = 5;
  // Weight of the corpus code length relative to the lexicon code length.
  double corpus_weight = 1.0;
};

// Morfessor-baseline style code length of a segmented word list:
//   corpus  = -sum over morph tokens of ln(count / total)
//   lexicon = -sum over morph types, over their code points plus an
//             end-of-morph symbol, of ln p(symbol), where p is the symbol
//             unigram estimated from the morph types themselves.
// total = corpus_weight * corpus + lexicon, in nats.
double MdlCost(const WordCounts& words,
               const std::map<std::string, Segmentation>& segmentation,
               double corpus_weight = 1.0);

class MdlModel {
 public:
  MdlModel() = default;
  MdlModel(std::map<std::string, std::uint64_t> morph_counts, MdlConfig config);

  const std::map<std::string, std::uint64_t>& morph_counts() const {
    return morph_counts_;
  }
  std::uint64_t total_count() const { return total_; }
  const MdlConfig& config() const { return config_; }

  // Maximum-probability split of `word` into known morphs; code points that
  // no morph covers are emitted singly at a fixed penalty.
  Segmentation Segment(std::string_view word) const;

 private:
  std::map<std::string, std::uint64_t> morph_counts_;
  std::uint64_t total_ = 0;
  std::size_t max_morph_length_ = 0;
  MdlConfig config_;
};

struct MdlTrainingResult {
  MdlModel model;
  std::map<std::string, Segmentation> segmentation;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  // Total cost after every accepted re-segmentation, in order.
  std::vector<double> step_costs;
};

// Greedy recursive binary splitting, visiting words in a seeded random
// order for `config.epochs` epochs. A word's new analysis is kept only if
// it lowers the total cost.
MdlTrainingResult TrainMdl(const WordCounts& words, const MdlConfig& config,
                           std::uint64_t seed);

void SaveMdlModel(const MdlModel& model, const std::filesystem::path& path);
MdlModel LoadMdlModel(const std::filesystem::path& path);

// A lexicon or an MDL model behind one interface. Cheap to copy.
class Segmenter {
 public:
  Segmenter() = default;
  explicit Segmenter(std::shared_ptr<const SegmentationLexicon> lexicon)
      : lexicon_(std::move(lexicon)) {}
  explicit Segmenter(std::shared_ptr<const MdlModel> mdl)
      : mdl_(std::move(mdl)) {}

  bool empty() const { return !lexicon_ && !mdl_; }
  const SegmentationLexicon* lexicon() const { return lexicon_.get(); }
  const MdlModel* mdl() const { return mdl_.get(); }

  // Identity when empty.
  Segmentation Segment(std::string_view word, SegmentStats* stats = nullptr) const;

 private:
  std::shared_ptr<const SegmentationLexicon> lexicon_;
  std::shared_ptr<const MdlModel> mdl_;
};

Segmentation SegmentWord(std::string_view word, const Segmenter& segmenter,
                         SegmentStats* stats = nullptr);

enum class MarkerPlacement { kSuffixNonFinal, kPrefixNonInitial, kNone };

struct MarkerPolicy {
  std::string marker = "@@";
  MarkerPlacement placement = MarkerPlacement::kSuffixNonFinal;
};

std::string_view MarkerPlacementName(MarkerPlacement p);
MarkerPlacement ParseMarkerPlacement(std::string_view name);

// "books here" with books -> [book, s] becomes "book@@ s here".
std::string SegmentLine(std::string_view line, const Segmenter& segmenter,
                        const MarkerPolicy& policy,
                        SegmentStats* stats = nullptr);

Corpus ApplySegmentation(const Corpus& corpus, const Segmenter& segmenter,
                         const MarkerPolicy& policy,
                         SegmentStats* stats = nullptr);

// Inverse of SegmentLine for kSuffixNonFinal and kPrefixNonInitial.
std::string JoinSegmentedLine(std::string_view line, const MarkerPolicy& policy);

}  // namespace morphotok
