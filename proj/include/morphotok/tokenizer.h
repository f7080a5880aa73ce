#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "morphotok/bpe.h"
#include "morphotok/corpus.h"
#include "morphotok/segment.h"
#include "morphotok/unigram.h"

namespace morphotok {

enum class Family { kCharacter, kWord, kMorphemic, kBpe, kUnigram };

std::string_view FamilyName(Family f);
Family ParseFamily(std::string_view name);

using TokenId = std::int32_t;

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr TokenId kUnkId = 0;
inline constexpr int kModelFormatVersion = 1;

struct PreTokenizerSpec {
  enum class Kind { kNone, kLexicon, kMdl };
  Kind kind = Kind::kNone;
  // As written in the model file; relative paths resolve against the model's
  // directory.
  std::string path;
  // Hex digest of the segmenter file the model was trained with.
  std::string fingerprint;
  MarkerPolicy marker;

  // "none", "lexicon:PATH", "mdl:PATH".
  static PreTokenizerSpec Parse(std::string_view text);
  std::string ToString() const;
};

std::string_view PreTokenizerKindName(PreTokenizerSpec::Kind kind);

// Whitespace splitting followed by the optional segmenter.
class PreTokenizer {
 public:
  PreTokenizer() = default;
  PreTokenizer(PreTokenizerSpec spec, Segmenter segmenter)
      : spec_(std::move(spec)), segmenter_(std::move(segmenter)) {}

  // Loads the segmenter named by `spec`. `base` anchors relative paths.
  static PreTokenizer Load(PreTokenizerSpec spec,
                           const std::filesystem::path& base = {});

  const PreTokenizerSpec& spec() const { return spec_; }
  const Segmenter& segmenter() const { return segmenter_; }

  // Pre-tokens of one whitespace-free word.
  std::vector<std::string> SplitWord(std::string_view word) const;

  PreTokenCounts Count(const Corpus& corpus) const;

 private:
  PreTokenizerSpec spec_;
  Segmenter segmenter_;
};

struct WordSpan {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // token index, exclusive
  bool operator==(const WordSpan&) const = default;
};

struct Encoding {
  std::vector<TokenId> ids;
  // One span per whitespace-delimited word, in order.
  std::vector<WordSpan> word_spans;
  bool operator==(const Encoding&) const = default;
};

struct UnigramPieceTable {
  std::unordered_map<std::string, double> log_probs;
  std::size_t max_piece_length = 0;
  double unk_log_prob = 0.0;
};

// Immutable once built; Encode is safe to call concurrently.
class TokenizerModel {
 public:
  struct Parts {
    Family family = Family::kWord;
    std::vector<std::string> vocab;       // vocab[0] is the unk token
    std::vector<BpeMerge> merges;         // bpe only
    std::vector<double> piece_log_probs;  // unigram only, aligned with vocab
    PreTokenizer pre_tokenizer;
    std::size_t requested_vocab_size = 0;
  };

  // Validates every model invariant; throws ContractError on violation.
  explicit TokenizerModel(Parts parts);

  Family family() const { return parts_.family; }
  const std::vector<std::string>& vocab() const { return parts_.vocab; }
  std::size_t vocab_size() const { return parts_.vocab.size(); }
  const std::vector<BpeMerge>& merges() const { return parts_.merges; }
  const std::vector<double>& piece_log_probs() const {
    return parts_.piece_log_probs;
  }
  const PreTokenizer& pre_tokenizer() const { return parts_.pre_tokenizer; }
  std::size_t requested_vocab_size() const { return parts_.requested_vocab_size; }
  TokenId unk_id() const { return kUnkId; }

  // -1 when absent.
  TokenId IdOf(std::string_view token) const;
  const std::string& TokenOf(TokenId id) const;

  // Token ids of one pre-token.
  void EncodePreToken(std::string_view pretoken, std::vector<TokenId>* out) const;

  Encoding Encode(std::string_view text) const;
  // Throws ContractError on an out-of-range id or malformed spans.
  std::string Decode(const Encoding& encoding) const;

 private:
  Parts parts_;
  std::unordered_map<std::string, TokenId> ids_;
  BpeMergeTable merge_table_;
  UnigramPieceTable pieces_;
};

TokenizerModel TrainBpe(const Corpus& corpus, std::size_t vocab_size,
                        const PreTokenizer& pre_tokenizer);

TokenizerModel TrainUnigram(const Corpus& corpus, std::size_t vocab_size,
                            const PreTokenizer& pre_tokenizer,
                            const UnigramConfig& config = {});

// Character, word and morphemic families. The character family ignores
// `vocab_size` and logs a warning when it differs from the alphabet size.
TokenizerModel BuildLookup(const Corpus& corpus, Family family,
                           std::size_t vocab_size,
                           const PreTokenizer& pre_tokenizer);

// Dispatches on `family`.
TokenizerModel TrainTokenizer(const Corpus& corpus, Family family,
                              std::size_t vocab_size,
                              const PreTokenizer& pre_tokenizer,
                              const UnigramConfig& unigram_config = {});

std::string SerializeModel(const TokenizerModel& model);
// `base` anchors the pre-tokenizer's relative segmenter path.
TokenizerModel DeserializeModel(std::string_view text,
                                const std::filesystem::path& base = {});

// Segmenter paths are stored relative to the model file's directory when
// possible.
void SaveModel(const TokenizerModel& model, const std::filesystem::path& path);
TokenizerModel LoadModel(const std::filesystem::path& path);

// Hex digest used to tie a model to the segmenter file it was trained with.
std::string FileFingerprint(const std::filesystem::path& path);

}  // namespace morphotok
