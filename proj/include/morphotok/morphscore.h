#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphotok/tokenizer.h"
#include "morphotok/unicode.h"

namespace morphotok {

enum class MorphCategory { kDerivational, kInflectional, kUnspecified };

std::string_view MorphCategoryName(MorphCategory c);
MorphCategory ParseMorphCategory(std::string_view name);

// Sorted, without repeats. Positions are prefix lengths.
using BoundarySet = std::vector<std::size_t>;

struct GoldEntry {
  std::string word;
  std::vector<std::string> segments;
  MorphCategory category = MorphCategory::kUnspecified;
  BoundarySet boundaries;  // code points
};

// A parsed gold line before the concatenation check.
struct RawGoldEntry {
  std::string word;
  std::vector<std::string> segments;
  MorphCategory category = MorphCategory::kUnspecified;
  std::size_t line = 0;
};

struct DroppedGoldEntry {
  RawGoldEntry entry;
  std::string reason;
};

struct GoldFilterResult {
  std::vector<GoldEntry> kept;
  std::vector<DroppedGoldEntry> dropped;
};

// Parses `word<TAB>seg1 seg2 ...[<TAB>category]`; blank lines are skipped.
// Malformed lines raise ParseError. No concatenation check.
std::vector<RawGoldEntry> LoadRawGoldset(
    const std::filesystem::path& path,
    Normalization normalization = Normalization::kNfc);

// As LoadRawGoldset, but a line whose segments do not concatenate to the
// word is also a ParseError.
std::vector<GoldEntry> LoadGoldset(const std::filesystem::path& path,
                                   Normalization normalization = Normalization::kNfc);

GoldFilterResult FilterGoldset(const std::vector<RawGoldEntry>& raw);

// Writes entries in the gold TSV format.
void WriteGoldset(const std::vector<GoldEntry>& entries,
                  const std::filesystem::path& path);
void WriteDropped(const std::vector<DroppedGoldEntry>& dropped,
                  const std::filesystem::path& path);

enum class BoundaryUnit { kCodePoint, kGrapheme };

std::string_view BoundaryUnitName(BoundaryUnit u);
BoundaryUnit ParseBoundaryUnit(std::string_view name);

// Code-point prefix lengths of every non-final piece; nullopt when the pieces
// do not concatenate to `word`.
std::optional<BoundarySet> BoundariesOf(std::string_view word,
                                        const std::vector<std::string>& pieces);

// Re-expresses code-point boundaries of `word` in grapheme clusters. A
// boundary inside a cluster moves to the end of that cluster; one that lands
// on the end of the word is dropped.
BoundarySet ToGraphemeBoundaries(std::string_view word,
                                 const BoundarySet& code_point_boundaries);

struct MorphWordScore {
  std::string word;
  BoundarySet gold;
  BoundarySet pred;
  std::size_t matched = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

// Throws ContractError when either set is empty.
MorphWordScore ScoreWord(const BoundarySet& gold, const BoundarySet& pred);

struct MorphAverages {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

struct MorphReport {
  std::vector<MorphWordScore> per_word;
  MorphAverages macro;
  MorphAverages micro;
  std::size_t excluded_single_token = 0;
  std::size_t excluded_no_gold_boundary = 0;
  std::size_t excluded_unk_or_mismatch = 0;
  std::size_t evaluated = 0;
  BoundaryUnit unit = BoundaryUnit::kCodePoint;

  std::size_t total() const {
    return evaluated + excluded_single_token + excluded_no_gold_boundary +
           excluded_unk_or_mismatch;
  }
};

// Tokenizes each gold word in isolation and scores it. Exclusions apply in
// order: single predicted token, no gold boundary, unk or concat mismatch.
MorphReport EvaluateMorphology(const std::vector<GoldEntry>& gold,
                               const TokenizerModel& model,
                               BoundaryUnit unit = BoundaryUnit::kCodePoint);

// {macro, micro, exclusions, evaluated, unit}.
std::string MorphReportJson(const MorphReport& report);
// One JSON object per evaluated word.
std::string MorphPerWordJsonl(const MorphReport& report);

}  // namespace morphotok
