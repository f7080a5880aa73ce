#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morphotok/error.h"
#include "morphotok/morphscore.h"
#include "morphotok/segment.h"
#include "morphotok/tokenizer.h"
#include "morphotok/unicode.h"

namespace morphotok {

// A manifest problem; `field()` names the offending JSON field.
class ManifestError : public Error {
 public:
  ManifestError(std::string field, const std::string& what)
      : Error("manifest field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridEntry {
  Family family = Family::kBpe;
  // "none", "lexicon:PATH", "mdl" (trained by the run) or "mdl:PATH".
  std::string pre_tokenizer;
  std::size_t vocab_size = 0;

  // Stable file-name stem, e.g. "bpe-lexicon_lex-8192".
  std::string Id() const;
};

struct ExperimentManifest {
  std::vector<std::filesystem::path> corpus;
  Normalization normalization = Normalization::kNfc;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::vector<Family> families;
  std::vector<std::string> pre_tokenizers;
  std::vector<std::size_t> vocab_sizes;
  std::vector<std::filesystem::path> gold;
  std::filesystem::path eval_corpus;
  double alpha = 2.5;
  std::filesystem::path output_dir;
  MdlConfig mdl;
  BoundaryUnit boundary_unit = BoundaryUnit::kCodePoint;

  // Families × pre-tokenizers × vocab sizes, in that nesting order.
  std::vector<GridEntry> Grid() const;
};

// Parses and validates the manifest. Relative paths resolve against the
// manifest's directory; every input path must exist.
ExperimentManifest LoadManifest(const std::filesystem::path& path);
ExperimentManifest ParseManifest(std::string_view text,
                                 const std::filesystem::path& base_dir);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 some entries failed
  std::vector<std::string> failed;
  std::filesystem::path csv;
  std::size_t entries = 0;
};

// Trains and evaluates every grid entry, writing models/, reports/, logs/
// and analysis.csv under the output directory. The CSV is written once, at
// the end, by rename.
RunResult RunExperiment(const ExperimentManifest& manifest);

// Column order of analysis.csv.
const std::vector<std::string>& AnalysisColumns();

}  // namespace morphotok
